use std::collections::VecDeque;

use proptest::prelude::*;

use lawmix_core::env::{blank_state, mechanics, set_player_position, set_tile_material, transition, Action, CARDINALS};
use lawmix_core::eval::OracleModel;
use lawmix_core::planner::{
    compare_plans, execute_plan, model_step, pathfind_action, plan_scenario, weak_order, PathStep, Reward,
    PLAN_SCENARIOS,
};
use lawmix_core::rng::substream;
use lawmix_core::state::{canonicalize, Material, Position, WorldState};

fn is_tree(s: &WorldState, p: Position) -> bool {
    s.material(p) == Some(Material::Tree)
}

fn world(size: i32, player: (i32, i32)) -> WorldState {
    let s = blank_state((size, size), 0).unwrap();
    set_player_position(&s, Position::new(player.0, player.1)).unwrap()
}

#[test]
fn straight_line_to_a_tree() {
    let s = set_tile_material(&world(11, (5, 5)), Position::new(7, 5), "tree").unwrap();
    assert_eq!(pathfind_action(&s, is_tree), PathStep::Move(Action::MoveRight));
}

#[test]
fn facing_the_goal_is_arrival() {
    let s = set_tile_material(&world(11, (5, 5)), Position::new(5, 6), "tree").unwrap();
    assert_eq!(pathfind_action(&s, is_tree), PathStep::Arrived);
    let s = set_tile_material(&world(11, (5, 5)), Position::new(4, 5), "tree").unwrap();
    assert_eq!(pathfind_action(&s, is_tree), PathStep::Move(Action::MoveLeft));
}

#[test]
fn walled_off_goal_is_unreachable() {
    let mut s = set_tile_material(&world(11, (2, 2)), Position::new(8, 8), "tree").unwrap();
    for d in CARDINALS {
        s = set_tile_material(&s, Position::new(8, 8).offset(d), "stone").unwrap();
    }
    assert_eq!(pathfind_action(&s, is_tree), PathStep::Unreachable);
    let s = world(11, (2, 2));
    assert_eq!(pathfind_action(&s, is_tree), PathStep::Unreachable);
}

fn passable(s: &WorldState, p: Position) -> bool {
    s.in_bounds(p) && s.material(p).is_some_and(|m| mechanics().walkable.contains(&m)) && !s.is_occupied(p)
}

/// Steps from each free tile to the nearest free tile beside a goal.
fn distances(s: &WorldState) -> Vec<Option<usize>> {
    let (w, h) = (s.width(), s.height());
    let idx = |p: Position| (p.y * w + p.x) as usize;
    let mut dist = vec![None; (w * h) as usize];
    let mut queue = VecDeque::new();
    for x in 0..w {
        for y in 0..h {
            let p = Position::new(x, y);
            let beside = CARDINALS.iter().any(|&d| s.in_bounds(p.offset(d)) && is_tree(s, p.offset(d)));
            if passable(s, p) && beside {
                dist[idx(p)] = Some(0);
                queue.push_back(p);
            }
        }
    }
    while let Some(p) = queue.pop_front() {
        let here = dist[idx(p)].unwrap();
        for d in CARDINALS {
            let t = p.offset(d);
            if passable(s, t) && dist[idx(t)].is_none() {
                dist[idx(t)] = Some(here + 1);
                queue.push_back(t);
            }
        }
    }
    dist
}

fn maze() -> impl Strategy<Value = WorldState> {
    (7i32..=12, prop::collection::vec((0u8..10, 0u8..12, 0u8..12), 0..50)).prop_map(|(size, cells)| {
        let c = size / 2;
        let mut s = blank_state((size, size), 0).unwrap();
        for (kind, x, y) in cells {
            let p = Position::new(x as i32 % size, y as i32 % size);
            if p == Position::new(c, c) {
                continue;
            }
            let mat = match kind {
                0..=5 => "stone",
                6 | 7 => "water",
                _ => "tree",
            };
            s = set_tile_material(&s, p, mat).unwrap();
        }
        s
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn first_move_is_on_a_shortest_path(s in maze()) {
        let start = s.player_position();
        let near = CARDINALS.iter().any(|&d| s.in_bounds(start.offset(d)) && is_tree(&s, start.offset(d)));
        let dist = distances(&s);
        let at = |p: Position| dist[(p.y * s.width() + p.x) as usize];
        let best = CARDINALS
            .iter()
            .map(|&d| start.offset(d))
            .filter(|&t| passable(&s, t))
            .filter_map(at)
            .min();
        match pathfind_action(&s, is_tree) {
            PathStep::Arrived => prop_assert!(is_tree(&s, start.offset(s.player().facing))),
            PathStep::Unreachable => prop_assert!(!near && best.is_none()),
            PathStep::Move(a) => {
                let t = start.offset(a.direction().unwrap());
                if near {
                    prop_assert!(is_tree(&s, t));
                } else {
                    prop_assert!(passable(&s, t));
                    prop_assert_eq!(at(t), best);
                }
            }
        }
    }
}

#[test]
fn substrates_are_interchangeable() {
    for name in PLAN_SCENARIOS {
        let sc = plan_scenario(name).unwrap();
        for plan in &sc.plans {
            let direct = execute_plan(plan, &sc.initial, &mut |s, a| transition(s, a), sc.reward);
            let mut r = substream(0, "swap");
            let wrapped = execute_plan(plan, &sc.initial, &mut |s, a| model_step(&OracleModel, s, a, &mut r), sc.reward);
            assert_eq!(direct.rollout.len(), wrapped.rollout.len());
            for (x, y) in direct.rollout.iter().zip(&wrapped.rollout) {
                assert_eq!(canonicalize(&x.next).to_bytes(), canonicalize(&y.next).to_bytes());
            }
            assert_eq!(direct.reward.to_bits(), wrapped.reward.to_bits());

            let frozen = execute_plan(plan, &sc.initial, &mut |s, _| s.clone(), sc.reward);
            assert!(frozen.halted.is_some() || frozen.rollout.len() <= plan.budget);
        }
    }
}

#[test]
fn rewards_are_pure() {
    for name in PLAN_SCENARIOS {
        let sc = plan_scenario(name).unwrap();
        let run = execute_plan(&sc.plans[0], &sc.initial, &mut |s, a| transition(s, a), sc.reward);
        let stored = run.rollout.clone();
        assert_eq!(sc.reward.evaluate(&stored).to_bits(), run.reward.to_bits());
        assert_eq!(sc.reward.evaluate(&stored).to_bits(), sc.reward.evaluate(&stored).to_bits());
    }
}

#[test]
fn identical_plans_tie() {
    let mut sc = plan_scenario("stone_miner").unwrap();
    let mut twin = sc.plans[0];
    twin.name = "twin";
    sc.plans = vec![sc.plans[0], twin];
    let c = compare_plans(&sc, &OracleModel, 2, 5);
    assert_eq!(c.env_order.len(), 1);
    assert_eq!(c.model_order.len(), 1);
    assert!(c.agreement);
}

#[test]
fn weak_order_groups_ties() {
    let scores = vec![("a".to_string(), 1.0), ("b".to_string(), 3.0), ("c".to_string(), 1.0)];
    assert_eq!(weak_order(&scores), vec![vec!["b".to_string()], vec!["a".to_string(), "c".to_string()]]);
}

#[test]
fn oracle_stone_miner() {
    let c = compare_plans(&plan_scenario("stone_miner").unwrap(), &OracleModel, 3, 9);
    let rewards: Vec<(f64, f64)> = c.plans.iter().map(|p| (p.env.mean_reward, p.model.mean_reward)).collect();
    assert_eq!(rewards, vec![(3.0, 3.0), (0.0, 0.0)]);
    assert!(c.agreement);
    let steps = c.plans[0].env.mean_steps;
    assert!((25.0..=40.0).contains(&steps), "{steps}");
}

#[test]
fn environment_rewards() {
    let c = compare_plans(&plan_scenario("sword_maker").unwrap(), &OracleModel, 2, 1);
    assert_eq!(c.plans[0].env.mean_reward, 4.0);
    assert_eq!(c.plans[1].env.mean_reward, 2.0);
    let c = compare_plans(&plan_scenario("zombie_fighter").unwrap(), &OracleModel, 2, 1);
    assert!((c.plans[0].env.mean_reward - 2.0).abs() < 1e-12);
    assert!(c.plans[0].env.mean_reward > c.plans[1].env.mean_reward);
    assert_eq!(c.reward, Reward::DamagePerSecond);
    assert!(plan_scenario("tower_defense").is_err());
}
