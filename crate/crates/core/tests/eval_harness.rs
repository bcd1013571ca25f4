use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use lawmix_core::corpus;
use lawmix_core::env::{add_object, blank_state, set_player_inventory_item, set_tile_material, transition, Action};
use lawmix_core::eval::{
    aggregate, all_scenarios, deterministic, evaluate_scenario, evaluate_suite, generate_distractors, mean,
    random_baseline_mrr, rank_truth, raw_distance, rollout, run_scenario, scenario_by_name, Mutator, OracleModel,
    RandomModel, ScenarioReport,
};
use lawmix_core::model::observables;
use lawmix_core::rng::substream;
use lawmix_core::state::{EntityKind, Item, Position, WorldState};
use lawmix_core::Model;

fn blank() -> WorldState {
    blank_state((9, 9), 0).unwrap()
}

fn with_zombie(health: i32) -> WorldState {
    add_object(&blank(), "zombie", Position::new(4, 5), &json!({"health": health}).as_object().unwrap().clone())
        .unwrap()
}

#[test]
fn illegal_movement_is_one_step() {
    for a in [Action::Noop, Action::Do] {
        let s = blank();
        let truth = transition(&s, a);
        for seed in 0..20 {
            let bad = Mutator::IllegalMovement.apply(&s, a, &truth, &mut substream(seed, "m")).unwrap();
            assert_eq!(bad.player_position().manhattan(truth.player_position()), 1);
        }
    }
    let truth = transition(&blank(), Action::MoveLeft);
    assert!(Mutator::IllegalMovement.apply(&blank(), Action::MoveLeft, &truth, &mut substream(0, "m")).is_none());
}

#[test]
fn entity_health_skips_neighbouring_values() {
    let s = with_zombie(5);
    let truth = s.clone();
    let mut seen = BTreeSet::new();
    for seed in 0..200 {
        let bad = Mutator::EntityHealth.apply(&s, Action::Noop, &truth, &mut substream(seed, "h")).unwrap();
        seen.insert(bad.live_of_kind(EntityKind::Zombie)[0].health());
    }
    assert!(seen.is_subset(&BTreeSet::from([0, 1, 2, 3, 7, 8, 9])));
    assert!(seen.len() >= 5);
}

#[test]
fn crafting_mutant_makes_another_item() {
    let mut s = set_tile_material(&blank(), Position::new(3, 3), "table").unwrap();
    s = set_player_inventory_item(&s, "wood", 2).unwrap();
    let truth = transition(&s, Action::MakeWoodSword);
    for seed in 0..20 {
        let bad = Mutator::CraftIllegalItem.apply(&s, Action::MakeWoodSword, &truth, &mut substream(seed, "c")).unwrap();
        let gained: Vec<Item> = Item::ALL
            .iter()
            .copied()
            .filter(|&i| bad.player().inventory.get(i) > truth.player().inventory.get(i))
            .collect();
        assert_eq!(gained.len(), 1);
        assert_ne!(gained[0], Item::WoodSword);
    }
}

#[test]
fn inventory_mutant_always_differs() {
    let truth = transition(&blank(), Action::Noop);
    for seed in 0..50 {
        let bad = Mutator::Inventory.apply(&blank(), Action::Noop, &truth, &mut substream(seed, "i")).unwrap();
        let differs = Item::ALL.iter().any(|&i| bad.player().inventory.get(i) != truth.player().inventory.get(i));
        assert!(differs);
    }
}

#[test]
fn combat_distractors_include_health_mutants() {
    let s = with_zombie(5);
    let truth = transition(&s, Action::Do);
    let zid = s.live_of_kind(EntityKind::Zombie)[0].entity_id;
    let now = truth.entity(zid).unwrap().health();
    let mut found = false;
    for seed in 0..10 {
        let ds = generate_distractors(&s, Action::Do, &truth, 8, &mut substream(seed, "k"));
        assert!(ds.len() <= 8);
        found |= ds.iter().any(|d| d.entity(zid).is_some_and(|e| (e.health() - now).abs() >= 2));
    }
    assert!(found);
    assert!(Mutator::from_name("teleport").is_err());
}

#[test]
fn ranking_examples() {
    let r = rank_truth(-0.7, &[-15.4]);
    assert_eq!(r.rank, 1);
    assert_eq!(r.reciprocal(), 1.0);
    assert_eq!(rank_truth(-1.0, &[-1.0, -5.0]).rank, 2);
    assert_eq!(rank_truth(-3.0, &[-1.0, -2.0, -5.0]).rank, 3);
    let bad = rank_truth(f64::NAN, &[-1.0, -2.0]);
    assert!(bad.non_finite);
    assert_eq!(bad.rank, 3);
    assert_eq!(rank_truth(-1.0, &[f64::NAN]).rank, 1);
}

#[test]
fn uninformed_scores_hit_the_harmonic_baseline() {
    let mut r = substream(0, "uniform");
    let trials = 100_000;
    let mut total = 0.0;
    for _ in 0..trials {
        let scores: Vec<f64> = (0..9).map(|_| r.gen()).collect();
        total += rank_truth(scores[0], &scores[1..]).reciprocal();
    }
    let want = random_baseline_mrr(9);
    assert!((want - 0.3143).abs() < 1e-4);
    assert!((total / trials as f64 - want).abs() <= 0.01);
}

fn report(mrr: f64, n: usize) -> ScenarioReport {
    ScenarioReport {
        scenario: format!("s{n}"),
        group: "movement".into(),
        stochastic: false,
        transitions: n,
        ranks: vec![Some(1); n],
        skipped: 0,
        flagged: 0,
        invalid_samples: 0,
        rank1: Some(mrr),
        mrr: Some(mrr),
        raw_distance: 0.0,
        normalized_distance: 0.0,
    }
}

#[test]
fn aggregation_is_a_mean_of_means() {
    let one = [report(0.25, 3)];
    assert_eq!(aggregate(&one, |r| r.mrr).unwrap(), 0.25);
    let two = [report(1.0, 1), report(0.0, 100)];
    assert_eq!(aggregate(&two, |r| r.mrr).unwrap(), 0.5);
    assert!(mean(&[]).is_err());
}

#[test]
fn oracle_is_perfect_on_deterministic_scenarios() {
    let suite = deterministic(all_scenarios());
    assert!(suite.len() >= 20);
    let r = evaluate_suite(&OracleModel, &suite, 8, 7).unwrap();
    assert_eq!(r.rank1, 1.0);
    assert_eq!(r.mrr, 1.0);
    assert_eq!(r.raw_distance, 0.0);
    assert_eq!(r.normalized_distance, 0.0);
    assert!(r.groups.iter().all(|g| g.rank1 == Some(1.0)));
}

#[test]
fn random_model_sits_near_the_baseline() {
    let suite = deterministic(all_scenarios());
    let r = evaluate_suite(&RandomModel { seed: 3 }, &suite, 8, 7).unwrap();
    assert!(r.mrr < 0.6, "{}", r.mrr);
    assert!(r.mrr > 0.15, "{}", r.mrr);
}

#[test]
fn one_leaf_is_distance_one() {
    let s = blank();
    let t = set_player_inventory_item(&s, "sapling", 1).unwrap();
    assert_eq!(raw_distance(&s, &t), 1);
    assert_eq!(raw_distance(&t, &t), 0);
}

#[test]
fn identity_model_distance_is_the_leaf_diff() {
    for a in Action::MOVES {
        let s = blank();
        let truth = transition(&s, a);
        let (x, y) = (observables(&s), observables(&truth));
        let keys: BTreeSet<&String> = x.keys().chain(y.keys()).collect();
        let differing = keys.into_iter().filter(|k| x.get(*k) != y.get(*k)).count();
        assert_eq!(raw_distance(&s, &truth), differing);
    }
}

#[test]
fn scenario_scripts() {
    let wood = rollout(&scenario_by_name("collect_wood").unwrap());
    let last = wood.last().unwrap();
    assert_eq!(
        last.next.player().inventory.get(Item::Wood),
        last.state.player().inventory.get(Item::Wood) + 1
    );
    for t in rollout(&scenario_by_name("unsuccessful_craft_wooden_pickaxe").unwrap()) {
        assert_eq!(t.next.player().inventory.get(Item::WoodPickaxe), t.state.player().inventory.get(Item::WoodPickaxe));
    }
    let mut sc = scenario_by_name("random_movement").unwrap();
    sc.max_steps = 1;
    sc.goal = None;
    assert_eq!(run_scenario(&sc, transition).len(), 1);
    assert!(scenario_by_name("fly").is_err());
}

#[test]
fn unfit_model_report_is_repeatable() {
    let sc = scenario_by_name("zombie_defeat").unwrap();
    let m = Model::new(corpus::standard());
    let r = evaluate_scenario(&m, &sc, 8, 1).unwrap();
    assert_eq!(r.transitions, rollout(&sc).len());
    assert_eq!(r.ranks.len(), r.transitions);
    assert_eq!(r.group, "combat");
    let again = evaluate_scenario(&m, &sc, 8, 1).unwrap();
    assert_eq!(r, again);
}

proptest! {
    #[test]
    fn rank_ignores_candidate_order(truth in -50.0f64..0.0, ds in prop::collection::vec(-50.0f64..0.0, 1..12), seed in 0u64..1000) {
        let mut shuffled = ds.clone();
        shuffled.shuffle(&mut substream(seed, "order"));
        prop_assert_eq!(rank_truth(truth, &ds), rank_truth(truth, &shuffled));
    }
}
