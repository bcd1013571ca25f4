//! Planning in imagination: options, compiled-in plans, rollout rewards,
//! and plan comparison between the true environment and a world model.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::env::{
    add_object, blank_state, mechanics, set_player_inventory_item, set_tile_material, transition, Action, CARDINALS,
};
use crate::error::{EnvError, HarnessError, ModelError};
use crate::eval::EvaluatableWorldModel;
use crate::inference::Transition;
use crate::rng;
use crate::state::{EntityKind, Item, Material, Position, WorldState};

/// Outcome of one pathfinding query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStep {
    Move(Action),
    /// Adjacent to and facing a goal tile.
    Arrived,
    Unreachable,
}

fn passable(s: &WorldState, p: Position) -> bool {
    s.in_bounds(p) && s.material(p).is_some_and(|m| mechanics().walkable.contains(&m)) && !s.is_occupied(p)
}

/// Breadth-first search over free walkable tiles from the player to the
/// nearest tile adjacent to a goal tile. Neighbors expand in `CARDINALS`
/// order.
pub fn pathfind_action<G: Fn(&WorldState, Position) -> bool>(s: &WorldState, goal: G) -> PathStep {
    let start = s.player_position();
    let facing = start.offset(s.player().facing);
    if s.in_bounds(facing) && goal(s, facing) {
        return PathStep::Arrived;
    }
    let near_goal = |p: Position| CARDINALS.iter().map(|&d| p.offset(d)).find(|&t| s.in_bounds(t) && goal(s, t));
    if let Some(t) = near_goal(start) {
        // Moving into a blocked tile only turns the player.
        return PathStep::Move(Action::toward(Position::new(t.x - start.x, t.y - start.y)).expect("cardinal"));
    }
    let (w, h) = (s.width(), s.height());
    let idx = |p: Position| (p.y * w + p.x) as usize;
    let mut first: Vec<Option<Position>> = vec![None; (w * h) as usize];
    let mut seen = vec![false; (w * h) as usize];
    seen[idx(start)] = true;
    let mut queue = VecDeque::new();
    for d in CARDINALS {
        let t = start.offset(d);
        if passable(s, t) && !seen[idx(t)] {
            seen[idx(t)] = true;
            first[idx(t)] = Some(d);
            queue.push_back(t);
        }
    }
    while let Some(p) = queue.pop_front() {
        if near_goal(p).is_some() {
            let d = first[idx(p)].expect("set on enqueue");
            return PathStep::Move(Action::toward(d).expect("cardinal"));
        }
        for d in CARDINALS {
            let t = p.offset(d);
            if passable(s, t) && !seen[idx(t)] {
                seen[idx(t)] = true;
                first[idx(t)] = first[idx(p)];
                queue.push_back(t);
            }
        }
    }
    PathStep::Unreachable
}

/// Why a plan stopped before finishing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Halt {
    Budget,
    Unreachable,
}

/// Drives a plan against a transition capability it never inspects.
pub struct Runner<'a> {
    state: WorldState,
    step: &'a mut dyn FnMut(&WorldState, Action) -> WorldState,
    rollout: Vec<Transition>,
    budget: usize,
}

impl<'a> Runner<'a> {
    pub fn new(
        initial: WorldState,
        budget: usize,
        step: &'a mut dyn FnMut(&WorldState, Action) -> WorldState,
    ) -> Self {
        Self {
            state: initial,
            step,
            rollout: Vec::new(),
            budget,
        }
    }

    pub fn state(&self) -> &WorldState {
        &self.state
    }

    pub fn count(&self, item: Item) -> i32 {
        self.state.player().inventory.get(item)
    }

    pub fn act(&mut self, a: Action) -> Result<(), Halt> {
        if self.rollout.len() >= self.budget {
            return Err(Halt::Budget);
        }
        let next = (self.step)(&self.state, a);
        self.rollout.push(Transition {
            state: std::mem::replace(&mut self.state, next.clone()),
            action: a,
            next,
        });
        Ok(())
    }

    /// Pathfind option: walk until adjacent to and facing a goal tile.
    pub fn pathfind<G: Fn(&WorldState, Position) -> bool>(&mut self, goal: G) -> Result<(), Halt> {
        loop {
            match pathfind_action(&self.state, &goal) {
                PathStep::Arrived => return Ok(()),
                PathStep::Unreachable => return Err(Halt::Unreachable),
                PathStep::Move(a) => self.act(a)?,
            }
        }
    }

    /// Interact-adjacent option: reach a goal tile, then repeat `action`
    /// until `done` holds.
    pub fn interact_adjacent<G, D>(&mut self, goal: G, action: Action, done: D) -> Result<(), Halt>
    where
        G: Fn(&WorldState, Position) -> bool,
        D: Fn(&WorldState) -> bool,
    {
        while !done(&self.state) {
            self.pathfind(&goal)?;
            self.act(action)?;
        }
        Ok(())
    }

    /// Gathers `n` more of `item` from the nearest `material` tiles.
    pub fn collect(&mut self, material: Material, item: Item, n: i32) -> Result<(), Halt> {
        let want = self.count(item) + n;
        self.interact_adjacent(
            |s, p| s.material(p) == Some(material),
            Action::Do,
            |s| s.player().inventory.get(item) >= want,
        )
    }

    /// Combat option against one entity until it is gone.
    pub fn combat(&mut self, entity_id: u32) -> Result<(), Halt> {
        let alive = |s: &WorldState| s.entity(entity_id).is_some_and(|e| e.is_live());
        while alive(&self.state) {
            self.pathfind(|s, p| s.entity(entity_id).is_some_and(|e| e.is_live() && e.position == p))?;
            self.act(Action::Do)?;
        }
        Ok(())
    }

    /// Performs a placing action on the facing tile, first stepping aside
    /// when that tile is taken.
    pub fn place_ahead(&mut self, a: Action) -> Result<(), Halt> {
        let s = &self.state;
        let p = s.player_position();
        let f = s.player().facing;
        if !passable(s, p.offset(f)) {
            // Sideways steps keep the blocked tile within reach.
            let mut dirs = CARDINALS;
            dirs.sort_by_key(|d| d.x * f.x + d.y * f.y != 0);
            let d = dirs
                .into_iter()
                .find(|&d| passable(s, p.offset(d)) && passable(s, p.offset(d).offset(d)));
            match d {
                Some(d) => self.act(Action::toward(d).expect("cardinal"))?,
                None => return Err(Halt::Unreachable),
            }
        }
        self.act(a)
    }

    pub fn finish(self) -> Vec<Transition> {
        self.rollout
    }
}

pub type PlanBody = fn(&mut Runner) -> Result<(), Halt>;

#[derive(Clone, Copy, Debug)]
pub struct Plan {
    pub name: &'static str,
    pub budget: usize,
    pub body: PlanBody,
}

/// Reward over a rollout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reward {
    StoneCollected,
    SwordsCrafted,
    DamagePerSecond,
}

fn swords(s: &WorldState) -> i32 {
    let inv = &s.player().inventory;
    inv.get(Item::WoodSword) + inv.get(Item::StoneSword) + inv.get(Item::IronSword)
}

impl Reward {
    pub fn name(self) -> &'static str {
        match self {
            Reward::StoneCollected => "stone_collected",
            Reward::SwordsCrafted => "swords_crafted",
            Reward::DamagePerSecond => "damage_per_second",
        }
    }

    pub fn evaluate(self, rollout: &[Transition]) -> f64 {
        match self {
            Reward::StoneCollected => rollout
                .iter()
                .map(|t| (t.next.player().inventory.get(Item::Stone) - t.state.player().inventory.get(Item::Stone)).max(0))
                .sum::<i32>() as f64,
            Reward::SwordsCrafted => rollout
                .iter()
                .filter(|t| swords(&t.next) > swords(&t.state))
                .count() as f64,
            Reward::DamagePerSecond => {
                let mut damage = 0;
                let mut attacks = 0;
                for t in rollout.iter().filter(|t| t.action == Action::Do) {
                    let target = t.state.player_position().offset(t.state.player().facing);
                    let Some(e) = t.state.entity_at(target).filter(|e| e.kind() == EntityKind::Zombie) else {
                        continue;
                    };
                    attacks += 1;
                    let after = t.next.entity(e.entity_id).map_or(e.health(), |n| n.health());
                    damage += (e.health() - after).max(0);
                }
                if attacks == 0 {
                    0.0
                } else {
                    damage as f64 / attacks as f64
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub reward: f64,
    pub rollout: Vec<Transition>,
    /// Set when the plan stopped early.
    pub halted: Option<Halt>,
}

pub fn execute_plan(
    plan: &Plan,
    initial: &WorldState,
    step: &mut dyn FnMut(&WorldState, Action) -> WorldState,
    reward: Reward,
) -> Execution {
    let mut runner = Runner::new(initial.clone(), plan.budget, step);
    let halted = (plan.body)(&mut runner).err();
    let rollout = runner.finish();
    Execution {
        reward: reward.evaluate(&rollout),
        rollout,
        halted,
    }
}

/// A planning problem with the plans it compares.
#[derive(Clone, Debug)]
pub struct PlanScenario {
    pub name: &'static str,
    pub initial: WorldState,
    pub reward: Reward,
    /// Most effective plan first.
    pub plans: Vec<Plan>,
}

fn stone_miner_world() -> Result<WorldState, EnvError> {
    let mut s = blank_state((12, 12), 21)?;
    s = set_tile_material(&s, Position::new(2, 8), "tree")?;
    for (x, y) in [(10, 2), (11, 2), (10, 1)] {
        s = set_tile_material(&s, Position::new(x, y), "stone")?;
    }
    Ok(s)
}

fn mine_all(r: &mut Runner) -> Result<(), Halt> {
    while r.state().materials.contains(&Some(Material::Stone)) {
        r.collect(Material::Stone, Item::Stone, 1)?;
    }
    Ok(())
}

fn stone_miner() -> Result<PlanScenario, EnvError> {
    Ok(PlanScenario {
        name: "stone_miner",
        initial: stone_miner_world()?,
        reward: Reward::StoneCollected,
        plans: vec![
            Plan {
                name: "craft_pickaxe_first",
                budget: 80,
                body: |r| {
                    r.collect(Material::Tree, Item::Wood, 2)?;
                    r.place_ahead(Action::PlaceTable)?;
                    r.act(Action::MakeWoodPickaxe)?;
                    mine_all(r)
                },
            },
            Plan {
                name: "mine_immediately",
                budget: 80,
                body: |r| {
                    for _ in 0..3 {
                        r.pathfind(|s, p| s.material(p) == Some(Material::Stone))?;
                        r.act(Action::Do)?;
                    }
                    Ok(())
                },
            },
        ],
    })
}

fn sword_maker() -> Result<PlanScenario, EnvError> {
    let s = set_player_inventory_item(&blank_state((9, 9), 22)?, "wood", 5)?;
    Ok(PlanScenario {
        name: "sword_maker",
        initial: s,
        reward: Reward::SwordsCrafted,
        plans: vec![
            Plan {
                name: "reuse_table",
                budget: 20,
                body: |r| {
                    r.place_ahead(Action::PlaceTable)?;
                    while r.count(Item::Wood) > 0 {
                        r.act(Action::MakeWoodSword)?;
                    }
                    Ok(())
                },
            },
            Plan {
                name: "table_per_sword",
                budget: 20,
                body: |r| {
                    while r.count(Item::Wood) > 0 {
                        r.place_ahead(Action::PlaceTable)?;
                        r.act(Action::MakeWoodSword)?;
                    }
                    Ok(())
                },
            },
        ],
    })
}

/// Id of the zombie in the zombie fighter scenario.
pub const ZOMBIE_ID: u32 = 1;

fn zombie_fighter() -> Result<PlanScenario, EnvError> {
    let mut s = blank_state((16, 16), 23)?;
    s = set_tile_material(&s, Position::new(8, 9), "tree")?;
    let fields = serde_json::json!({"health": 6});
    s = add_object(&s, "zombie", Position::new(14, 14), fields.as_object().expect("object"))?;
    Ok(PlanScenario {
        name: "zombie_fighter",
        initial: s,
        reward: Reward::DamagePerSecond,
        plans: vec![
            Plan {
                name: "craft_sword_first",
                budget: 60,
                body: |r| {
                    r.collect(Material::Tree, Item::Wood, 2)?;
                    r.place_ahead(Action::PlaceTable)?;
                    r.act(Action::MakeWoodSword)?;
                    r.combat(ZOMBIE_ID)
                },
            },
            Plan {
                name: "fight_immediately",
                budget: 60,
                body: |r| r.combat(ZOMBIE_ID),
            },
        ],
    })
}

pub const PLAN_SCENARIOS: [&str; 3] = ["stone_miner", "sword_maker", "zombie_fighter"];

pub fn plan_scenario(name: &str) -> Result<PlanScenario, HarnessError> {
    let built = match name {
        "stone_miner" => stone_miner(),
        "sword_maker" => sword_maker(),
        "zombie_fighter" => zombie_fighter(),
        _ => return Err(HarnessError::UnknownScenario(name.to_string())),
    };
    Ok(built.expect("plan scenario fixtures are valid"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubstrateResult {
    pub rewards: Vec<f64>,
    pub steps: Vec<usize>,
    pub mean_reward: f64,
    pub mean_steps: f64,
    pub halted: usize,
}

impl SubstrateResult {
    fn new(runs: &[Execution]) -> Self {
        let rewards: Vec<f64> = runs.iter().map(|e| e.reward).collect();
        let steps: Vec<usize> = runs.iter().map(|e| e.rollout.len()).collect();
        let n = runs.len().max(1) as f64;
        Self {
            mean_reward: rewards.iter().sum::<f64>() / n,
            mean_steps: steps.iter().sum::<usize>() as f64 / n,
            halted: runs.iter().filter(|e| e.halted.is_some()).count(),
            rewards,
            steps,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub plan: String,
    pub env: SubstrateResult,
    pub model: SubstrateResult,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanComparison {
    pub scenario: String,
    pub reward: Reward,
    pub model: String,
    pub trials: usize,
    pub seed: u64,
    pub plans: Vec<PlanResult>,
    /// Plan names grouped best first; ties share a group.
    pub env_order: Vec<Vec<String>>,
    pub model_order: Vec<Vec<String>>,
    pub agreement: bool,
}

/// Weak order of `(name, score)` pairs, best first.
pub fn weak_order(scores: &[(String, f64)]) -> Vec<Vec<String>> {
    let mut sorted: Vec<&(String, f64)> = scores.iter().collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1));
    let mut out: Vec<Vec<String>> = Vec::new();
    let mut last: Option<f64> = None;
    for (name, v) in sorted {
        match last {
            Some(l) if (l - v).abs() <= 1e-9 => out.last_mut().expect("group open").push(name.clone()),
            _ => out.push(vec![name.clone()]),
        }
        last = Some(*v);
    }
    for g in &mut out {
        g.sort();
    }
    out
}

/// One model step. An invalid sampled state is resampled once and the
/// second draw accepted as is; a model that cannot sample at all leaves the
/// state unchanged.
pub fn model_step(
    model: &dyn EvaluatableWorldModel,
    s: &WorldState,
    a: Action,
    rng: &mut rng::StreamRng,
) -> WorldState {
    match model.sample(s, a, rng).or_else(|_| model.sample(s, a, rng)) {
        Ok(next) => next,
        Err(ModelError::InvalidSample { state, .. }) => *state,
        Err(_) => s.clone(),
    }
}

pub fn compare_plans(
    scenario: &PlanScenario,
    model: &dyn EvaluatableWorldModel,
    trials: usize,
    seed: u64,
) -> PlanComparison {
    let mut plans = Vec::new();
    for plan in &scenario.plans {
        let mut env_runs = Vec::new();
        let mut model_runs = Vec::new();
        for trial in 0..trials {
            let tag = format!("plan/{}/{}/{trial}", scenario.name, plan.name);
            let mut initial = scenario.initial.clone();
            initial.rng_state = rng::seeded_state(rng::derive_seed(seed, &tag));
            env_runs.push(execute_plan(plan, &initial, &mut |s, a| transition(s, a), scenario.reward));
            let mut r = rng::substream(seed, &format!("{tag}/model"));
            model_runs.push(execute_plan(
                plan,
                &initial,
                &mut |s, a| model_step(model, s, a, &mut r),
                scenario.reward,
            ));
        }
        plans.push(PlanResult {
            plan: plan.name.to_string(),
            env: SubstrateResult::new(&env_runs),
            model: SubstrateResult::new(&model_runs),
        });
    }
    let order = |f: fn(&PlanResult) -> f64| {
        weak_order(&plans.iter().map(|p| (p.plan.clone(), f(p))).collect::<Vec<_>>())
    };
    let env_order = order(|p| p.env.mean_reward);
    let model_order = order(|p| p.model.mean_reward);
    PlanComparison {
        scenario: scenario.name.to_string(),
        reward: scenario.reward,
        model: model.name(),
        trials,
        seed,
        agreement: env_order == model_order,
        env_order,
        model_order,
        plans,
    }
}
