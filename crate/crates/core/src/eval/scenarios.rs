//! Hand-built evaluation scenarios: a small initial world and a fixed
//! action script.

use serde_json::{json, Map, Value};

use crate::env::{
    add_object, blank_state, set_player_facing, set_player_inventory_item, set_player_meter, set_tile_material,
    Action,
};
use crate::error::HarnessError;
use crate::state::{Achievement, Meter, Position, WorldState};

use crate::inference::Transition;

/// Goal test over the transitions so far.
pub type Goal = fn(&[Transition]) -> bool;

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub initial: WorldState,
    /// Scripted policy: one action per step.
    pub actions: Vec<Action>,
    /// The rollout stops early once this holds.
    pub goal: Option<Goal>,
    pub max_steps: usize,
    /// Whether the true rollout draws from the environment generator.
    pub stochastic: bool,
}

impl Scenario {
    fn until(mut self, goal: Goal) -> Self {
        self.goal = Some(goal);
        self
    }
}

fn unlocked(steps: &[Transition], a: Achievement) -> bool {
    steps.last().is_some_and(|t| t.next.player().achievements.get(a) > 0)
}

/// Mechanic group used to tabulate reports.
pub fn group_of(name: &str) -> &'static str {
    let body = name.strip_prefix("unsuccessful_").unwrap_or(name);
    match body.split('_').next() {
        Some("collect") => "collect",
        Some("craft") => "craft",
        Some("place") => "place",
        Some("random") => "movement",
        Some("zombie" | "defeat" | "eat") => "combat",
        Some("cow") => "npc",
        _ => "survival",
    }
}

pub const SCENARIO_SIZE: (i32, i32) = (9, 9);

/// Fluent wrapper over the setup functions; the player sits at (4, 4)
/// facing down.
struct Build(WorldState);

impl Build {
    fn new(seed: u64) -> Self {
        Build(blank_state(SCENARIO_SIZE, seed).expect("scenario size is valid"))
    }

    fn tile(self, x: i32, y: i32, m: &str) -> Self {
        Build(set_tile_material(&self.0, Position::new(x, y), m).expect("tile in bounds"))
    }

    fn item(self, item: &str, n: i32) -> Self {
        Build(set_player_inventory_item(&self.0, item, n).expect("known item"))
    }

    fn face(self, dx: i32, dy: i32) -> Self {
        Build(set_player_facing(&self.0, Position::new(dx, dy)).expect("unit facing"))
    }

    fn meter(self, m: Meter, v: f64) -> Self {
        Build(set_player_meter(&self.0, m, v).expect("finite meter"))
    }

    fn spawn(self, kind: &str, x: i32, y: i32, fields: Value) -> Self {
        let fields: Map<String, Value> = match fields {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Build(add_object(&self.0, kind, Position::new(x, y), &fields).expect("valid spawn"))
    }

    fn sleeping(mut self) -> Self {
        self.0.player_mut().sleeping = true;
        self
    }

    fn run(self, name: &'static str, actions: &[Action], stochastic: bool) -> Scenario {
        Scenario {
            name,
            initial: self.0,
            actions: actions.to_vec(),
            goal: None,
            max_steps: actions.len(),
            stochastic,
        }
    }
}

use Action::*;

fn random_movement() -> Scenario {
    Build::new(1)
        .tile(3, 4, "tree")
        .tile(4, 2, "stone")
        .tile(6, 5, "water")
        .run(
            "random_movement",
            &[
                MoveLeft, MoveUp, MoveUp, MoveRight, MoveRight, MoveDown, MoveRight, MoveDown, MoveDown, MoveLeft,
                MoveLeft, MoveUp,
            ],
            false,
        )
}

fn collect(name: &'static str, material: &str, tools: &[(&str, i32)], stochastic: bool) -> Scenario {
    let mut b = Build::new(2).tile(4, 5, material).tile(4, 6, material);
    for (item, n) in tools {
        b = b.item(item, *n);
    }
    b.run(name, &[Do, MoveDown, Do, Noop], stochastic)
}

fn craft(name: &'static str, action: Action, stock: &[(&str, i32)], furnace: bool) -> Scenario {
    let mut b = Build::new(3).tile(5, 4, "table");
    if furnace {
        b = b.tile(3, 4, "furnace");
    }
    for (item, n) in stock {
        b = b.item(item, *n);
    }
    b.run(name, &[action, action, Noop], false)
}

/// The standard evaluation suite.
pub fn core_suite() -> Vec<Scenario> {
    vec![
        random_movement(),
        Build::new(4).tile(4, 5, "tree").run("collect_wood", &[Do, Do, Do], false),
        Build::new(5).tile(3, 4, "water").face(-1, 0).item("drink", 5).run("collect_drink", &[Do, Do, Do], false),
        collect("collect_stone", "stone", &[("wood_pickaxe", 1)], false),
        collect("collect_coal", "coal", &[("wood_pickaxe", 1)], false),
        collect("collect_iron", "iron", &[("stone_pickaxe", 1)], false),
        collect("collect_diamond", "diamond", &[("iron_pickaxe", 1)], false),
        collect("unsuccessful_collect_stone", "stone", &[], false),
        collect("unsuccessful_collect_iron", "iron", &[("wood_pickaxe", 1)], false),
        craft("craft_wooden_pickaxe", MakeWoodPickaxe, &[("wood", 3)], false),
        craft("craft_wooden_sword", MakeWoodSword, &[("wood", 3)], false),
        craft("craft_stone_pickaxe", MakeStonePickaxe, &[("wood", 2), ("stone", 2)], false),
        craft("craft_stone_sword", MakeStoneSword, &[("wood", 2), ("stone", 2)], false),
        craft(
            "craft_iron_pickaxe",
            MakeIronPickaxe,
            &[("wood", 1), ("coal", 1), ("iron", 1)],
            true,
        ),
        craft("craft_iron_sword", MakeIronSword, &[("wood", 1), ("coal", 1), ("iron", 1)], true),
        Build::new(6)
            .item("wood", 3)
            .run("unsuccessful_craft_wooden_pickaxe", &[MakeWoodPickaxe, MakeWoodPickaxe], false),
        Build::new(7).item("wood", 2).run("place_table", &[PlaceTable, Noop], false),
        Build::new(8)
            .tile(4, 5, "water")
            .item("stone", 2)
            .run("place_stone", &[PlaceStone, Noop], false),
        Build::new(9)
            .tile(5, 4, "table")
            .item("stone", 2)
            .run("place_furnace", &[PlaceFurnace, Noop], false),
        Build::new(10)
            .item("wood_sword", 1)
            .spawn("zombie", 4, 6, json!({"cooldown": 0}))
            .run("zombie_defeat", &[Noop, Do, Do, Do, Noop], false)
            .until(|t| unlocked(t, Achievement::DefeatZombie)),
        Build::new(11)
            .tile(4, 5, "path")
            .tile(3, 5, "path")
            .tile(5, 5, "path")
            .item("wood_sword", 1)
            .spawn("skeleton", 4, 5, json!({}))
            .run("defeat_skeleton", &[Do, Do, Noop], true)
            .until(|t| unlocked(t, Achievement::DefeatSkeleton)),
        Build::new(12).spawn("cow", 4, 5, json!({})).run("eat_cow", &[Do, Do, Do, Noop], true)
            .until(|t| unlocked(t, Achievement::EatCow)),
        Build::new(13)
            .spawn("cow", 2, 2, json!({}))
            .spawn("cow", 6, 6, json!({}))
            .run("cow_movement", &[Noop, Noop, Noop, Noop, Noop, Noop], true),
    ]
}

/// Additional scenarios outside the standard suite.
pub fn extended_suite() -> Vec<Scenario> {
    vec![
        Build::new(14).item("sapling", 1).run("place_plant", &[PlacePlant, Noop], false),
        Build::new(15).run("unsuccessful_place_table", &[PlaceTable, Noop], false),
        Build::new(16)
            .item("energy", 8)
            .meter(Meter::Fatigue, -10.0)
            .sleeping()
            .run("wake_up", &[Noop, Noop], false),
        craft("unsuccessful_craft_stone_pickaxe", MakeStonePickaxe, &[("wood", 1)], false),
    ]
}

pub fn all_scenarios() -> Vec<Scenario> {
    let mut v = core_suite();
    v.extend(extended_suite());
    v
}

pub fn scenario_by_name(name: &str) -> Result<Scenario, HarnessError> {
    all_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| HarnessError::UnknownScenario(name.to_string()))
}
