//! Training data: a scripted exploration policy run in the true
//! environment. The script sweeps the map, harvests nearby resources, tries
//! every craft and place action, then approaches creatures, and repeats
//! until the step budget runs out.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::{initial_state, station_nearby, transition, Action};
use crate::error::EnvError;
use crate::inference::Transition;
use crate::lang::{eval_precondition, LawLibrary};
use crate::planner::{Halt, Runner};
use crate::rng::{substream, StreamRng};
use crate::state::{states_equal, EntityKind, Material, WorldState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExploreConfig {
    pub seed: u64,
    pub steps: usize,
    pub width: i32,
    pub height: i32,
}

impl Default for ExploreConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            steps: 400,
            width: 16,
            height: 16,
        }
    }
}

/// Budget exhaustion ends the script; any other failure skips the task.
fn attempt<F: FnOnce(&mut Runner) -> Result<(), Halt>>(r: &mut Runner, f: F) -> Result<(), Halt> {
    match f(r) {
        Err(Halt::Budget) => Err(Halt::Budget),
        _ => Ok(()),
    }
}

/// Fights zombies close enough to block paths.
fn defend(r: &mut Runner) -> Result<(), Halt> {
    let p = r.state().player_position();
    let near: Vec<u32> = r
        .state()
        .live_of_kind(EntityKind::Zombie)
        .iter()
        .filter(|z| z.position.manhattan(p) <= 2)
        .map(|z| z.entity_id)
        .collect();
    for id in near {
        attempt(r, |r| r.combat(id))?;
    }
    Ok(())
}

fn harvest(r: &mut Runner, material: Material, times: usize) -> Result<(), Halt> {
    for _ in 0..times {
        defend(r)?;
        attempt(r, |r| {
            r.pathfind(|s, p| s.material(p) == Some(material))?;
            r.act(Action::Do)
        })?;
    }
    Ok(())
}

fn sweep(r: &mut Runner, rng: &mut StreamRng, moves: usize) -> Result<(), Halt> {
    let mut a = *Action::MOVES.choose(rng).expect("nonempty");
    for _ in 0..moves {
        if rng.gen_bool(0.3) {
            a = *Action::MOVES.choose(rng).expect("nonempty");
        }
        r.act(a)?;
    }
    Ok(())
}

fn ensure_station(r: &mut Runner, mat: Material, place: Action) -> Result<(), Halt> {
    if !station_nearby(r.state(), mat) {
        attempt(r, |r| r.place_ahead(place))?;
    }
    Ok(())
}

fn creatures(s: &WorldState, kind: EntityKind) -> Vec<u32> {
    s.live_of_kind(kind).iter().map(|e| e.entity_id).collect()
}

fn script(r: &mut Runner, rng: &mut StreamRng) -> Result<(), Halt> {
    use Action::*;
    loop {
        sweep(r, rng, 12)?;
        r.act(Noop)?;
        // Actions that should fail this early.
        for a in [MakeWoodPickaxe, PlaceTable, PlaceFurnace, MakeIronSword] {
            r.act(a)?;
        }
        harvest(r, Material::Stone, 1)?;
        harvest(r, Material::Tree, 6)?;
        harvest(r, Material::Water, 2)?;
        harvest(r, Material::Grass, 8)?;
        ensure_station(r, Material::Table, PlaceTable)?;
        for a in [MakeWoodPickaxe, MakeWoodSword, MakeStonePickaxe, MakeIronPickaxe] {
            r.act(a)?;
        }
        harvest(r, Material::Stone, 5)?;
        harvest(r, Material::Tree, 4)?;
        ensure_station(r, Material::Table, PlaceTable)?;
        for a in [MakeStonePickaxe, MakeStoneSword] {
            r.act(a)?;
        }
        attempt(r, |r| r.place_ahead(PlaceStone))?;
        harvest(r, Material::Coal, 2)?;
        harvest(r, Material::Iron, 2)?;
        harvest(r, Material::Diamond, 1)?;
        harvest(r, Material::Tree, 2)?;
        ensure_station(r, Material::Table, PlaceTable)?;
        ensure_station(r, Material::Furnace, PlaceFurnace)?;
        for a in [MakeIronPickaxe, MakeIronSword, MakeWoodSword] {
            r.act(a)?;
        }
        harvest(r, Material::Diamond, 1)?;
        attempt(r, |r| r.place_ahead(PlacePlant))?;
        for kind in [EntityKind::Cow, EntityKind::Zombie, EntityKind::Skeleton] {
            for id in creatures(r.state(), kind) {
                attempt(r, |r| r.combat(id))?;
            }
        }
        for _ in 0..3 {
            r.act(Noop)?;
        }
        r.act(Sleep)?;
        for _ in 0..4 {
            r.act(Noop)?;
        }
    }
}

/// Runs the script for exactly `cfg.steps` transitions.
pub fn collect(cfg: &ExploreConfig) -> Result<Vec<Transition>, EnvError> {
    let initial = initial_state(cfg.seed, (cfg.width, cfg.height))?;
    Ok(collect_from(&initial, cfg.steps, cfg.seed))
}

pub fn collect_from(initial: &WorldState, steps: usize, seed: u64) -> Vec<Transition> {
    let mut rng = substream(seed, "explore");
    let mut step = |s: &WorldState, a: Action| transition(s, a);
    let mut runner = Runner::new(initial.clone(), steps, &mut step);
    // The script only returns once the budget is spent.
    let _ = script(&mut runner, &mut rng);
    runner.finish()
}

/// Per action: how often it was taken and how often the state changed
/// beyond step bookkeeping. Per law: how often its precondition held.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Coverage {
    pub transitions: usize,
    pub actions: BTreeMap<String, ActionCoverage>,
    pub laws: BTreeMap<String, usize>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ActionCoverage {
    pub taken: usize,
    pub changed: usize,
}

impl Coverage {
    pub fn never_active(&self) -> Vec<&str> {
        self.laws
            .iter()
            .filter(|(_, &n)| n == 0)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

fn bookkeeping_only(t: &Transition) -> bool {
    let mut s = t.state.clone();
    s.step_count = t.next.step_count;
    s.daylight = t.next.daylight;
    s.rng_state = t.next.rng_state.clone();
    s.player_mut().action = t.next.player().action.clone();
    let (p, q) = (s.player_mut(), t.next.player());
    p.hunger = q.hunger;
    p.thirst = q.thirst;
    p.fatigue = q.fatigue;
    p.recover = q.recover;
    states_equal(&s, &t.next)
}

pub fn coverage(laws: &LawLibrary, data: &[Transition]) -> Coverage {
    let mut c = Coverage {
        transitions: data.len(),
        actions: Action::ALL
            .iter()
            .map(|a| (a.name().to_string(), ActionCoverage::default()))
            .collect(),
        laws: laws.names().iter().map(|n| (n.to_string(), 0)).collect(),
    };
    for t in data {
        let entry = c.actions.get_mut(t.action.name()).expect("every action listed");
        entry.taken += 1;
        entry.changed += usize::from(!bookkeeping_only(t));
        for law in laws.laws() {
            if eval_precondition(law, &t.state, t.action) {
                *c.laws.get_mut(&law.name).expect("named law") += 1;
            }
        }
    }
    c
}
