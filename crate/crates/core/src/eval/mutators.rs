//! Targeted corruptions of a true next state, used as ranking distractors.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::{mechanics, Action, CARDINALS};
use crate::error::HarnessError;
use crate::rng::StreamRng;
use crate::state::{states_equal, Item, Material, Position, WorldState, MAX_COUNT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mutator {
    IllegalMovement,
    EntityPosition,
    PlayerHealth,
    EntityHealth,
    CraftIllegalItem,
    CollectIllegalMaterial,
    PlaceIllegalItem,
    Inventory,
}

impl Mutator {
    pub const ALL: [Mutator; 8] = [
        Mutator::IllegalMovement,
        Mutator::EntityPosition,
        Mutator::PlayerHealth,
        Mutator::EntityHealth,
        Mutator::CraftIllegalItem,
        Mutator::CollectIllegalMaterial,
        Mutator::PlaceIllegalItem,
        Mutator::Inventory,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mutator::IllegalMovement => "illegal_movement",
            Mutator::EntityPosition => "entity_position",
            Mutator::PlayerHealth => "player_health",
            Mutator::EntityHealth => "entity_health",
            Mutator::CraftIllegalItem => "craft_illegal_item",
            Mutator::CollectIllegalMaterial => "collect_illegal_material",
            Mutator::PlaceIllegalItem => "place_illegal_item",
            Mutator::Inventory => "inventory",
        }
    }

    pub fn from_name(name: &str) -> Result<Mutator, HarnessError> {
        Mutator::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| HarnessError::UnknownMutator(name.to_string()))
    }

    /// A corrupted copy of `truth`, or `None` when the mutator has nothing
    /// to change for this step. Results always differ from `truth`.
    pub fn apply(self, s: &WorldState, a: Action, truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
        let out = match self {
            Mutator::IllegalMovement => illegal_movement(a, truth, rng),
            Mutator::EntityPosition => entity_position(truth, rng),
            Mutator::PlayerHealth => player_health(truth, rng),
            Mutator::EntityHealth => entity_health(truth, rng),
            Mutator::CraftIllegalItem => craft_illegal_item(a, truth, rng),
            Mutator::CollectIllegalMaterial => collect_illegal_material(s, a, truth, rng),
            Mutator::PlaceIllegalItem => place_illegal_item(truth, rng),
            Mutator::Inventory => inventory(truth, rng),
        }?;
        (!states_equal(&out, truth)).then_some(out)
    }
}

impl fmt::Display for Mutator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn free(s: &WorldState, p: Position) -> bool {
    s.in_bounds(p) && !s.is_occupied(p)
}

fn illegal_movement(a: Action, truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    if a.is_move() {
        return None;
    }
    let p = truth.player_position();
    let options: Vec<Position> = CARDINALS.iter().map(|&d| p.offset(d)).filter(|&t| free(truth, t)).collect();
    let &t = options.choose(rng)?;
    let mut out = truth.clone();
    out.player_entity_mut().position = t;
    Some(out)
}

fn entity_position(truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    let ids: Vec<u32> = truth
        .objects
        .iter()
        .filter(|e| e.is_live() && e.entity_id != truth.player_id)
        .map(|e| e.entity_id)
        .collect();
    let &id = ids.choose(rng)?;
    let from = truth.entity(id)?.position;
    let mut targets = Vec::new();
    for x in 0..truth.width() {
        for y in 0..truth.height() {
            let t = Position::new(x, y);
            if t.manhattan(from) >= 3 && free(truth, t) {
                targets.push(t);
            }
        }
    }
    let &t = targets.choose(rng)?;
    let mut out = truth.clone();
    out.entity_mut(id)?.position = t;
    Some(out)
}

fn player_health(truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    let h = truth.player().inventory.get(Item::Health);
    let options: Vec<i32> = [-2, -1, 1, 2]
        .iter()
        .map(|d| h + d)
        .filter(|v| (0..=MAX_COUNT).contains(v))
        .collect();
    let &v = options.choose(rng)?;
    let mut out = truth.clone();
    out.player_mut().inventory.set(Item::Health, v);
    Some(out)
}

fn entity_health(truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    let ids: Vec<u32> = truth
        .objects
        .iter()
        .filter(|e| e.is_live() && e.entity_id != truth.player_id)
        .map(|e| e.entity_id)
        .collect();
    let &id = ids.choose(rng)?;
    let h = truth.entity(id)?.health();
    let options: Vec<i32> = (0..=9).filter(|v| (v - h).abs() > 1).collect();
    let &v = options.choose(rng)?;
    let mut out = truth.clone();
    out.entity_mut(id)?.set_health(v);
    Some(out)
}

const TOOLS: [Item; 6] = [
    Item::WoodPickaxe,
    Item::StonePickaxe,
    Item::IronPickaxe,
    Item::WoodSword,
    Item::StoneSword,
    Item::IronSword,
];

fn bump(truth: &WorldState, candidates: &[Item], rng: &mut StreamRng) -> Option<WorldState> {
    let inv = &truth.player().inventory;
    let options: Vec<Item> = candidates.iter().copied().filter(|&i| inv.get(i) < MAX_COUNT).collect();
    let &item = options.choose(rng)?;
    let mut out = truth.clone();
    out.player_mut().inventory.add(item, 1);
    Some(out)
}

fn craft_illegal_item(a: Action, truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    let made = mechanics().recipes.iter().find(|r| r.action == a).map(|r| r.produces);
    let others: Vec<Item> = TOOLS.into_iter().filter(|&t| Some(t) != made).collect();
    bump(truth, &others, rng)
}

const RESOURCES: [Item; 7] = [
    Item::Wood,
    Item::Stone,
    Item::Coal,
    Item::Iron,
    Item::Diamond,
    Item::Sapling,
    Item::Drink,
];

fn collect_illegal_material(s: &WorldState, a: Action, truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    let collected = if a == Action::Do {
        let target = s.player_position().offset(s.player().facing);
        s.material(target)
            .and_then(|m| mechanics().collect.iter().find(|r| r.material == m))
            .map(|r| r.yields)
    } else {
        None
    };
    let others: Vec<Item> = RESOURCES.into_iter().filter(|&r| Some(r) != collected).collect();
    bump(truth, &others, rng)
}

const PLACEABLE: [Material; 6] = [
    Material::Table,
    Material::Furnace,
    Material::Stone,
    Material::Tree,
    Material::Water,
    Material::Grass,
];

fn place_illegal_item(truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    let target = truth.player_position().offset(truth.player().facing);
    if !truth.in_bounds(target) {
        return None;
    }
    let current = truth.material(target);
    let options: Vec<Material> = PLACEABLE.into_iter().filter(|&m| Some(m) != current).collect();
    let &m = options.choose(rng)?;
    let mut out = truth.clone();
    out.set_material(target, Some(m));
    Some(out)
}

fn inventory(truth: &WorldState, rng: &mut StreamRng) -> Option<WorldState> {
    let items: Vec<Item> = Item::ALL.iter().copied().filter(|i| !i.is_vital()).collect();
    for _ in 0..32 {
        let mut out = truth.clone();
        let n = rng.gen_range(1..=3);
        for &item in items.choose_multiple(rng, n) {
            out.player_mut().inventory.set(item, rng.gen_range(0..=MAX_COUNT));
        }
        if out.player().inventory != truth.player().inventory {
            return Some(out);
        }
    }
    None
}

/// Up to `k` distinct distractors, drawn by cycling through the mutators
/// in a shuffled order.
pub fn generate_distractors(
    s: &WorldState,
    a: Action,
    truth: &WorldState,
    k: usize,
    rng: &mut StreamRng,
) -> Vec<WorldState> {
    let mut out: Vec<WorldState> = Vec::with_capacity(k);
    let mut seen = vec![crate::state::canonicalize(truth).to_bytes()];
    let mut order = Mutator::ALL;
    for _round in 0..16 {
        order.shuffle(rng);
        for m in order {
            if out.len() == k {
                return out;
            }
            if let Some(d) = m.apply(s, a, truth, rng) {
                let bytes = crate::state::canonicalize(&d).to_bytes();
                if !seen.contains(&bytes) {
                    seen.push(bytes);
                    out.push(d);
                }
            }
        }
    }
    out
}
