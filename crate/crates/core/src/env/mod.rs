//! MiniCraft: a survival gridworld whose dynamics are a pure function over
//! [`WorldState`]. All randomness is drawn from, and written back to, the
//! state's serialized generator.

mod mechanics;
mod render;
mod setup;
mod worldgen;

pub use mechanics::{
    mechanics, CollectRule, CombatRule, MechanicsTable, MeterRules, NpcRules, Placement, PlaceRule,
    Recipe,
};
pub use render::{glyph_for_entity, glyph_for_material, render_ascii};
pub use setup::{
    add_object, adjacent_entities, blank_state, get_target_tile, remove_object, set_daylight,
    set_player_facing, set_player_inventory_item, set_player_meter, set_player_position,
    set_tile_material, within_update_range,
};
pub use worldgen::initial_state;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng::{self, StreamRng};
use crate::state::{
    name_enum, quantize, Achievement, EntityData, EntityKind, Item, Material, Position, WorldState,
    MAX_COUNT,
};

name_enum! {
    /// Player action; string names are the wire format.
    Action {
        Noop => "noop",
        MoveUp => "move_up",
        MoveDown => "move_down",
        MoveLeft => "move_left",
        MoveRight => "move_right",
        Do => "do",
        Sleep => "sleep",
        PlaceTable => "place_table",
        PlaceStone => "place_stone",
        PlaceFurnace => "place_furnace",
        PlacePlant => "place_plant",
        MakeWoodPickaxe => "make_wood_pickaxe",
        MakeStonePickaxe => "make_stone_pickaxe",
        MakeIronPickaxe => "make_iron_pickaxe",
        MakeWoodSword => "make_wood_sword",
        MakeStoneSword => "make_stone_sword",
        MakeIronSword => "make_iron_sword",
    }
}

impl Action {
    /// Unit step of a movement action.
    pub fn direction(self) -> Option<Position> {
        match self {
            Action::MoveUp => Some(Position::new(0, -1)),
            Action::MoveDown => Some(Position::new(0, 1)),
            Action::MoveLeft => Some(Position::new(-1, 0)),
            Action::MoveRight => Some(Position::new(1, 0)),
            _ => None,
        }
    }

    pub fn is_move(self) -> bool {
        self.direction().is_some()
    }

    pub fn toward(d: Position) -> Option<Action> {
        match (d.x.signum(), d.y.signum()) {
            (0, -1) => Some(Action::MoveUp),
            (0, 1) => Some(Action::MoveDown),
            (-1, 0) => Some(Action::MoveLeft),
            (1, 0) => Some(Action::MoveRight),
            _ => None,
        }
    }

    pub const MOVES: [Action; 4] = [
        Action::MoveUp,
        Action::MoveDown,
        Action::MoveLeft,
        Action::MoveRight,
    ];
}

pub const CARDINALS: [Position; 4] = [
    Position::new(-1, 0),
    Position::new(1, 0),
    Position::new(0, -1),
    Position::new(0, 1),
];

/// One environment step under the standard mechanics.
pub fn transition(state: &WorldState, action: Action) -> WorldState {
    transition_with(mechanics(), state, action)
}

pub fn transition_with(m: &MechanicsTable, state: &WorldState, action: Action) -> WorldState {
    let mut s = state.clone();
    let mut rng = rng::decode(&s.rng_state);
    s.player_mut().action = action.name().to_string();
    if s.player_entity().health() > 0 {
        let effective = if s.player().sleeping {
            Action::Noop
        } else {
            action
        };
        player_action(m, &mut s, effective, &mut rng);
        update_npcs(m, &mut s, &mut rng);
        update_meters(m, &mut s);
        s.daylight = next_daylight(m, s.daylight);
    }
    s.step_count += 1;
    s.rng_state = rng::encode(&rng);
    s
}

pub(crate) fn next_daylight(m: &MechanicsTable, d: f64) -> f64 {
    let next = d - m.daylight_decay;
    if next < 0.0 {
        1.0
    } else {
        quantize(next)
    }
}

/// Best sword damage, 1 with bare hands.
pub fn player_damage(m: &MechanicsTable, s: &WorldState) -> i32 {
    let inv = &s.player().inventory;
    m.combat
        .weapons
        .iter()
        .filter(|(item, _)| inv.get(*item) > 0)
        .map(|(_, d)| *d)
        .fold(m.combat.base_damage, i32::max)
}

/// Highest pickaxe tier held: 0 none, 1 wood, 2 stone, 3 iron.
pub fn pickaxe_tier(s: &WorldState) -> u8 {
    let inv = &s.player().inventory;
    if inv.get(Item::IronPickaxe) > 0 {
        3
    } else if inv.get(Item::StonePickaxe) > 0 {
        2
    } else if inv.get(Item::WoodPickaxe) > 0 {
        1
    } else {
        0
    }
}

/// Whether `mat` lies within Chebyshev distance 1 of the player.
pub fn station_nearby(s: &WorldState, mat: Material) -> bool {
    let p = s.player_position();
    (-1..=1).any(|dx| (-1..=1).any(|dy| s.material(p.offset(Position::new(dx, dy))) == Some(mat)))
}

fn free_for(s: &WorldState, p: Position, walkable: &[Material]) -> bool {
    s.in_bounds(p)
        && s.material(p).is_some_and(|m| walkable.contains(&m))
        && !s.is_occupied(p)
}

fn player_action(m: &MechanicsTable, s: &mut WorldState, a: Action, rng: &mut StreamRng) {
    if let Some(dir) = a.direction() {
        s.player_mut().facing = dir;
        let target = s.player_position().offset(dir);
        if free_for(s, target, &m.walkable) {
            s.player_entity_mut().position = target;
        }
        return;
    }
    match a {
        Action::Noop => {}
        Action::Do => interact(m, s, rng),
        Action::Sleep => {
            if s.player().inventory.get(Item::Energy) < MAX_COUNT {
                s.player_mut().sleeping = true;
            }
        }
        _ => {
            if let Some(rule) = m.place.iter().find(|r| r.action == a) {
                place(s, rule);
            } else if let Some(recipe) = m.recipes.iter().find(|r| r.action == a) {
                craft(s, recipe);
            }
        }
    }
}

fn interact(m: &MechanicsTable, s: &mut WorldState, rng: &mut StreamRng) {
    let target = s.player_position().offset(s.player().facing);
    if let Some(id) = s.entity_at(target).map(|e| e.entity_id) {
        let damage = player_damage(m, s);
        let mut reward: Option<(Achievement, Option<(Item, i32)>)> = None;
        let e = s.entity_mut(id).expect("id taken from a live entity");
        match &mut e.data {
            EntityData::Zombie { health, .. } => {
                *health -= damage;
                if *health <= 0 {
                    e.removed = true;
                    reward = Some((Achievement::DefeatZombie, None));
                }
            }
            EntityData::Skeleton { health, .. } => {
                *health -= damage;
                if *health <= 0 {
                    e.removed = true;
                    reward = Some((Achievement::DefeatSkeleton, None));
                }
            }
            EntityData::Cow { health } => {
                *health -= damage;
                if *health <= 0 {
                    e.removed = true;
                    reward = Some((Achievement::EatCow, Some((Item::Food, m.npc.cow_food))));
                }
            }
            EntityData::Plant { grown, ripe, .. } => {
                if *ripe {
                    *grown = 0;
                    *ripe = false;
                    reward = Some((Achievement::EatPlant, Some((Item::Food, m.npc.plant_food))));
                }
            }
            EntityData::Player(_) | EntityData::Arrow { .. } | EntityData::Fence { .. } => {}
        }
        if let Some((ach, gain)) = reward {
            let p = s.player_mut();
            p.achievements.unlock(ach);
            if let Some((item, n)) = gain {
                p.inventory.add(item, n);
            }
        }
        return;
    }
    let Some(mat) = s.material(target) else {
        return;
    };
    let Some(rule) = m.collect.iter().find(|r| r.material == mat) else {
        return;
    };
    if pickaxe_tier(s) < rule.required_tier {
        return;
    }
    if rule.probability < 1.0 && !rng.gen_bool(rule.probability) {
        return;
    }
    let p = s.player_mut();
    p.inventory.add(rule.yields, 1);
    p.achievements.unlock(rule.achievement);
    if let Some(left) = rule.leaves {
        s.set_material(target, Some(left));
    }
}

fn place(s: &mut WorldState, rule: &PlaceRule) {
    let target = s.player_position().offset(s.player().facing);
    let inv = &s.player().inventory;
    if rule.consumes.iter().any(|(item, n)| inv.get(*item) < *n) {
        return;
    }
    if !rule.stations.iter().all(|st| station_nearby(s, *st)) {
        return;
    }
    if !s.material(target).is_some_and(|m| rule.targets.contains(&m)) || s.is_occupied(target) {
        return;
    }
    for (item, n) in &rule.consumes {
        s.player_mut().inventory.add(*item, -n);
    }
    s.player_mut().achievements.unlock(rule.achievement);
    match rule.places {
        Placement::Material(mat) => s.set_material(target, Some(mat)),
        Placement::Plant => {
            let id = s.allocate_id();
            s.objects.push(crate::state::Entity {
                entity_id: id,
                position: target,
                removed: false,
                data: EntityData::Plant {
                    health: 1,
                    grown: 0,
                    ripe: false,
                },
            });
        }
    }
}

fn craft(s: &mut WorldState, recipe: &Recipe) {
    let inv = &s.player().inventory;
    if recipe.consumes.iter().any(|(item, n)| inv.get(*item) < *n) {
        return;
    }
    if !recipe.stations.iter().all(|st| station_nearby(s, *st)) {
        return;
    }
    let p = s.player_mut();
    for (item, n) in &recipe.consumes {
        p.inventory.add(*item, -n);
    }
    p.inventory.add(recipe.produces, 1);
    p.achievements.unlock(recipe.achievement);
}

/// Whether `pos` lies in the view-sized box centered on the player.
pub fn in_update_range(s: &WorldState, pos: Position) -> bool {
    let p = s.player_position();
    (pos.x - p.x).abs() <= s.view.0 / 2 && (pos.y - p.y).abs() <= s.view.1 / 2
}

fn update_npcs(m: &MechanicsTable, s: &mut WorldState, rng: &mut StreamRng) {
    let mut ids: Vec<u32> = s
        .objects
        .iter()
        .filter(|e| e.is_live() && e.entity_id != s.player_id)
        .map(|e| e.entity_id)
        .collect();
    ids.sort_unstable();
    for id in ids {
        let e = s.entity(id).expect("id collected above");
        if e.removed || !in_update_range(s, e.position) {
            continue;
        }
        match e.kind() {
            EntityKind::Zombie => update_zombie(m, s, id),
            EntityKind::Skeleton => update_skeleton(m, s, id, rng),
            EntityKind::Cow => update_cow(m, s, id, rng),
            EntityKind::Plant => {
                if let EntityData::Plant { grown, ripe, .. } = &mut s.entity_mut(id).unwrap().data {
                    *grown += 1;
                    *ripe = *grown >= m.npc.plant_ripe_at;
                }
            }
            EntityKind::Player | EntityKind::Arrow | EntityKind::Fence => {}
        }
    }
}

fn update_zombie(m: &MechanicsTable, s: &mut WorldState, id: u32) {
    let player = s.player_position();
    let sleeping = s.player().sleeping;
    let zpos = s.entity(id).unwrap().position;
    if zpos.manhattan(player) == 1 {
        let mut hit = false;
        if let EntityData::Zombie { cooldown, .. } = &mut s.entity_mut(id).unwrap().data {
            if *cooldown > 0 {
                *cooldown -= 1;
            } else {
                *cooldown = m.npc.zombie_cooldown;
                hit = true;
            }
        }
        if hit {
            let dmg = if sleeping {
                m.npc.zombie_sleep_damage
            } else {
                m.npc.zombie_damage
            };
            s.player_mut().inventory.add(Item::Health, -dmg);
        }
        return;
    }
    let dx = (player.x - zpos.x).signum();
    let dy = (player.y - zpos.y).signum();
    let mut steps = Vec::with_capacity(2);
    if dx != 0 {
        steps.push(Position::new(dx, 0));
    }
    if dy != 0 {
        steps.push(Position::new(0, dy));
    }
    for d in steps {
        let t = zpos.offset(d);
        if free_for(s, t, &m.walkable) {
            s.entity_mut(id).unwrap().position = t;
            return;
        }
    }
}

fn update_skeleton(m: &MechanicsTable, s: &mut WorldState, id: u32, rng: &mut StreamRng) {
    if !rng.gen_bool(m.npc.skeleton_move_probability) {
        return;
    }
    let pos = s.entity(id).unwrap().position;
    let options: Vec<Position> = CARDINALS
        .iter()
        .map(|&d| pos.offset(d))
        .filter(|&t| free_for(s, t, &m.skeleton_walkable))
        .collect();
    if let Some(&t) = options.choose(rng) {
        s.entity_mut(id).unwrap().position = t;
    }
}

fn update_cow(m: &MechanicsTable, s: &mut WorldState, id: u32, rng: &mut StreamRng) {
    if !rng.gen_bool(m.npc.cow_move_probability) {
        return;
    }
    let d = CARDINALS[rng.gen_range(0..CARDINALS.len())];
    let t = s.entity(id).unwrap().position.offset(d);
    if free_for(s, t, &m.walkable) {
        s.entity_mut(id).unwrap().position = t;
    }
}

fn update_meters(m: &MechanicsTable, s: &mut WorldState) {
    let r = &m.meters;
    let p = s.player_mut();
    let sleeping = p.sleeping;
    let rate = if sleeping { r.sleep_rate } else { 1.0 };
    let ok = p.inventory.get(Item::Food) > 0
        && p.inventory.get(Item::Drink) > 0
        && (p.inventory.get(Item::Energy) > 0 || sleeping);

    p.hunger = quantize(p.hunger + rate);
    if p.hunger > r.hunger_threshold {
        p.hunger = 0.0;
        p.inventory.add(Item::Food, -1);
    }
    p.thirst = quantize(p.thirst + rate);
    if p.thirst > r.thirst_threshold {
        p.thirst = 0.0;
        p.inventory.add(Item::Drink, -1);
    }
    p.fatigue = if sleeping {
        (p.fatigue - 1.0).min(0.0)
    } else {
        p.fatigue + 1.0
    };
    p.fatigue = quantize(p.fatigue);
    if p.fatigue < r.fatigue_rest_threshold {
        p.fatigue = 0.0;
        p.inventory.add(Item::Energy, 1);
    }
    if p.fatigue > r.fatigue_tired_threshold {
        p.fatigue = 0.0;
        p.inventory.add(Item::Energy, -1);
    }
    let delta = match (ok, sleeping) {
        (true, false) => r.recover_gain,
        (true, true) => r.recover_gain_sleeping,
        (false, false) => -r.recover_loss,
        (false, true) => -r.recover_loss_sleeping,
    };
    p.recover = quantize(p.recover + delta);
    if p.recover > r.regen_threshold && !sleeping {
        p.recover = 0.0;
        p.inventory.add(Item::Health, 1);
    } else if p.recover < r.degen_threshold {
        p.recover = 0.0;
        p.inventory.add(Item::Health, -1);
    }
    if sleeping && p.inventory.get(Item::Energy) >= MAX_COUNT {
        p.sleeping = false;
        p.achievements.unlock(Achievement::WakeUp);
    }
}
