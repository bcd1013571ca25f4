mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;
use serde_json::{json, Map, Value};

use lawmix_core::env::{
    add_object, adjacent_entities, blank_state, get_target_tile, glyph_for_entity, glyph_for_material, initial_state,
    mechanics, pickaxe_tier, remove_object, render_ascii, set_player_facing, set_player_inventory_item,
    set_player_position, set_tile_material, station_nearby, transition, within_update_range, Action,
};
use lawmix_core::error::EnvError;
use lawmix_core::state::{canonicalize, EntityKind, Item, Material, Position, WorldState};

use common::last_state;

fn none() -> Map<String, Value> {
    Map::new()
}

fn fields(v: Value) -> Map<String, Value> {
    v.as_object().unwrap().clone()
}

fn blank() -> WorldState {
    blank_state((7, 7), 0).unwrap()
}

fn facing_material(mat: &str) -> WorldState {
    let s = set_player_facing(&blank(), Position::new(1, 0)).unwrap();
    set_tile_material(&s, Position::new(4, 3), mat).unwrap()
}

#[test]
fn generation_is_deterministic() {
    for seed in [0, 1, 42, 1234] {
        let a = canonicalize(&initial_state(seed, (20, 20)).unwrap()).to_bytes();
        let b = canonicalize(&initial_state(seed, (20, 20)).unwrap()).to_bytes();
        assert_eq!(a, b);
    }
}

#[test]
fn different_seeds_give_different_worlds() {
    for seed in 0..20u64 {
        let a = canonicalize(&initial_state(seed, (16, 16)).unwrap()).to_bytes();
        let b = canonicalize(&initial_state(seed + 100, (16, 16)).unwrap()).to_bytes();
        assert_ne!(a, b, "seed {seed}");
    }
}

#[test]
fn generated_worlds_are_valid() {
    for seed in 0..10 {
        let s = initial_state(seed, (16, 12)).unwrap();
        s.validate().unwrap();
        assert_eq!(s.objects.iter().filter(|e| e.kind() == EntityKind::Player).count(), 1);
        assert_eq!(s.player_position(), Position::new(8, 6));
        assert_eq!(s.material(s.player_position()), Some(Material::Grass));
    }
}

#[test]
fn worlds_below_minimum_are_rejected() {
    assert!(matches!(initial_state(0, (6, 9)), Err(EnvError::SizeTooSmall(6, 9))));
    assert!(matches!(blank_state((7, 3), 0), Err(EnvError::SizeTooSmall(7, 3))));
    assert!(initial_state(0, (7, 7)).is_ok());
}

#[test]
fn moving_onto_grass() {
    let s = blank();
    let next = transition(&s, Action::MoveRight);
    assert_eq!(next.player_position(), Position::new(4, 3));
    assert_eq!(next.player().facing, Position::new(1, 0));
    assert_eq!(next.step_count, 1);
}

#[test]
fn moving_into_stone_only_turns() {
    let s = set_tile_material(&blank(), Position::new(3, 2), "stone").unwrap();
    let next = transition(&s, Action::MoveUp);
    assert_eq!(next.player_position(), Position::new(3, 3));
    assert_eq!(next.player().facing, Position::new(0, -1));
}

#[test]
fn stone_needs_a_pickaxe() {
    let s = facing_material("stone");
    let next = transition(&s, Action::Do);
    assert_eq!(next.material(Position::new(4, 3)), Some(Material::Stone));
    assert_eq!(next.player().inventory.get(Item::Stone), 0);

    let s = set_player_inventory_item(&s, "wood_pickaxe", 1).unwrap();
    let next = transition(&s, Action::Do);
    assert_eq!(next.material(Position::new(4, 3)), Some(Material::Path));
    assert_eq!(next.player().inventory.get(Item::Stone), 1);
}

#[test]
fn zombie_closes_in() {
    let s = add_object(&blank(), "zombie", Position::new(6, 3), &none()).unwrap();
    let next = transition(&s, Action::Noop);
    let z = next.live_of_kind(EntityKind::Zombie)[0];
    assert_eq!(z.position, Position::new(5, 3));
}

#[test]
fn adjacent_zombie_attacks_after_cooldown() {
    let s = add_object(&blank(), "zombie", Position::new(4, 3), &fields(json!({"cooldown": 0}))).unwrap();
    let next = transition(&s, Action::Noop);
    assert_eq!(next.live_of_kind(EntityKind::Zombie)[0].position, Position::new(4, 3));
    let lost = s.player().inventory.get(Item::Health) - next.player().inventory.get(Item::Health);
    assert_eq!(lost, mechanics().npc.zombie_damage);
}

#[test]
fn stone_pickaxe_recipe() {
    let mut s = set_tile_material(&blank(), Position::new(2, 2), "table").unwrap();
    s = set_player_inventory_item(&s, "wood", 3).unwrap();
    s = set_player_inventory_item(&s, "stone", 2).unwrap();
    let next = transition(&s, Action::MakeStonePickaxe);
    let inv = &next.player().inventory;
    assert_eq!(inv.get(Item::Wood), 2);
    assert_eq!(inv.get(Item::Stone), 1);
    assert_eq!(inv.get(Item::StonePickaxe), 1);
    assert_eq!(next.player().achievements.get(lawmix_core::state::Achievement::MakeStonePickaxe), 1);
}

#[test]
fn crafting_without_a_table_does_nothing() {
    let mut s = set_player_inventory_item(&blank(), "wood", 3).unwrap();
    s = set_player_inventory_item(&s, "stone", 2).unwrap();
    let next = transition(&s, Action::MakeStonePickaxe);
    assert_eq!(next.player().inventory.get(Item::Wood), 3);
    assert_eq!(next.player().inventory.get(Item::StonePickaxe), 0);
}

#[test]
fn tiles_are_set_and_checked() {
    let s = set_tile_material(&blank(), Position::new(0, 6), "water").unwrap();
    assert_eq!(s.material(Position::new(0, 6)), Some(Material::Water));
    assert!(matches!(
        set_tile_material(&s, Position::new(7, 0), "water"),
        Err(EnvError::OutOfBounds(7, 0))
    ));
    assert!(matches!(
        set_tile_material(&s, Position::new(1, 1), "lavaa"),
        Err(EnvError::UnknownMaterial(_))
    ));
}

#[test]
fn added_objects_get_fresh_ids() {
    let s = add_object(&blank(), "cow", Position::new(1, 1), &none()).unwrap();
    let s = add_object(&s, "zombie", Position::new(1, 2), &none()).unwrap();
    let ids: BTreeSet<u32> = s.objects.iter().map(|e| e.entity_id).collect();
    assert_eq!(ids.len(), 3);
    assert!(matches!(
        add_object(&s, "skeleton", Position::new(1, 1), &none()),
        Err(EnvError::Occupied(1, 1))
    ));
    assert!(matches!(
        add_object(&s, "dragon", Position::new(2, 2), &none()),
        Err(EnvError::UnknownKind(_))
    ));
    assert!(add_object(&s, "cow", Position::new(2, 2), &fields(json!({"cooldown": 1}))).is_err());
}

#[test]
fn ids_are_never_reused() {
    let mut s = blank();
    let mut seen = BTreeSet::new();
    for _ in 0..100 {
        let id = s.next_entity_id;
        s = add_object(&s, "cow", Position::new(1, 1), &none()).unwrap();
        assert!(seen.insert(id));
        s = remove_object(&s, id).unwrap();
    }
    assert_eq!(s.objects.len(), 1);
    assert!(matches!(remove_object(&s, s.player_id), Err(EnvError::RemovePlayer)));
    assert!(matches!(remove_object(&s, 5), Err(EnvError::UnknownEntity(5))));
}

#[test]
fn target_tile_and_neighbours() {
    let s = add_object(&blank(), "cow", Position::new(3, 4), &none()).unwrap();
    let (mat, ent) = get_target_tile(&s);
    assert_eq!(mat, Some(Material::Grass));
    assert_eq!(ent.map(|e| e.kind()), Some(EntityKind::Cow));
    assert_eq!(adjacent_entities(&s, EntityKind::Cow).len(), 1);
    let s = set_player_facing(&s, Position::new(0, -1)).unwrap();
    assert!(get_target_tile(&s).1.is_none());
    assert!(set_player_facing(&s, Position::new(1, 1)).is_err());
    assert!(set_player_position(&s, Position::new(3, 4)).is_err());
}

#[test]
fn update_range_is_the_view_box() {
    let s = blank_state((20, 20), 0).unwrap();
    let near = add_object(&s, "zombie", Position::new(14, 14), &none()).unwrap();
    let far = add_object(&s, "zombie", Position::new(15, 10), &none()).unwrap();
    assert!(within_update_range(&near, near.live_of_kind(EntityKind::Zombie)[0]));
    assert!(!within_update_range(&far, far.live_of_kind(EntityKind::Zombie)[0]));
    let next = transition(&far, Action::Noop);
    assert_eq!(next.live_of_kind(EntityKind::Zombie)[0].position, Position::new(15, 10));
}

#[test]
fn rendering() {
    let mut s = set_tile_material(&blank(), Position::new(0, 0), "tree").unwrap();
    s = add_object(&s, "zombie", Position::new(6, 6), &none()).unwrap();
    let text = render_ascii(&s);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.chars().count() == 7));
    assert_eq!(rows[0].chars().next(), Some('T'));
    assert_eq!(rows[3].chars().nth(3), Some('@'));
    assert_eq!(rows[6].chars().nth(6), Some('Z'));
    assert_eq!(rows[1], ".......");

    let mats: BTreeSet<char> = Material::ALL.iter().map(|m| glyph_for_material(Some(*m))).collect();
    assert_eq!(mats.len(), Material::ALL.len());
    let kinds: BTreeSet<char> = EntityKind::ALL.iter().map(|k| glyph_for_entity(*k)).collect();
    assert_eq!(kinds.len(), EntityKind::ALL.len());
    assert!(mats.is_disjoint(&kinds));
}

#[test]
fn mining_is_gated_by_tier() {
    let needs = [("stone", 1), ("coal", 1), ("iron", 2), ("diamond", 3)];
    let tools = [None, Some("wood_pickaxe"), Some("stone_pickaxe"), Some("iron_pickaxe")];
    for (mat, tier) in needs {
        for (held, tool) in tools.iter().enumerate() {
            let mut s = facing_material(mat);
            if let Some(t) = tool {
                s = set_player_inventory_item(&s, t, 1).unwrap();
            }
            assert_eq!(pickaxe_tier(&s) as usize, held);
            let item = Item::from_name(mat).unwrap();
            let got = transition(&s, Action::Do).player().inventory.get(item);
            assert_eq!(got == 1, held >= tier, "{mat} with tier {held}");
        }
    }
}

fn action() -> impl Strategy<Value = Action> {
    (0..Action::ALL.len()).prop_map(|i| Action::ALL[i])
}

fn world() -> impl Strategy<Value = WorldState> {
    (0u64..300, 7i32..13, prop::collection::vec(0usize..17, 0..30))
        .prop_map(|(seed, size, xs)| last_state(seed, size, &xs))
}

fn crafted_inventory(s: &WorldState) -> Vec<(Item, i32)> {
    s.player().inventory.iter().filter(|(i, _)| !i.is_vital()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn transition_is_pure(s in world(), a in action()) {
        let before = canonicalize(&s).to_bytes();
        let x = transition(&s, a);
        let y = transition(&s, a);
        prop_assert_eq!(canonicalize(&x).to_bytes(), canonicalize(&y).to_bytes());
        prop_assert_eq!(&x.rng_state, &y.rng_state);
        prop_assert_eq!(canonicalize(&s).to_bytes(), before);
    }

    #[test]
    fn tiles_hold_one_entity(s in world(), a in action()) {
        let next = transition(&s, a);
        let live: Vec<Position> = next.objects.iter().filter(|e| e.is_live()).map(|e| e.position).collect();
        let distinct: BTreeSet<(i32, i32)> = live.iter().map(|p| (p.x, p.y)).collect();
        prop_assert_eq!(distinct.len(), live.len());
        prop_assert!(next.violations().is_empty(), "{:?}", next.violations());
    }

    #[test]
    fn failed_crafts_conserve_items(s in world(), i in 0usize..6) {
        let recipe = &mechanics().recipes[i];
        let inv = &s.player().inventory;
        let ready = recipe.consumes.iter().all(|(item, n)| inv.get(*item) >= *n)
            && recipe.stations.iter().all(|st| station_nearby(&s, *st));
        if !ready && !s.player().sleeping {
            let next = transition(&s, recipe.action);
            prop_assert_eq!(crafted_inventory(&next), crafted_inventory(&s));
        }
    }

    #[test]
    fn zombies_never_drift_away(s in world()) {
        let p = s.player_position();
        let next = transition(&s, Action::Noop);
        prop_assert_eq!(next.player_position(), p);
        for z in s.live_of_kind(EntityKind::Zombie) {
            if let Some(after) = next.entity(z.entity_id) {
                prop_assert!((after.position.x - p.x).abs() <= (z.position.x - p.x).abs());
            }
        }
    }
}
