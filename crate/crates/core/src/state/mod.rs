//! Hierarchical world-state data model.
//!
//! A [`WorldState`] is the sole carrier of environment truth: the terrain
//! grid, every dynamic entity (player included), global fields and an opaque
//! serialized generator state. Everything else in the crate is a pure function
//! over these values.

mod canonical;
mod patch;
mod prim;

pub use canonical::{canonicalize, from_canonical, states_equal, CanonicalDocument};
pub use patch::{
    apply_patch, count_elements, diff_ops, flatten, pointer, unflatten, PatchKind, PatchOp, Segment,
};
pub use prim::Prim;

use serde::{Deserialize, Serialize};

use crate::error::StateError;

/// Integer tile coordinate. `y` grows downwards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    pub x: i32,
    pub y: i32,
}

impl Position {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, d: Position) -> Position {
        Position::new(self.x + d.x, self.y + d.y)
    }

    pub fn manhattan(self, other: Position) -> i32 {
        (self.x - other.x).abs() + (self.y - other.y).abs()
    }

    pub fn chebyshev(self, other: Position) -> i32 {
        (self.x - other.x).abs().max((self.y - other.y).abs())
    }
}

impl From<(i32, i32)> for Position {
    fn from((x, y): (i32, i32)) -> Self {
        Position::new(x, y)
    }
}

macro_rules! name_enum {
    ($(#[$meta:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }

            pub fn from_name(text: &str) -> Option<Self> {
                match text {
                    $($text => Some($name::$variant),)+
                    _ => None,
                }
            }

            pub fn index(self) -> usize {
                self as usize
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(self.name())
            }
        }

        impl ::serde::Serialize for $name {
            fn serialize<S: ::serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_str(self.name())
            }
        }

        impl<'de> ::serde::Deserialize<'de> for $name {
            fn deserialize<D: ::serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let text = <String as ::serde::Deserialize>::deserialize(d)?;
                $name::from_name(&text).ok_or_else(|| {
                    ::serde::de::Error::custom(format!(concat!("unknown ", stringify!($name), " `{}`"), text))
                })
            }
        }
    };
}
pub(crate) use name_enum;

name_enum! {
    /// Terrain material of one grid cell.
    Material {
        Grass => "grass",
        Tree => "tree",
        Water => "water",
        Stone => "stone",
        Coal => "coal",
        Iron => "iron",
        Diamond => "diamond",
        Sand => "sand",
        Path => "path",
        Table => "table",
        Furnace => "furnace",
        Lava => "lava",
    }
}

name_enum! {
    /// Inventory item kinds, in canonical order.
    Item {
        Health => "health",
        Food => "food",
        Drink => "drink",
        Energy => "energy",
        Sapling => "sapling",
        Wood => "wood",
        Stone => "stone",
        Coal => "coal",
        Iron => "iron",
        Diamond => "diamond",
        WoodPickaxe => "wood_pickaxe",
        StonePickaxe => "stone_pickaxe",
        IronPickaxe => "iron_pickaxe",
        WoodSword => "wood_sword",
        StoneSword => "stone_sword",
        IronSword => "iron_sword",
    }
}

name_enum! {
    Achievement {
        CollectCoal => "collect_coal",
        CollectDiamond => "collect_diamond",
        CollectDrink => "collect_drink",
        CollectIron => "collect_iron",
        CollectSapling => "collect_sapling",
        CollectStone => "collect_stone",
        CollectWood => "collect_wood",
        DefeatSkeleton => "defeat_skeleton",
        DefeatZombie => "defeat_zombie",
        EatCow => "eat_cow",
        EatPlant => "eat_plant",
        MakeIronPickaxe => "make_iron_pickaxe",
        MakeIronSword => "make_iron_sword",
        MakeStonePickaxe => "make_stone_pickaxe",
        MakeStoneSword => "make_stone_sword",
        MakeWoodPickaxe => "make_wood_pickaxe",
        MakeWoodSword => "make_wood_sword",
        PlaceFurnace => "place_furnace",
        PlacePlant => "place_plant",
        PlaceStone => "place_stone",
        PlaceTable => "place_table",
        WakeUp => "wake_up",
    }
}

name_enum! {
    /// Discriminates the entity record variants.
    EntityKind {
        Player => "player",
        Cow => "cow",
        Zombie => "zombie",
        Skeleton => "skeleton",
        Arrow => "arrow",
        Plant => "plant",
        Fence => "fence",
    }
}

impl Item {
    /// Capped player stats: health, food, drink, energy.
    pub fn is_vital(self) -> bool {
        matches!(self, Item::Health | Item::Food | Item::Drink | Item::Energy)
    }
}

/// Upper bound for every inventory count.
pub const MAX_COUNT: i32 = 9;

/// One non-negative count per [`Item`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Inventory {
    counts: [i32; 16],
}

impl Inventory {
    pub fn empty() -> Self {
        Self { counts: [0; 16] }
    }

    /// Fresh-spawn inventory: full vitals, no items.
    pub fn starting() -> Self {
        let mut inv = Self::empty();
        for item in [Item::Health, Item::Food, Item::Drink, Item::Energy] {
            inv.set(item, MAX_COUNT);
        }
        inv
    }

    pub fn get(&self, item: Item) -> i32 {
        self.counts[item.index()]
    }

    pub fn set(&mut self, item: Item, count: i32) {
        self.counts[item.index()] = count;
    }

    pub fn add(&mut self, item: Item, delta: i32) {
        let v = (self.get(item) + delta).clamp(0, MAX_COUNT);
        self.set(item, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (Item, i32)> + '_ {
        Item::ALL.iter().map(move |&i| (i, self.get(i)))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Achievements {
    counts: [i32; 22],
}

impl Achievements {
    pub fn get(&self, a: Achievement) -> i32 {
        self.counts[a.index()]
    }

    pub fn set(&mut self, a: Achievement, count: i32) {
        self.counts[a.index()] = count;
    }

    pub fn unlock(&mut self, a: Achievement) {
        self.counts[a.index()] += 1;
    }

    pub fn iter(&self) -> impl Iterator<Item = (Achievement, i32)> + '_ {
        Achievement::ALL.iter().map(move |&a| (a, self.get(a)))
    }
}

/// Real-valued player meters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Meter {
    Thirst,
    Hunger,
    Fatigue,
    Recover,
}

impl Meter {
    pub const ALL: [Meter; 4] = [Meter::Thirst, Meter::Hunger, Meter::Fatigue, Meter::Recover];

    pub fn name(self) -> &'static str {
        match self {
            Meter::Thirst => "thirst",
            Meter::Hunger => "hunger",
            Meter::Fatigue => "fatigue",
            Meter::Recover => "recover",
        }
    }

    pub fn from_name(text: &str) -> Option<Meter> {
        Meter::ALL.into_iter().find(|m| m.name() == text)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlayerData {
    pub facing: Position,
    pub sleeping: bool,
    pub inventory: Inventory,
    pub achievements: Achievements,
    pub thirst: f64,
    pub hunger: f64,
    pub fatigue: f64,
    pub recover: f64,
    /// Name of the last action taken.
    pub action: String,
}

impl PlayerData {
    pub fn new() -> Self {
        Self {
            facing: Position::new(0, 1),
            sleeping: false,
            inventory: Inventory::starting(),
            achievements: Achievements::default(),
            thirst: 0.0,
            hunger: 0.0,
            fatigue: 0.0,
            recover: 0.0,
            action: "noop".to_string(),
        }
    }

    pub fn meter(&self, m: Meter) -> f64 {
        match m {
            Meter::Thirst => self.thirst,
            Meter::Hunger => self.hunger,
            Meter::Fatigue => self.fatigue,
            Meter::Recover => self.recover,
        }
    }

    pub fn meter_mut(&mut self, m: Meter) -> &mut f64 {
        match m {
            Meter::Thirst => &mut self.thirst,
            Meter::Hunger => &mut self.hunger,
            Meter::Fatigue => &mut self.fatigue,
            Meter::Recover => &mut self.recover,
        }
    }
}

impl Default for PlayerData {
    fn default() -> Self {
        Self::new()
    }
}

/// Variant payload of an entity. The player's health is its inventory
/// `health` count; every other kind carries its own.
#[derive(Clone, Debug, PartialEq)]
pub enum EntityData {
    Player(Box<PlayerData>),
    Cow { health: i32 },
    Zombie { health: i32, cooldown: i32 },
    Skeleton { health: i32, reload: i32 },
    Arrow { health: i32, facing: Position },
    Plant { health: i32, grown: i32, ripe: bool },
    Fence { health: i32 },
}

impl EntityData {
    pub fn kind(&self) -> EntityKind {
        match self {
            EntityData::Player(_) => EntityKind::Player,
            EntityData::Cow { .. } => EntityKind::Cow,
            EntityData::Zombie { .. } => EntityKind::Zombie,
            EntityData::Skeleton { .. } => EntityKind::Skeleton,
            EntityData::Arrow { .. } => EntityKind::Arrow,
            EntityData::Plant { .. } => EntityKind::Plant,
            EntityData::Fence { .. } => EntityKind::Fence,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub entity_id: u32,
    pub position: Position,
    pub removed: bool,
    pub data: EntityData,
}

impl Entity {
    pub fn kind(&self) -> EntityKind {
        self.data.kind()
    }

    pub fn is_live(&self) -> bool {
        !self.removed
    }

    pub fn health(&self) -> i32 {
        match &self.data {
            EntityData::Player(p) => p.inventory.get(Item::Health),
            EntityData::Cow { health }
            | EntityData::Zombie { health, .. }
            | EntityData::Skeleton { health, .. }
            | EntityData::Arrow { health, .. }
            | EntityData::Plant { health, .. }
            | EntityData::Fence { health } => *health,
        }
    }

    pub fn set_health(&mut self, value: i32) {
        match &mut self.data {
            EntityData::Player(p) => p.inventory.set(Item::Health, value),
            EntityData::Cow { health }
            | EntityData::Zombie { health, .. }
            | EntityData::Skeleton { health, .. }
            | EntityData::Arrow { health, .. }
            | EntityData::Plant { health, .. }
            | EntityData::Fence { health } => *health = value,
        }
    }

    pub fn player(&self) -> Option<&PlayerData> {
        match &self.data {
            EntityData::Player(p) => Some(p),
            _ => None,
        }
    }
}

/// Complete world state at one timestep.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub size: (i32, i32),
    /// Update-range box (width, height) centered on the player.
    pub view: (i32, i32),
    pub daylight: f64,
    pub step_count: u64,
    /// Column-major grid: cell (x, y) lives at `x * height + y`.
    pub materials: Vec<Option<Material>>,
    pub objects: Vec<Entity>,
    pub player_id: u32,
    pub next_entity_id: u32,
    pub rng_state: String,
    pub event_log: Vec<String>,
}

impl WorldState {
    pub fn width(&self) -> i32 {
        self.size.0
    }

    pub fn height(&self) -> i32 {
        self.size.1
    }

    pub fn in_bounds(&self, p: Position) -> bool {
        p.x >= 0 && p.y >= 0 && p.x < self.size.0 && p.y < self.size.1
    }

    fn cell(&self, p: Position) -> usize {
        (p.x * self.size.1 + p.y) as usize
    }

    /// Material at `p`, `None` off-grid or for an absent cell.
    pub fn material(&self, p: Position) -> Option<Material> {
        if self.in_bounds(p) {
            self.materials[self.cell(p)]
        } else {
            None
        }
    }

    pub fn set_material(&mut self, p: Position, m: Option<Material>) {
        if self.in_bounds(p) {
            let i = self.cell(p);
            self.materials[i] = m;
        }
    }

    pub fn entity(&self, id: u32) -> Option<&Entity> {
        self.objects.iter().find(|e| e.entity_id == id)
    }

    pub fn entity_mut(&mut self, id: u32) -> Option<&mut Entity> {
        self.objects.iter_mut().find(|e| e.entity_id == id)
    }

    pub fn player_entity(&self) -> &Entity {
        self.entity(self.player_id)
            .expect("world state invariant: player id resolves")
    }

    pub fn player_entity_mut(&mut self) -> &mut Entity {
        let id = self.player_id;
        self.entity_mut(id)
            .expect("world state invariant: player id resolves")
    }

    pub fn player(&self) -> &PlayerData {
        match &self.player_entity().data {
            EntityData::Player(p) => p,
            _ => unreachable!("player id names a non-player entity"),
        }
    }

    pub fn player_mut(&mut self) -> &mut PlayerData {
        match &mut self.player_entity_mut().data {
            EntityData::Player(p) => p,
            _ => unreachable!("player id names a non-player entity"),
        }
    }

    pub fn player_position(&self) -> Position {
        self.player_entity().position
    }

    /// Live entity occupying `p`, if any.
    pub fn entity_at(&self, p: Position) -> Option<&Entity> {
        self.objects.iter().find(|e| e.is_live() && e.position == p)
    }

    pub fn is_occupied(&self, p: Position) -> bool {
        self.entity_at(p).is_some()
    }

    /// Live non-player entities of `kind`, ascending entity_id.
    pub fn live_of_kind(&self, kind: EntityKind) -> Vec<&Entity> {
        let mut out: Vec<&Entity> = self
            .objects
            .iter()
            .filter(|e| e.is_live() && e.kind() == kind)
            .collect();
        out.sort_by_key(|e| e.entity_id);
        out
    }

    /// Checks every structural invariant, returning one message per violation.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.materials.len() != (self.size.0 * self.size.1).max(0) as usize {
            out.push("materials grid does not match size".to_string());
        }
        let mut ids = std::collections::BTreeSet::new();
        let mut players = 0;
        let mut tiles = std::collections::BTreeMap::new();
        for e in &self.objects {
            if !ids.insert(e.entity_id) {
                out.push(format!("duplicate entity_id {}", e.entity_id));
            }
            if e.kind() == EntityKind::Player {
                players += 1;
            }
            if e.is_live() {
                if !self.in_bounds(e.position) {
                    out.push(format!(
                        "entity {} out of bounds at ({}, {})",
                        e.entity_id, e.position.x, e.position.y
                    ));
                }
                if let Some(other) = tiles.insert(e.position, e.entity_id) {
                    out.push(format!(
                        "entities {} and {} share tile ({}, {})",
                        other, e.entity_id, e.position.x, e.position.y
                    ));
                }
            }
        }
        if players != 1 {
            out.push(format!("expected exactly one player, found {players}"));
        }
        match self.entity(self.player_id) {
            Some(e) if e.kind() == EntityKind::Player => {
                for (item, count) in e.player().unwrap().inventory.iter() {
                    if count < 0 {
                        out.push(format!("negative inventory count for {item}"));
                    }
                    if item.is_vital() && count > MAX_COUNT {
                        out.push(format!("{item} above {MAX_COUNT}"));
                    }
                }
            }
            _ => out.push(format!("player id {} does not resolve to a player", self.player_id)),
        }
        if !(0.0..=1.0).contains(&self.daylight) {
            out.push(format!("daylight {} outside [0, 1]", self.daylight));
        }
        out
    }

    pub fn validate(&self) -> Result<(), StateError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(StateError::Invariant(v))
        }
    }

    pub(crate) fn allocate_id(&mut self) -> u32 {
        let id = self.next_entity_id;
        self.next_entity_id += 1;
        id
    }
}

/// Rounds a real-valued field to the six-decimal canonical grid.
pub fn quantize(x: f64) -> f64 {
    let q = (x * 1e6).round() / 1e6;
    if q == 0.0 {
        0.0
    } else {
        q
    }
}
