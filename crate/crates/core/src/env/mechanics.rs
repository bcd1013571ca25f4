use std::sync::LazyLock;

use serde::Serialize;

use super::Action;
use crate::state::{Achievement, Item, Material};

/// `do` against a material tile.
#[derive(Clone, Debug, Serialize)]
pub struct CollectRule {
    pub material: Material,
    /// Minimum pickaxe tier: 0 none, 1 wood, 2 stone, 3 iron.
    pub required_tier: u8,
    pub yields: Item,
    pub probability: f64,
    /// Material left behind; `None` keeps the tile.
    pub leaves: Option<Material>,
    pub achievement: Achievement,
}

#[derive(Clone, Debug, Serialize)]
pub struct Recipe {
    pub action: Action,
    pub stations: Vec<Material>,
    pub consumes: Vec<(Item, i32)>,
    pub produces: Item,
    pub achievement: Achievement,
}

#[derive(Clone, Copy, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Material(Material),
    Plant,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlaceRule {
    pub action: Action,
    pub consumes: Vec<(Item, i32)>,
    pub stations: Vec<Material>,
    pub targets: Vec<Material>,
    pub places: Placement,
    pub achievement: Achievement,
}

#[derive(Clone, Debug, Serialize)]
pub struct CombatRule {
    pub base_damage: i32,
    pub weapons: Vec<(Item, i32)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NpcRules {
    pub zombie_health: i32,
    pub zombie_cooldown: i32,
    pub zombie_damage: i32,
    pub zombie_sleep_damage: i32,
    pub skeleton_health: i32,
    pub skeleton_move_probability: f64,
    pub cow_health: i32,
    pub cow_move_probability: f64,
    pub cow_food: i32,
    pub plant_food: i32,
    pub plant_ripe_at: i32,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeterRules {
    pub sleep_rate: f64,
    pub hunger_threshold: f64,
    pub thirst_threshold: f64,
    pub fatigue_rest_threshold: f64,
    pub fatigue_tired_threshold: f64,
    pub recover_gain: f64,
    pub recover_gain_sleeping: f64,
    pub recover_loss: f64,
    pub recover_loss_sleeping: f64,
    pub regen_threshold: f64,
    pub degen_threshold: f64,
}

/// Every constant of the dynamics. Chase and update range are the state's
/// view box, so they are not repeated here.
#[derive(Clone, Debug, Serialize)]
pub struct MechanicsTable {
    pub walkable: Vec<Material>,
    pub skeleton_walkable: Vec<Material>,
    pub collect: Vec<CollectRule>,
    pub recipes: Vec<Recipe>,
    pub place: Vec<PlaceRule>,
    pub combat: CombatRule,
    pub npc: NpcRules,
    pub meters: MeterRules,
    pub daylight_decay: f64,
    pub max_count: i32,
}

static STANDARD: LazyLock<MechanicsTable> = LazyLock::new(MechanicsTable::standard);

/// The compiled-in table used by [`super::transition`].
pub fn mechanics() -> &'static MechanicsTable {
    &STANDARD
}

impl MechanicsTable {
    pub fn standard() -> Self {
        use Material as M;
        let collect = |material, required_tier, yields, leaves, achievement| CollectRule {
            material,
            required_tier,
            yields,
            probability: 1.0,
            leaves,
            achievement,
        };
        let recipe = |action, stations: &[Material], consumes: &[(Item, i32)], produces, achievement| {
            Recipe {
                action,
                stations: stations.to_vec(),
                consumes: consumes.to_vec(),
                produces,
                achievement,
            }
        };
        let ground = vec![M::Grass, M::Sand, M::Path];
        Self {
            walkable: ground.clone(),
            skeleton_walkable: vec![M::Path],
            collect: vec![
                collect(M::Tree, 0, Item::Wood, None, Achievement::CollectWood),
                collect(M::Water, 0, Item::Drink, None, Achievement::CollectDrink),
                CollectRule {
                    probability: 0.1,
                    ..collect(M::Grass, 0, Item::Sapling, None, Achievement::CollectSapling)
                },
                collect(M::Stone, 1, Item::Stone, Some(M::Path), Achievement::CollectStone),
                collect(M::Coal, 1, Item::Coal, Some(M::Path), Achievement::CollectCoal),
                collect(M::Iron, 2, Item::Iron, Some(M::Path), Achievement::CollectIron),
                collect(M::Diamond, 3, Item::Diamond, Some(M::Path), Achievement::CollectDiamond),
            ],
            recipes: vec![
                recipe(
                    Action::MakeWoodPickaxe,
                    &[M::Table],
                    &[(Item::Wood, 1)],
                    Item::WoodPickaxe,
                    Achievement::MakeWoodPickaxe,
                ),
                recipe(
                    Action::MakeStonePickaxe,
                    &[M::Table],
                    &[(Item::Wood, 1), (Item::Stone, 1)],
                    Item::StonePickaxe,
                    Achievement::MakeStonePickaxe,
                ),
                recipe(
                    Action::MakeIronPickaxe,
                    &[M::Table, M::Furnace],
                    &[(Item::Wood, 1), (Item::Coal, 1), (Item::Iron, 1)],
                    Item::IronPickaxe,
                    Achievement::MakeIronPickaxe,
                ),
                recipe(
                    Action::MakeWoodSword,
                    &[M::Table],
                    &[(Item::Wood, 1)],
                    Item::WoodSword,
                    Achievement::MakeWoodSword,
                ),
                recipe(
                    Action::MakeStoneSword,
                    &[M::Table],
                    &[(Item::Wood, 1), (Item::Stone, 1)],
                    Item::StoneSword,
                    Achievement::MakeStoneSword,
                ),
                recipe(
                    Action::MakeIronSword,
                    &[M::Table, M::Furnace],
                    &[(Item::Wood, 1), (Item::Coal, 1), (Item::Iron, 1)],
                    Item::IronSword,
                    Achievement::MakeIronSword,
                ),
            ],
            place: vec![
                PlaceRule {
                    action: Action::PlaceTable,
                    consumes: vec![(Item::Wood, 1)],
                    stations: vec![],
                    targets: ground.clone(),
                    places: Placement::Material(M::Table),
                    achievement: Achievement::PlaceTable,
                },
                PlaceRule {
                    action: Action::PlaceStone,
                    consumes: vec![(Item::Stone, 1)],
                    stations: vec![],
                    targets: vec![M::Grass, M::Sand, M::Path, M::Water, M::Lava],
                    places: Placement::Material(M::Stone),
                    achievement: Achievement::PlaceStone,
                },
                PlaceRule {
                    action: Action::PlaceFurnace,
                    consumes: vec![(Item::Stone, 1)],
                    stations: vec![M::Table],
                    targets: ground,
                    places: Placement::Material(M::Furnace),
                    achievement: Achievement::PlaceFurnace,
                },
                PlaceRule {
                    action: Action::PlacePlant,
                    consumes: vec![(Item::Sapling, 1)],
                    stations: vec![],
                    targets: vec![M::Grass],
                    places: Placement::Plant,
                    achievement: Achievement::PlacePlant,
                },
            ],
            combat: CombatRule {
                base_damage: 1,
                weapons: vec![(Item::WoodSword, 2), (Item::StoneSword, 3), (Item::IronSword, 5)],
            },
            npc: NpcRules {
                zombie_health: 5,
                zombie_cooldown: 5,
                zombie_damage: 2,
                zombie_sleep_damage: 7,
                skeleton_health: 3,
                skeleton_move_probability: 0.5,
                cow_health: 3,
                cow_move_probability: 0.5,
                cow_food: 6,
                plant_food: 4,
                plant_ripe_at: 50,
            },
            meters: MeterRules {
                sleep_rate: 0.5,
                hunger_threshold: 25.0,
                thirst_threshold: 20.0,
                fatigue_rest_threshold: -10.0,
                fatigue_tired_threshold: 30.0,
                recover_gain: 1.0,
                recover_gain_sleeping: 2.0,
                recover_loss: 1.0,
                recover_loss_sleeping: 0.5,
                regen_threshold: 25.0,
                degen_threshold: -15.0,
            },
            daylight_decay: 0.004,
            max_count: crate::state::MAX_COUNT,
        }
    }
}
