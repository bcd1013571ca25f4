//! Programmatic state construction used by scenarios, planners and tests.
//! Every function returns a modified copy.

use serde_json::{Map, Value};

use super::{in_update_range, mechanics};
use crate::error::EnvError;
use crate::rng;
use crate::state::{
    Entity, EntityData, EntityKind, Item, Material, Meter, PlayerData, Position, WorldState,
};

/// All-grass world with the player centered, facing down.
pub fn blank_state(size: (i32, i32), seed: u64) -> Result<WorldState, EnvError> {
    let (w, h) = size;
    if w < 7 || h < 7 {
        return Err(EnvError::SizeTooSmall(w, h));
    }
    Ok(WorldState {
        size,
        view: (9, 9),
        daylight: 1.0,
        step_count: 0,
        materials: vec![Some(Material::Grass); (w * h) as usize],
        objects: vec![Entity {
            entity_id: 0,
            position: Position::new(w / 2, h / 2),
            removed: false,
            data: EntityData::Player(Box::new(PlayerData::new())),
        }],
        player_id: 0,
        next_entity_id: 1,
        rng_state: rng::seeded_state(rng::derive_seed(seed, "transition")),
        event_log: Vec::new(),
    })
}

fn check_bounds(s: &WorldState, p: Position) -> Result<(), EnvError> {
    if s.in_bounds(p) {
        Ok(())
    } else {
        Err(EnvError::OutOfBounds(p.x, p.y))
    }
}

pub fn set_tile_material(s: &WorldState, pos: Position, material: &str) -> Result<WorldState, EnvError> {
    check_bounds(s, pos)?;
    let m = Material::from_name(material)
        .ok_or_else(|| EnvError::UnknownMaterial(material.to_string()))?;
    let mut out = s.clone();
    out.set_material(pos, Some(m));
    Ok(out)
}

fn int_field(fields: &Map<String, Value>, key: &str, default: i32) -> Result<i32, EnvError> {
    match fields.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_i64()
            .and_then(|i| i32::try_from(i).ok())
            .ok_or_else(|| EnvError::InvalidField(format!("`{key}` must be an integer"))),
    }
}

fn bool_field(fields: &Map<String, Value>, key: &str) -> Result<bool, EnvError> {
    match fields.get(key) {
        None => Ok(false),
        Some(v) => v
            .as_bool()
            .ok_or_else(|| EnvError::InvalidField(format!("`{key}` must be a boolean"))),
    }
}

/// Adds a non-player entity. Unspecified fields take their spawn defaults.
/// The new entity's id is the input's `next_entity_id`.
pub fn add_object(
    s: &WorldState,
    kind: &str,
    pos: Position,
    fields: &Map<String, Value>,
) -> Result<WorldState, EnvError> {
    let kind = EntityKind::from_name(kind).ok_or_else(|| EnvError::UnknownKind(kind.to_string()))?;
    check_bounds(s, pos)?;
    if s.is_occupied(pos) {
        return Err(EnvError::Occupied(pos.x, pos.y));
    }
    let allowed: &[&str] = match kind {
        EntityKind::Player => return Err(EnvError::InvalidField("a state has exactly one player".into())),
        EntityKind::Zombie => &["health", "cooldown"],
        EntityKind::Skeleton => &["health", "reload"],
        EntityKind::Arrow => &["health", "facing"],
        EntityKind::Plant => &["health", "grown", "ripe"],
        EntityKind::Cow | EntityKind::Fence => &["health"],
    };
    if let Some(bad) = fields.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(EnvError::InvalidField(format!("`{bad}` is not a {kind} field")));
    }
    let npc = &mechanics().npc;
    let data = match kind {
        EntityKind::Zombie => EntityData::Zombie {
            health: int_field(fields, "health", npc.zombie_health)?,
            cooldown: int_field(fields, "cooldown", npc.zombie_cooldown)?,
        },
        EntityKind::Skeleton => EntityData::Skeleton {
            health: int_field(fields, "health", npc.skeleton_health)?,
            reload: int_field(fields, "reload", 0)?,
        },
        EntityKind::Cow => EntityData::Cow {
            health: int_field(fields, "health", npc.cow_health)?,
        },
        EntityKind::Fence => EntityData::Fence {
            health: int_field(fields, "health", 1)?,
        },
        EntityKind::Plant => EntityData::Plant {
            health: int_field(fields, "health", 1)?,
            grown: int_field(fields, "grown", 0)?,
            ripe: bool_field(fields, "ripe")?,
        },
        EntityKind::Arrow => {
            let facing = match fields.get("facing") {
                None => Position::new(0, 1),
                Some(v) => serde_json::from_value(v.clone())
                    .map_err(|_| EnvError::InvalidField("`facing` must be {x, y}".into()))?,
            };
            EntityData::Arrow {
                health: int_field(fields, "health", 1)?,
                facing,
            }
        }
        EntityKind::Player => unreachable!(),
    };
    let mut out = s.clone();
    let id = out.allocate_id();
    out.objects.push(Entity {
        entity_id: id,
        position: pos,
        removed: false,
        data,
    });
    Ok(out)
}

/// Deletes an entity record outright.
pub fn remove_object(s: &WorldState, entity_id: u32) -> Result<WorldState, EnvError> {
    if entity_id == s.player_id {
        return Err(EnvError::RemovePlayer);
    }
    if s.entity(entity_id).is_none() {
        return Err(EnvError::UnknownEntity(entity_id));
    }
    let mut out = s.clone();
    out.objects.retain(|e| e.entity_id != entity_id);
    Ok(out)
}

pub fn set_player_position(s: &WorldState, pos: Position) -> Result<WorldState, EnvError> {
    check_bounds(s, pos)?;
    if s.entity_at(pos).is_some_and(|e| e.entity_id != s.player_id) {
        return Err(EnvError::Occupied(pos.x, pos.y));
    }
    let mut out = s.clone();
    out.player_entity_mut().position = pos;
    Ok(out)
}

pub fn set_player_facing(s: &WorldState, dir: Position) -> Result<WorldState, EnvError> {
    if dir.x.abs() + dir.y.abs() != 1 {
        return Err(EnvError::InvalidDirection(dir.x, dir.y));
    }
    let mut out = s.clone();
    out.player_mut().facing = dir;
    Ok(out)
}

pub fn set_player_inventory_item(s: &WorldState, item: &str, count: i32) -> Result<WorldState, EnvError> {
    let item = Item::from_name(item).ok_or_else(|| EnvError::UnknownItem(item.to_string()))?;
    if count < 0 {
        return Err(EnvError::NegativeCount(item.name().to_string(), count));
    }
    let mut out = s.clone();
    out.player_mut().inventory.set(item, count);
    Ok(out)
}

pub fn set_player_meter(s: &WorldState, meter: Meter, value: f64) -> Result<WorldState, EnvError> {
    if !value.is_finite() {
        return Err(EnvError::InvalidField(format!("{} must be finite", meter.name())));
    }
    let mut out = s.clone();
    *out.player_mut().meter_mut(meter) = crate::state::quantize(value);
    Ok(out)
}

pub fn set_daylight(s: &WorldState, level: f64) -> Result<WorldState, EnvError> {
    if !(0.0..=1.0).contains(&level) {
        return Err(EnvError::Daylight(level));
    }
    let mut out = s.clone();
    out.daylight = crate::state::quantize(level);
    Ok(out)
}

/// Material and live entity on the tile the player faces.
pub fn get_target_tile(s: &WorldState) -> (Option<Material>, Option<&Entity>) {
    let t = s.player_position().offset(s.player().facing);
    (s.material(t), s.entity_at(t))
}

/// Live entities of `kind` at Manhattan distance 1 from the player.
pub fn adjacent_entities(s: &WorldState, kind: EntityKind) -> Vec<&Entity> {
    let p = s.player_position();
    s.live_of_kind(kind)
        .into_iter()
        .filter(|e| e.position.manhattan(p) == 1)
        .collect()
}

pub fn within_update_range(s: &WorldState, e: &Entity) -> bool {
    in_update_range(s, e.position)
}
