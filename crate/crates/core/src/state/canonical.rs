use serde_json::{Map, Value};

use super::{
    quantize, Achievement, Achievements, Entity, EntityData, EntityKind, Inventory, Item, Material,
    PlayerData, Position, WorldState,
};
use crate::error::StateError;
use crate::rng;

/// Order-independent tree form of a [`WorldState`].
///
/// Keys are sorted, non-player entities are keyed by decimal id under
/// `objects`, the player sits under `player`, reals are rounded to six
/// decimals and the generator state and event log are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalDocument(Value);

impl CanonicalDocument {
    /// Wraps an arbitrary tree. No schema check is performed.
    pub fn from_value(value: Value) -> Self {
        Self(value)
    }

    pub fn value(&self) -> &Value {
        &self.0
    }

    pub fn into_value(self) -> Value {
        self.0
    }

    /// Compact UTF-8 JSON bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        serde_json::to_vec(&self.0).expect("canonical documents always serialize")
    }

    pub fn to_text(&self) -> String {
        serde_json::to_string(&self.0).expect("canonical documents always serialize")
    }

    pub fn parse(text: &str) -> Result<Self, StateError> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| StateError::Schema(format!("invalid JSON: {e}")))
    }
}

fn real(x: f64) -> Value {
    Value::from(quantize(x))
}

fn xy(p: Position) -> Value {
    let mut m = Map::new();
    m.insert("x".into(), Value::from(p.x));
    m.insert("y".into(), Value::from(p.y));
    Value::Object(m)
}

fn wh((w, h): (i32, i32)) -> Value {
    let mut m = Map::new();
    m.insert("height".into(), Value::from(h));
    m.insert("width".into(), Value::from(w));
    Value::Object(m)
}

fn entity_record(e: &Entity) -> Value {
    let mut m = Map::new();
    m.insert("entity_id".into(), Value::from(e.entity_id));
    m.insert("name".into(), Value::from(e.kind().name()));
    m.insert("position".into(), xy(e.position));
    m.insert("removed".into(), Value::from(e.removed));
    match &e.data {
        EntityData::Player(p) => {
            let inv: Map<String, Value> = p
                .inventory
                .iter()
                .map(|(i, c)| (i.name().to_string(), Value::from(c)))
                .collect();
            let ach: Map<String, Value> = p
                .achievements
                .iter()
                .map(|(a, c)| (a.name().to_string(), Value::from(c)))
                .collect();
            m.insert("achievements".into(), Value::Object(ach));
            m.insert("action".into(), Value::from(p.action.clone()));
            m.insert("facing".into(), xy(p.facing));
            m.insert("fatigue".into(), real(p.fatigue));
            m.insert("hunger".into(), real(p.hunger));
            m.insert("inventory".into(), Value::Object(inv));
            m.insert("recover".into(), real(p.recover));
            m.insert("sleeping".into(), Value::from(p.sleeping));
            m.insert("thirst".into(), real(p.thirst));
        }
        EntityData::Cow { health } | EntityData::Fence { health } => {
            m.insert("health".into(), Value::from(*health));
        }
        EntityData::Zombie { health, cooldown } => {
            m.insert("health".into(), Value::from(*health));
            m.insert("cooldown".into(), Value::from(*cooldown));
        }
        EntityData::Skeleton { health, reload } => {
            m.insert("health".into(), Value::from(*health));
            m.insert("reload".into(), Value::from(*reload));
        }
        EntityData::Arrow { health, facing } => {
            m.insert("health".into(), Value::from(*health));
            m.insert("facing".into(), xy(*facing));
        }
        EntityData::Plant { health, grown, ripe } => {
            m.insert("health".into(), Value::from(*health));
            m.insert("grown".into(), Value::from(*grown));
            m.insert("ripe".into(), Value::from(*ripe));
        }
    }
    Value::Object(m)
}

/// Builds the canonical document of `state`.
pub fn canonicalize(state: &WorldState) -> CanonicalDocument {
    let (w, h) = state.size;
    let mut doc = Map::new();
    doc.insert("daylight".into(), real(state.daylight));
    let columns: Vec<Value> = (0..w)
        .map(|x| {
            Value::Array(
                (0..h)
                    .map(|y| match state.material(Position::new(x, y)) {
                        Some(m) => Value::from(m.name()),
                        None => Value::Null,
                    })
                    .collect(),
            )
        })
        .collect();
    doc.insert("materials".into(), Value::Array(columns));
    doc.insert("next_entity_id".into(), Value::from(state.next_entity_id));
    let mut objects = Map::new();
    for e in &state.objects {
        if e.entity_id == state.player_id {
            doc.insert("player".into(), entity_record(e));
        } else {
            objects.insert(e.entity_id.to_string(), entity_record(e));
        }
    }
    doc.insert("objects".into(), Value::Object(objects));
    doc.insert("size".into(), wh(state.size));
    doc.insert("step_count".into(), Value::from(state.step_count));
    doc.insert("view".into(), wh(state.view));
    CanonicalDocument(Value::Object(doc))
}

/// True iff both states have byte-identical canonical documents.
pub fn states_equal(a: &WorldState, b: &WorldState) -> bool {
    canonicalize(a).to_bytes() == canonicalize(b).to_bytes()
}

fn schema(msg: impl Into<String>) -> StateError {
    StateError::Schema(msg.into())
}

fn field<'a>(m: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a Value, StateError> {
    m.get(key)
        .ok_or_else(|| schema(format!("{ctx}: missing `{key}`")))
}

fn obj<'a>(v: &'a Value, ctx: &str) -> Result<&'a Map<String, Value>, StateError> {
    v.as_object()
        .ok_or_else(|| schema(format!("{ctx}: expected an object")))
}

fn int(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<i64, StateError> {
    field(m, key, ctx)?
        .as_i64()
        .ok_or_else(|| schema(format!("{ctx}/{key}: expected an integer")))
}

fn int32(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<i32, StateError> {
    let v = int(m, key, ctx)?;
    i32::try_from(v).map_err(|_| schema(format!("{ctx}/{key}: integer out of range")))
}

fn float(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<f64, StateError> {
    field(m, key, ctx)?
        .as_f64()
        .map(quantize)
        .ok_or_else(|| schema(format!("{ctx}/{key}: expected a number")))
}

fn boolean(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<bool, StateError> {
    field(m, key, ctx)?
        .as_bool()
        .ok_or_else(|| schema(format!("{ctx}/{key}: expected a boolean")))
}

fn text<'a>(m: &'a Map<String, Value>, key: &str, ctx: &str) -> Result<&'a str, StateError> {
    field(m, key, ctx)?
        .as_str()
        .ok_or_else(|| schema(format!("{ctx}/{key}: expected a string")))
}

fn pos(m: &Map<String, Value>, key: &str, ctx: &str) -> Result<Position, StateError> {
    let inner = obj(field(m, key, ctx)?, &format!("{ctx}/{key}"))?;
    let c = format!("{ctx}/{key}");
    Ok(Position::new(int32(inner, "x", &c)?, int32(inner, "y", &c)?))
}

fn dims(m: &Map<String, Value>, key: &str) -> Result<(i32, i32), StateError> {
    let inner = obj(field(m, key, "")?, key)?;
    Ok((int32(inner, "width", key)?, int32(inner, "height", key)?))
}

fn parse_entity(record: &Value, ctx: &str) -> Result<Entity, StateError> {
    let m = obj(record, ctx)?;
    let name = text(m, "name", ctx)?;
    let kind = EntityKind::from_name(name)
        .ok_or_else(|| schema(format!("{ctx}/name: unknown entity kind `{name}`")))?;
    let entity_id = u32::try_from(int(m, "entity_id", ctx)?)
        .map_err(|_| schema(format!("{ctx}/entity_id: out of range")))?;
    let position = pos(m, "position", ctx)?;
    let removed = boolean(m, "removed", ctx)?;
    let data = match kind {
        EntityKind::Player => {
            let inv_ctx = format!("{ctx}/inventory");
            let inv_map = obj(field(m, "inventory", ctx)?, &inv_ctx)?;
            let mut inventory = Inventory::empty();
            for &item in Item::ALL {
                inventory.set(item, int32(inv_map, item.name(), &inv_ctx)?);
            }
            let ach_ctx = format!("{ctx}/achievements");
            let ach_map = obj(field(m, "achievements", ctx)?, &ach_ctx)?;
            let mut achievements = Achievements::default();
            for &a in Achievement::ALL {
                achievements.set(a, int32(ach_map, a.name(), &ach_ctx)?);
            }
            EntityData::Player(Box::new(PlayerData {
                facing: pos(m, "facing", ctx)?,
                sleeping: boolean(m, "sleeping", ctx)?,
                inventory,
                achievements,
                thirst: float(m, "thirst", ctx)?,
                hunger: float(m, "hunger", ctx)?,
                fatigue: float(m, "fatigue", ctx)?,
                recover: float(m, "recover", ctx)?,
                action: text(m, "action", ctx)?.to_string(),
            }))
        }
        EntityKind::Cow => EntityData::Cow {
            health: int32(m, "health", ctx)?,
        },
        EntityKind::Fence => EntityData::Fence {
            health: int32(m, "health", ctx)?,
        },
        EntityKind::Zombie => EntityData::Zombie {
            health: int32(m, "health", ctx)?,
            cooldown: int32(m, "cooldown", ctx)?,
        },
        EntityKind::Skeleton => EntityData::Skeleton {
            health: int32(m, "health", ctx)?,
            reload: int32(m, "reload", ctx)?,
        },
        EntityKind::Arrow => EntityData::Arrow {
            health: int32(m, "health", ctx)?,
            facing: pos(m, "facing", ctx)?,
        },
        EntityKind::Plant => EntityData::Plant {
            health: int32(m, "health", ctx)?,
            grown: int32(m, "grown", ctx)?,
            ripe: boolean(m, "ripe", ctx)?,
        },
    };
    Ok(Entity {
        entity_id,
        position,
        removed,
        data,
    })
}

/// Rebuilds a state from its canonical document.
///
/// The generator state is not part of the document; it is re-seeded from a
/// hash of the document bytes so loading is deterministic. Structural
/// invariants are not checked here, see [`WorldState::validate`].
pub fn from_canonical(doc: &CanonicalDocument) -> Result<WorldState, StateError> {
    let root = obj(&doc.0, "document")?;
    let size = dims(root, "size")?;
    let view = dims(root, "view")?;
    let (w, h) = size;
    if w < 0 || h < 0 {
        return Err(schema("size: negative dimension"));
    }
    let cols = field(root, "materials", "")?
        .as_array()
        .ok_or_else(|| schema("materials: expected an array"))?;
    if cols.len() != w as usize {
        return Err(schema("materials: column count does not match width"));
    }
    let mut materials = Vec::with_capacity((w * h) as usize);
    for (x, col) in cols.iter().enumerate() {
        let col = col
            .as_array()
            .ok_or_else(|| schema(format!("materials/{x}: expected an array")))?;
        if col.len() != h as usize {
            return Err(schema(format!("materials/{x}: row count does not match height")));
        }
        for (y, cell) in col.iter().enumerate() {
            materials.push(match cell {
                Value::Null => None,
                Value::String(s) => Some(Material::from_name(s).ok_or_else(|| {
                    schema(format!("materials/{x}/{y}: unknown material `{s}`"))
                })?),
                _ => return Err(schema(format!("materials/{x}/{y}: expected a string or null"))),
            });
        }
    }
    let player = parse_entity(field(root, "player", "")?, "player")?;
    if player.kind() != EntityKind::Player {
        return Err(schema("player: record is not named player"));
    }
    let player_id = player.entity_id;
    let mut objects = vec![player];
    for (key, record) in obj(field(root, "objects", "")?, "objects")? {
        let ctx = format!("objects/{key}");
        let e = parse_entity(record, &ctx)?;
        if e.entity_id.to_string() != *key {
            return Err(schema(format!("{ctx}/entity_id: does not match key")));
        }
        objects.push(e);
    }
    objects.sort_by_key(|e| e.entity_id);
    let step_count = u64::try_from(int(root, "step_count", "")?)
        .map_err(|_| schema("step_count: negative"))?;
    let next_entity_id = u32::try_from(int(root, "next_entity_id", "")?)
        .map_err(|_| schema("next_entity_id: out of range"))?;
    Ok(WorldState {
        size,
        view,
        daylight: float(root, "daylight", "")?,
        step_count,
        materials,
        objects,
        player_id,
        next_entity_id,
        rng_state: rng::seeded_state(rng::hash_seed(&doc.to_bytes())),
        event_log: Vec::new(),
    })
}
