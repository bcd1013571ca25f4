use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::ReconstructError;
use crate::state::{canonicalize, flatten, from_canonical, CanonicalDocument, Prim, Segment, WorldState};

/// Flat leaf map of a state, keyed like `player/inventory/wood` or
/// `materials/4/2`. Empty containers are not observables.
pub type Observables = BTreeMap<String, Prim>;

pub fn path_string(path: &[Segment]) -> String {
    let parts: Vec<String> = path
        .iter()
        .map(|s| match s {
            Segment::Key(k) => k.clone(),
            Segment::Index(i) => i.to_string(),
        })
        .collect();
    parts.join("/")
}

pub fn observables(s: &WorldState) -> Observables {
    flatten(canonicalize(s).value())
        .into_iter()
        .filter_map(|(p, v)| Prim::from_value(&v).map(|prim| (path_string(&p), prim)))
        .collect()
}

fn leaf_mut<'a>(root: &'a mut Value, path: &str) -> Option<&'a mut Value> {
    let mut cur = root;
    for part in path.split('/') {
        cur = match cur {
            Value::Object(m) => m.get_mut(part)?,
            Value::Array(a) => a.get_mut(part.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    match cur {
        Value::Object(_) | Value::Array(_) => None,
        leaf => Some(leaf),
    }
}

/// Writes `values` over the canonical document of `s` and parses the result.
pub fn reconstruct(s: &WorldState, values: &BTreeMap<String, Prim>) -> Result<WorldState, ReconstructError> {
    let mut doc = canonicalize(s).into_value();
    for (path, v) in values {
        let leaf = leaf_mut(&mut doc, path).ok_or_else(|| ReconstructError::UnknownPath(path.clone()))?;
        *leaf = v.to_value();
    }
    Ok(from_canonical(&CanonicalDocument::from_value(doc))?)
}
