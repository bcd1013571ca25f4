//! Leaf-granular document diffing.
//!
//! A document is viewed as a sorted map from typed paths to leaves, where a
//! leaf is a primitive or an empty container. Patches are one `replace`,
//! `add` or `remove` per differing leaf; there are no splice or move
//! operations.

use std::collections::BTreeMap;

use serde::ser::{Serialize, SerializeMap, Serializer};
use serde_json::{Map, Value};

use super::CanonicalDocument;
use crate::error::PatchError;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Segment {
    Key(String),
    Index(usize),
}

impl Segment {
    fn render(&self) -> String {
        match self {
            Segment::Key(k) => k.replace('~', "~0").replace('/', "~1"),
            Segment::Index(i) => i.to_string(),
        }
    }
}

/// Slash-delimited pointer form of a typed path, leading slash included.
pub fn pointer(path: &[Segment]) -> String {
    let mut out = String::new();
    for s in path {
        out.push('/');
        out.push_str(&s.render());
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PatchKind {
    Add,
    Remove,
    Replace,
}

impl PatchKind {
    pub fn name(self) -> &'static str {
        match self {
            PatchKind::Add => "add",
            PatchKind::Remove => "remove",
            PatchKind::Replace => "replace",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatchOp {
    pub op: PatchKind,
    pub path: Vec<Segment>,
    /// New leaf for `add` and `replace`.
    pub value: Option<Value>,
}

impl PatchOp {
    pub fn pointer(&self) -> String {
        pointer(&self.path)
    }
}

impl Serialize for PatchOp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(None)?;
        m.serialize_entry("op", self.op.name())?;
        m.serialize_entry("path", &self.pointer())?;
        if let Some(v) = &self.value {
            m.serialize_entry("value", v)?;
        }
        m.end()
    }
}

fn is_leaf(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.is_empty(),
        Value::Object(o) => o.is_empty(),
        _ => true,
    }
}

fn walk(v: &Value, path: &mut Vec<Segment>, out: &mut BTreeMap<Vec<Segment>, Value>) {
    if is_leaf(v) {
        out.insert(path.clone(), v.clone());
        return;
    }
    match v {
        Value::Array(a) => {
            for (i, child) in a.iter().enumerate() {
                path.push(Segment::Index(i));
                walk(child, path, out);
                path.pop();
            }
        }
        Value::Object(o) => {
            for (k, child) in o {
                path.push(Segment::Key(k.clone()));
                walk(child, path, out);
                path.pop();
            }
        }
        _ => unreachable!(),
    }
}

/// Every leaf of `v` keyed by its typed path, in document order.
pub fn flatten(v: &Value) -> BTreeMap<Vec<Segment>, Value> {
    let mut out = BTreeMap::new();
    walk(v, &mut Vec::new(), &mut out);
    out
}

/// Number of leaves: primitives (null included) plus empty containers.
pub fn count_elements(doc: &CanonicalDocument) -> usize {
    flatten(doc.value()).len()
}

/// Per-leaf patch turning `source` into `target`.
pub fn diff_ops(source: &CanonicalDocument, target: &CanonicalDocument) -> Vec<PatchOp> {
    diff_values(source.value(), target.value())
}

pub(crate) fn diff_values(source: &Value, target: &Value) -> Vec<PatchOp> {
    let a = flatten(source);
    let b = flatten(target);
    let mut ops = Vec::new();
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => break,
            (Some((pa, _)), Some((pb, _))) if pa == pb => {
                let (path, va) = ia.next().unwrap();
                let (_, vb) = ib.next().unwrap();
                if va != vb {
                    ops.push(PatchOp {
                        op: PatchKind::Replace,
                        path: path.clone(),
                        value: Some(vb.clone()),
                    });
                }
            }
            (Some((pa, _)), Some((pb, _))) if pa < pb => {
                let (path, _) = ia.next().unwrap();
                ops.push(remove(path));
            }
            (Some(_), None) => {
                let (path, _) = ia.next().unwrap();
                ops.push(remove(path));
            }
            (_, Some(_)) => {
                let (path, v) = ib.next().unwrap();
                ops.push(PatchOp {
                    op: PatchKind::Add,
                    path: path.clone(),
                    value: Some(v.clone()),
                });
            }
        }
    }
    ops
}

fn remove(path: &[Segment]) -> PatchOp {
    PatchOp {
        op: PatchKind::Remove,
        path: path.to_vec(),
        value: None,
    }
}

/// Applies a leaf patch. Operations are checked strictly: `add` needs an
/// absent leaf, `remove` and `replace` need a present one.
pub fn apply_patch(doc: &CanonicalDocument, ops: &[PatchOp]) -> Result<CanonicalDocument, PatchError> {
    let mut leaves = flatten(doc.value());
    for op in ops {
        match op.op {
            PatchKind::Add => {
                let v = op.value.clone().ok_or_else(|| PatchError::MissingValue(op.pointer()))?;
                if leaves.insert(op.path.clone(), v).is_some() {
                    return Err(PatchError::AlreadyPresent(op.pointer()));
                }
            }
            PatchKind::Replace => {
                let v = op.value.clone().ok_or_else(|| PatchError::MissingValue(op.pointer()))?;
                match leaves.get_mut(&op.path) {
                    Some(slot) => *slot = v,
                    None => return Err(PatchError::Missing(op.pointer())),
                }
            }
            PatchKind::Remove => {
                if leaves.remove(&op.path).is_none() {
                    return Err(PatchError::Missing(op.pointer()));
                }
            }
        }
    }
    unflatten(&leaves).map(CanonicalDocument::from_value)
}

/// Inverse of [`flatten`] for leaf maps describing a well-formed tree.
pub fn unflatten(leaves: &BTreeMap<Vec<Segment>, Value>) -> Result<Value, PatchError> {
    let mut root = None;
    for (path, leaf) in leaves {
        insert(&mut root, path, leaf.clone(), path)?;
    }
    Ok(root.unwrap_or(Value::Null))
}

fn insert(
    slot: &mut Option<Value>,
    rest: &[Segment],
    leaf: Value,
    full: &[Segment],
) -> Result<(), PatchError> {
    let conflict = || PatchError::Conflict(pointer(full));
    let Some((head, tail)) = rest.split_first() else {
        if slot.is_some() {
            return Err(conflict());
        }
        *slot = Some(leaf);
        return Ok(());
    };
    match head {
        Segment::Key(k) => {
            let node = slot.get_or_insert_with(|| Value::Object(Map::new()));
            let Value::Object(map) = node else {
                return Err(conflict());
            };
            let mut child = map.remove(k);
            insert(&mut child, tail, leaf, full)?;
            map.insert(k.clone(), child.expect("insert always fills the slot"));
        }
        Segment::Index(i) => {
            let node = slot.get_or_insert_with(|| Value::Array(Vec::new()));
            let Value::Array(items) = node else {
                return Err(conflict());
            };
            if *i < items.len() {
                let mut child = Some(std::mem::take(&mut items[*i]));
                insert(&mut child, tail, leaf, full)?;
                items[*i] = child.expect("insert always fills the slot");
            } else if *i == items.len() {
                let mut child = None;
                insert(&mut child, tail, leaf, full)?;
                items.push(child.expect("insert always fills the slot"));
            } else {
                return Err(PatchError::SparseArray(pointer(full)));
            }
        }
    }
    Ok(())
}
