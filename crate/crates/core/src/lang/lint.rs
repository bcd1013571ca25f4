use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use crate::state::EntityKind;

/// State aspects written by a law: `player`, `world`, `materials` or
/// `entities:<kind>`.
pub fn written_aspects(law: &LawDef) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut vars = BTreeMap::new();
    walk(&law.effect, &mut vars, &mut out);
    out
}

fn walk(b: &Block, vars: &mut BTreeMap<String, EntityKind>, out: &mut BTreeSet<String>) {
    for s in &b.0 {
        match s {
            Stmt::Assign { target, .. } => {
                let aspect = match target[0].as_str() {
                    "player" => "player".to_string(),
                    "world" => "world".to_string(),
                    v => match vars.get(v) {
                        Some(k) => format!("entities:{k}"),
                        None => "entities".to_string(),
                    },
                };
                out.insert(aspect);
            }
            Stmt::SetFacingMaterial { .. } | Stmt::SetMaterial { .. } => {
                out.insert("materials".to_string());
            }
            Stmt::Let { .. } => {}
            Stmt::If { then, otherwise, .. } => {
                walk(then, vars, out);
                if let Some(o) = otherwise {
                    walk(o, vars, out);
                }
            }
            Stmt::For { var, kind, body, .. } => {
                let prev = vars.insert(var.clone(), *kind);
                walk(body, vars, out);
                match prev {
                    Some(k) => vars.insert(var.clone(), k),
                    None => vars.remove(var),
                };
            }
        }
    }
}

/// Advisory: one message per law that writes to several aspects.
pub fn lint(laws: &[LawDef]) -> Vec<String> {
    laws.iter()
        .filter_map(|l| {
            let aspects = written_aspects(l);
            (aspects.len() > 1).then(|| {
                let list: Vec<&str> = aspects.iter().map(|s| s.as_str()).collect();
                format!("law `{}` writes several aspects: {}", l.name, list.join(", "))
            })
        })
        .collect()
}
