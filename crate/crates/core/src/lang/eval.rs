//! Interpreter for checked laws over a world state.

use std::collections::BTreeMap;

use super::ast::*;
use super::check::{entity_field, player_field, world_field, Ty};
use crate::env::{self, mechanics, Action};
use crate::error::EvalError;
use crate::state::{EntityData, EntityKind, Item, Material, Position, Prim, WorldState};

/// Finite support with implied uniform mass. Values are deduplicated in
/// first-seen order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dist {
    support: Vec<Prim>,
}

impl Dist {
    pub fn new(values: impl IntoIterator<Item = Prim>) -> Self {
        let mut support: Vec<Prim> = Vec::new();
        for v in values {
            if !support.contains(&v) {
                support.push(v);
            }
        }
        Self { support }
    }

    pub fn point(v: Prim) -> Self {
        Self { support: vec![v] }
    }

    pub fn support(&self) -> &[Prim] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, v: &Prim) -> bool {
        self.support.contains(v)
    }
}

/// Path-keyed predictions of one law for one transition.
pub type Effects = BTreeMap<String, Dist>;

#[derive(Clone, Debug, PartialEq)]
enum Val {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
    Action(Action),
    Entity(u32),
}

impl Val {
    fn num(&self) -> f64 {
        match self {
            Val::Int(i) => *i as f64,
            Val::Real(r) => *r,
            _ => f64::NAN,
        }
    }

    fn int(&self) -> i64 {
        match self {
            Val::Int(i) => *i,
            Val::Real(r) => *r as i64,
            _ => 0,
        }
    }

    fn truthy(&self) -> bool {
        matches!(self, Val::Bool(true))
    }
}

struct Eval<'a> {
    law: &'a LawDef,
    s: &'a WorldState,
    action: Action,
    scope: Vec<(String, Val)>,
    out: Effects,
}

fn material_name(m: Option<Material>) -> String {
    m.map_or("none", |m| m.name()).to_string()
}

fn xy_val(p: Position, axis: &str) -> Val {
    Val::Int(if axis == "x" { p.x } else { p.y } as i64)
}

impl<'a> Eval<'a> {
    fn fail(&self, message: impl Into<String>) -> EvalError {
        EvalError {
            law: self.law.name.clone(),
            message: message.into(),
        }
    }

    fn lookup(&self, name: &str) -> Option<Val> {
        if let Some((_, v)) = self.scope.iter().rev().find(|(n, _)| n == name) {
            return Some(v.clone());
        }
        self.law.params.iter().find(|(n, _)| n == name).map(|(_, l)| match l {
            Literal::Int(i) => Val::Int(*i),
            Literal::Real(r) => Val::Real(*r),
        })
    }

    fn kind_of(&self, id: u32) -> EntityKind {
        self.s.entity(id).map_or(EntityKind::Fence, |e| e.kind())
    }

    fn position(&self, id: u32) -> Position {
        self.s.entity(id).map_or(Position::new(-1, -1), |e| e.position)
    }

    fn target_tile(&self) -> Position {
        self.s.player_position().offset(self.s.player().facing)
    }

    fn read_entity(&self, id: u32, fields: &[String]) -> Val {
        let Some(e) = self.s.entity(id) else {
            return Val::Int(0);
        };
        let axis = fields.get(1).map_or("x", |s| s.as_str());
        match (fields[0].as_str(), &e.data) {
            ("position", _) => xy_val(e.position, axis),
            ("removed", _) => Val::Bool(e.removed),
            ("health", _) => Val::Int(e.health() as i64),
            ("cooldown", EntityData::Zombie { cooldown, .. }) => Val::Int(*cooldown as i64),
            ("reload", EntityData::Skeleton { reload, .. }) => Val::Int(*reload as i64),
            ("facing", EntityData::Arrow { facing, .. }) => xy_val(*facing, axis),
            ("grown", EntityData::Plant { grown, .. }) => Val::Int(*grown as i64),
            ("ripe", EntityData::Plant { ripe, .. }) => Val::Bool(*ripe),
            (field, EntityData::Player(p)) => match field {
                "facing" => xy_val(p.facing, axis),
                "sleeping" => Val::Bool(p.sleeping),
                "inventory" => Val::Int(
                    Item::from_name(axis).map_or(0, |i| p.inventory.get(i)) as i64,
                ),
                "achievements" => Val::Int(
                    crate::state::Achievement::from_name(axis).map_or(0, |a| p.achievements.get(a))
                        as i64,
                ),
                "thirst" => Val::Real(p.thirst),
                "hunger" => Val::Real(p.hunger),
                "fatigue" => Val::Real(p.fatigue),
                "recover" => Val::Real(p.recover),
                "action" => Val::Str(p.action.clone()),
                _ => Val::Int(0),
            },
            _ => Val::Int(0),
        }
    }

    fn read_path(&self, path: &[String]) -> Val {
        let (root, rest) = path.split_first().expect("paths are non-empty");
        match root.as_str() {
            "player" if rest.is_empty() => Val::Entity(self.s.player_id),
            "player" => self.read_entity(self.s.player_id, rest),
            "world" => match rest[0].as_str() {
                "daylight" => Val::Real(self.s.daylight),
                "step_count" => Val::Int(self.s.step_count as i64),
                "width" => Val::Int(self.s.width() as i64),
                _ => Val::Int(self.s.height() as i64),
            },
            name => match self.lookup(name) {
                Some(Val::Entity(id)) if !rest.is_empty() => self.read_entity(id, rest),
                Some(v) => v,
                None => Val::Int(0),
            },
        }
    }

    /// State path and declared type of an assignment target.
    fn write_target(&self, target: &[String]) -> Option<(String, Ty)> {
        let (root, rest) = target.split_first()?;
        let (id, kind) = match root.as_str() {
            "world" => {
                let info = world_field(rest)?;
                return Some((rest.join("/"), info.ty));
            }
            "player" => (self.s.player_id, EntityKind::Player),
            name => match self.lookup(name)? {
                Val::Entity(id) => (id, self.kind_of(id)),
                _ => return None,
            },
        };
        let info = if kind == EntityKind::Player {
            player_field(rest)?
        } else {
            entity_field(kind, rest)?
        };
        let path = if id == self.s.player_id {
            format!("player/{}", rest.join("/"))
        } else {
            format!("objects/{id}/{}", rest.join("/"))
        };
        Some((path, info.ty))
    }

    fn call(&mut self, name: &str, args: &[Expr]) -> Val {
        let vals: Vec<Val> = match name {
            "exists" | "count" => Vec::new(),
            _ => args.iter().map(|a| self.expr(a)).collect(),
        };
        let s = self.s;
        let tile = |v: &[Val]| Position::new(v[0].int() as i32, v[1].int() as i32);
        let kind_arg = || match &args[0].kind {
            ExprKind::Path(p) => EntityKind::from_name(&p[0]).unwrap_or(EntityKind::Fence),
            _ => EntityKind::Fence,
        };
        match name {
            "select" => match (&vals[1], &vals[2]) {
                (Val::Int(_), Val::Real(_)) | (Val::Real(_), Val::Int(_)) => {
                    Val::Real(if vals[0].truthy() { vals[1].num() } else { vals[2].num() })
                }
                _ => vals[if vals[0].truthy() { 1 } else { 2 }].clone(),
            },
            "sign" => Val::Int(match vals[0].num() {
                x if x > 0.0 => 1,
                x if x < 0.0 => -1,
                _ => 0,
            }),
            "abs" => match vals[0] {
                Val::Int(i) => Val::Int(i.wrapping_abs()),
                ref v => Val::Real(v.num().abs()),
            },
            "min" | "max" => match (&vals[0], &vals[1]) {
                (Val::Int(a), Val::Int(b)) => Val::Int(if name == "min" { *a.min(b) } else { *a.max(b) }),
                (a, b) => Val::Real(if name == "min" { a.num().min(b.num()) } else { a.num().max(b.num()) }),
            },
            "exists" => Val::Bool(!s.live_of_kind(kind_arg()).is_empty()),
            "count" => Val::Int(s.live_of_kind(kind_arg()).len() as i64),
            "target_material" => Val::Str(material_name(s.material(self.target_tile()))),
            "target_entity_kind" => Val::Str(
                s.entity_at(self.target_tile())
                    .map_or("none".to_string(), |e| e.kind().name().to_string()),
            ),
            "in_update_range" | "adjacent" | "is_target" => {
                let Val::Entity(id) = vals[0] else { return Val::Bool(false) };
                let pos = self.position(id);
                Val::Bool(match name {
                    "in_update_range" => env::in_update_range(s, pos),
                    "adjacent" => pos.manhattan(s.player_position()) == 1,
                    _ => pos == self.target_tile(),
                })
            }
            "dx" | "dy" => {
                let (Val::Entity(a), Val::Entity(b)) = (&vals[0], &vals[1]) else {
                    return Val::Int(0);
                };
                let (pa, pb) = (self.position(*a), self.position(*b));
                Val::Int(if name == "dx" { pb.x - pa.x } else { pb.y - pa.y } as i64)
            }
            "nearby" => {
                let m = match &args[0].kind {
                    ExprKind::Str(m) => Material::from_name(m),
                    _ => None,
                };
                Val::Bool(m.is_some_and(|m| env::station_nearby(s, m)))
            }
            "material_at" => Val::Str(material_name(s.material(tile(&vals)))),
            "walkable" => Val::Bool(
                s.material(tile(&vals))
                    .is_some_and(|m| mechanics().walkable.contains(&m)),
            ),
            "occupied" => Val::Bool(s.is_occupied(tile(&vals))),
            "in_bounds" => Val::Bool(s.in_bounds(tile(&vals))),
            _ => Val::Bool(false),
        }
    }

    fn expr(&mut self, e: &Expr) -> Val {
        match &e.kind {
            ExprKind::Int(i) => Val::Int(*i),
            ExprKind::Real(r) => Val::Real(*r),
            ExprKind::Bool(b) => Val::Bool(*b),
            ExprKind::Str(s) => Val::Str(s.clone()),
            ExprKind::Action => Val::Action(self.action),
            ExprKind::Path(p) => self.read_path(p),
            ExprKind::Unary(UnOp::Neg, inner) => match self.expr(inner) {
                Val::Int(i) => Val::Int(i.wrapping_neg()),
                v => Val::Real(-v.num()),
            },
            ExprKind::Unary(UnOp::Not, inner) => Val::Bool(!self.expr(inner).truthy()),
            ExprKind::Binary(BinOp::And, a, b) => Val::Bool(self.expr(a).truthy() && self.expr(b).truthy()),
            ExprKind::Binary(BinOp::Or, a, b) => Val::Bool(self.expr(a).truthy() || self.expr(b).truthy()),
            ExprKind::Binary(op, a, b) => {
                let (a, b) = (self.expr(a), self.expr(b));
                binary(*op, &a, &b)
            }
            ExprKind::Call(name, args) => self.call(name, args),
            ExprKind::CountWhere { var, kind, filter } => {
                let ids: Vec<u32> = self.s.live_of_kind(*kind).iter().map(|e| e.entity_id).collect();
                let mut n = 0;
                for id in ids {
                    self.scope.push((var.clone(), Val::Entity(id)));
                    if self.expr(filter).truthy() {
                        n += 1;
                    }
                    self.scope.pop();
                }
                Val::Int(n)
            }
        }
    }

    fn prim(&self, v: Val, ty: Ty) -> Result<Prim, EvalError> {
        match (ty, v) {
            (Ty::Real, v @ (Val::Int(_) | Val::Real(_))) => {
                Prim::real(v.num()).ok_or_else(|| self.fail("non-finite real in a distribution"))
            }
            (_, Val::Int(i)) => Ok(Prim::Int(i)),
            (_, Val::Bool(b)) => Ok(Prim::Bool(b)),
            (_, Val::Str(s)) => Ok(Prim::Str(s)),
            (_, Val::Action(a)) => Ok(Prim::Str(a.name().to_string())),
            (_, v) => Err(self.fail(format!("{v:?} is not a state value"))),
        }
    }

    fn emit(&mut self, path: String, dist: Dist) -> Result<(), EvalError> {
        if dist.is_empty() {
            return Err(self.fail(format!("empty support for `{path}`")));
        }
        if self.out.contains_key(&path) {
            return Err(self.fail(format!("`{path}` assigned more than once")));
        }
        self.out.insert(path, dist);
        Ok(())
    }

    fn block(&mut self, b: &Block) -> Result<(), EvalError> {
        let depth = self.scope.len();
        let r = b.0.iter().try_for_each(|s| self.stmt(s));
        self.scope.truncate(depth);
        r
    }

    fn stmt(&mut self, st: &Stmt) -> Result<(), EvalError> {
        match st {
            Stmt::Assign { target, support, .. } => {
                let (path, ty) = self
                    .write_target(target)
                    .ok_or_else(|| self.fail(format!("cannot write `{}`", target.join("."))))?;
                let mut values = Vec::new();
                for elem in support {
                    if let Some(g) = &elem.guard {
                        if !self.expr(g).truthy() {
                            continue;
                        }
                    }
                    let v = self.expr(&elem.value);
                    values.push(self.prim(v, ty)?);
                }
                self.emit(path, Dist::new(values))
            }
            Stmt::Let { name, value, .. } => {
                let v = self.expr(value);
                self.scope.push((name.clone(), v));
                Ok(())
            }
            Stmt::If { cond, then, otherwise, .. } => {
                if self.expr(cond).truthy() {
                    self.block(then)
                } else if let Some(o) = otherwise {
                    self.block(o)
                } else {
                    Ok(())
                }
            }
            Stmt::For { var, kind, filter, body, .. } => {
                let ids: Vec<u32> = self.s.live_of_kind(*kind).iter().map(|e| e.entity_id).collect();
                for id in ids {
                    self.scope.push((var.clone(), Val::Entity(id)));
                    let keep = filter.as_ref().is_none_or(|f| self.expr(f).truthy());
                    let r = if keep { self.block(body) } else { Ok(()) };
                    self.scope.pop();
                    r?;
                }
                Ok(())
            }
            Stmt::SetFacingMaterial { material, .. } => {
                let p = self.target_tile();
                self.set_material(p, *material)
            }
            Stmt::SetMaterial { x, y, material, .. } => {
                let p = Position::new(self.expr(x).int() as i32, self.expr(y).int() as i32);
                self.set_material(p, *material)
            }
        }
    }

    fn set_material(&mut self, p: Position, m: Material) -> Result<(), EvalError> {
        if !self.s.in_bounds(p) {
            return Ok(());
        }
        self.emit(
            format!("materials/{}/{}", p.x, p.y),
            Dist::point(Prim::Str(m.name().to_string())),
        )
    }
}

fn binary(op: BinOp, a: &Val, b: &Val) -> Val {
    use BinOp::*;
    match op {
        Add | Sub | Mul => match (a, b) {
            (Val::Int(x), Val::Int(y)) => Val::Int(match op {
                Add => x.wrapping_add(*y),
                Sub => x.wrapping_sub(*y),
                _ => x.wrapping_mul(*y),
            }),
            _ => Val::Real(match op {
                Add => a.num() + b.num(),
                Sub => a.num() - b.num(),
                _ => a.num() * b.num(),
            }),
        },
        Div => Val::Real(a.num() / b.num()),
        Eq | Ne => {
            let eq = match (a, b) {
                (Val::Int(x), Val::Int(y)) => x == y,
                (Val::Action(act), Val::Str(s)) | (Val::Str(s), Val::Action(act)) => act.name() == s,
                (Val::Int(_) | Val::Real(_), Val::Int(_) | Val::Real(_)) => a.num() == b.num(),
                _ => a == b,
            };
            Val::Bool(eq == (op == Eq))
        }
        Lt | Le | Gt | Ge => {
            let ord = match (a, b) {
                (Val::Int(x), Val::Int(y)) => Some(x.cmp(y)),
                _ => a.num().partial_cmp(&b.num()),
            };
            Val::Bool(ord.is_some_and(|o| match op {
                Lt => o.is_lt(),
                Le => o.is_le(),
                Gt => o.is_gt(),
                _ => o.is_ge(),
            }))
        }
        And | Or => unreachable!("short-circuit operators are handled by the caller"),
    }
}

fn evaluator<'a>(law: &'a LawDef, s: &'a WorldState, action: Action) -> Eval<'a> {
    Eval {
        law,
        s,
        action,
        scope: Vec::new(),
        out: Effects::new(),
    }
}

/// Whether `law` is active on `(s, action)`.
pub fn eval_precondition(law: &LawDef, s: &WorldState, action: Action) -> bool {
    evaluator(law, s, action).expr(&law.when).truthy()
}

/// Runs the effect block, returning one distribution per written path.
pub fn eval_effect(law: &LawDef, s: &WorldState, action: Action) -> Result<Effects, EvalError> {
    let mut ev = evaluator(law, s, action);
    let effect = &law.effect;
    ev.block(effect)?;
    Ok(ev.out)
}
