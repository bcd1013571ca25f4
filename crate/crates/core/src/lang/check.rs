//! Static schema and type checker for parsed laws.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use crate::env::Action;
use crate::error::{LawError, LawErrorKind};
use crate::state::{Achievement, EntityKind, Item, Material};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ty {
    Int,
    Real,
    Bool,
    Str,
    Action,
    Entity(EntityKind),
}

impl Ty {
    pub fn is_numeric(self) -> bool {
        matches!(self, Ty::Int | Ty::Real)
    }

    fn name(self) -> String {
        match self {
            Ty::Int => "int".into(),
            Ty::Real => "real".into(),
            Ty::Bool => "bool".into(),
            Ty::Str => "string".into(),
            Ty::Action => "action".into(),
            Ty::Entity(k) => format!("entity<{k}>"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldInfo {
    pub ty: Ty,
    pub writable: bool,
}

const fn rw(ty: Ty) -> Option<FieldInfo> {
    Some(FieldInfo { ty, writable: true })
}

fn xy(rest: &[String]) -> Option<FieldInfo> {
    match rest {
        [c] if c == "x" || c == "y" => rw(Ty::Int),
        _ => None,
    }
}

/// Type of `player.<fields>`.
pub fn player_field(fields: &[String]) -> Option<FieldInfo> {
    let (head, rest) = fields.split_first()?;
    match head.as_str() {
        "position" | "facing" => xy(rest),
        "inventory" => match rest {
            [item] if Item::from_name(item).is_some() => rw(Ty::Int),
            _ => None,
        },
        "achievements" => match rest {
            [a] if Achievement::from_name(a).is_some() => rw(Ty::Int),
            _ => None,
        },
        "sleeping" if rest.is_empty() => rw(Ty::Bool),
        "removed" if rest.is_empty() => rw(Ty::Bool),
        "thirst" | "hunger" | "fatigue" | "recover" if rest.is_empty() => rw(Ty::Real),
        "action" if rest.is_empty() => rw(Ty::Str),
        _ => None,
    }
}

/// Type of `<entity of kind>.<fields>`.
pub fn entity_field(kind: EntityKind, fields: &[String]) -> Option<FieldInfo> {
    if kind == EntityKind::Player {
        return player_field(fields);
    }
    let (head, rest) = fields.split_first()?;
    match (head.as_str(), kind) {
        ("position", _) => xy(rest),
        ("health", _) if rest.is_empty() => rw(Ty::Int),
        ("removed", _) if rest.is_empty() => rw(Ty::Bool),
        ("cooldown", EntityKind::Zombie) if rest.is_empty() => rw(Ty::Int),
        ("reload", EntityKind::Skeleton) if rest.is_empty() => rw(Ty::Int),
        ("facing", EntityKind::Arrow) => xy(rest),
        ("grown", EntityKind::Plant) if rest.is_empty() => rw(Ty::Int),
        ("ripe", EntityKind::Plant) if rest.is_empty() => rw(Ty::Bool),
        _ => None,
    }
}

/// Type of `world.<fields>`.
pub fn world_field(fields: &[String]) -> Option<FieldInfo> {
    match fields {
        [f] if f == "daylight" => rw(Ty::Real),
        [f] if f == "step_count" => rw(Ty::Int),
        [f] if f == "width" || f == "height" => Some(FieldInfo {
            ty: Ty::Int,
            writable: false,
        }),
        _ => None,
    }
}

#[derive(Clone, Copy, Debug)]
enum Binding {
    Value(Ty),
    Entity(EntityKind),
}

struct Checker<'a> {
    params: HashMap<&'a str, Ty>,
    scopes: Vec<HashMap<String, Binding>>,
}

fn err(kind: LawErrorKind, span: Span, message: impl Into<String>) -> LawError {
    LawError {
        kind,
        message: message.into(),
        line: span.line,
        column: span.column,
        file: None,
    }
}

fn type_err(span: Span, message: impl Into<String>) -> LawError {
    err(LawErrorKind::Type, span, message)
}

impl<'a> Checker<'a> {
    fn lookup(&self, name: &str) -> Option<Binding> {
        for scope in self.scopes.iter().rev() {
            if let Some(b) = scope.get(name) {
                return Some(*b);
            }
        }
        self.params.get(name).map(|t| Binding::Value(*t))
    }

    fn bind(&mut self, name: &str, b: Binding) {
        self.scopes
            .last_mut()
            .expect("a scope is always open")
            .insert(name.to_string(), b);
    }

    /// Resolves a dotted path to its type; `Err` names the path.
    fn path(&self, path: &[String], span: Span) -> Result<(Ty, bool), LawError> {
        let unknown = || {
            err(
                LawErrorKind::UnknownPath,
                span,
                format!("unknown path `{}`", path.join(".")),
            )
        };
        let (root, rest) = path.split_first().ok_or_else(unknown)?;
        if rest.iter().any(|f| f == "entity_id") {
            return Err(err(
                LawErrorKind::UnknownPath,
                span,
                format!("`{}`: laws may not address entity ids", path.join(".")),
            ));
        }
        let info = match root.as_str() {
            "player" if rest.is_empty() => return Ok((Ty::Entity(EntityKind::Player), false)),
            "player" => player_field(rest),
            "world" => world_field(rest),
            _ => match self.lookup(root) {
                Some(Binding::Entity(k)) if rest.is_empty() => return Ok((Ty::Entity(k), false)),
                Some(Binding::Entity(k)) => entity_field(k, rest),
                Some(Binding::Value(t)) if rest.is_empty() => return Ok((t, false)),
                _ => None,
            },
        };
        info.map(|i| (i.ty, i.writable)).ok_or_else(unknown)
    }

    fn kind_arg(&self, e: &Expr) -> Result<EntityKind, LawError> {
        if let ExprKind::Path(p) = &e.kind {
            if let [name] = p.as_slice() {
                if let Some(k) = EntityKind::from_name(name).filter(|k| *k != EntityKind::Player) {
                    return Ok(k);
                }
            }
        }
        Err(err(LawErrorKind::UnknownName, e.span, "expected an NPC entity kind"))
    }

    fn expect(&mut self, e: &Expr, want: Ty) -> Result<(), LawError> {
        let got = self.expr(e)?;
        if got == want || (want == Ty::Real && got == Ty::Int) || (want == Ty::Str && got == Ty::Action) {
            Ok(())
        } else {
            Err(type_err(
                e.span,
                format!("expected {}, found {}", want.name(), got.name()),
            ))
        }
    }

    fn numeric(&mut self, e: &Expr) -> Result<Ty, LawError> {
        let t = self.expr(e)?;
        if t.is_numeric() {
            Ok(t)
        } else {
            Err(type_err(e.span, format!("expected a number, found {}", t.name())))
        }
    }

    fn entity(&mut self, e: &Expr) -> Result<EntityKind, LawError> {
        match self.expr(e)? {
            Ty::Entity(k) => Ok(k),
            t => Err(type_err(e.span, format!("expected an entity, found {}", t.name()))),
        }
    }

    fn call(&mut self, name: &str, args: &[Expr], span: Span) -> Result<Ty, LawError> {
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(type_err(span, format!("`{name}` takes {n} argument(s), got {}", args.len())))
            }
        };
        match name {
            "sign" => {
                arity(1)?;
                self.numeric(&args[0])?;
                Ok(Ty::Int)
            }
            "abs" => {
                arity(1)?;
                self.numeric(&args[0])
            }
            "min" | "max" => {
                arity(2)?;
                let a = self.numeric(&args[0])?;
                let b = self.numeric(&args[1])?;
                Ok(if a == Ty::Int && b == Ty::Int { Ty::Int } else { Ty::Real })
            }
            "select" => {
                arity(3)?;
                self.expect(&args[0], Ty::Bool)?;
                let a = self.expr(&args[1])?;
                let b = self.expr(&args[2])?;
                if a.is_numeric() && b.is_numeric() {
                    Ok(if a == Ty::Int && b == Ty::Int { Ty::Int } else { Ty::Real })
                } else if a == b && !matches!(a, Ty::Entity(_)) {
                    Ok(a)
                } else {
                    Err(type_err(span, format!("`select` branches differ: {} and {}", a.name(), b.name())))
                }
            }
            "exists" | "count" => {
                arity(1)?;
                self.kind_arg(&args[0])?;
                Ok(if name == "exists" { Ty::Bool } else { Ty::Int })
            }
            "target_material" | "target_entity_kind" => {
                arity(0)?;
                Ok(Ty::Str)
            }
            "in_update_range" | "adjacent" | "is_target" => {
                arity(1)?;
                self.entity(&args[0])?;
                Ok(Ty::Bool)
            }
            "dx" | "dy" => {
                arity(2)?;
                self.entity(&args[0])?;
                self.entity(&args[1])?;
                Ok(Ty::Int)
            }
            "nearby" => {
                arity(1)?;
                match &args[0].kind {
                    ExprKind::Str(m) if Material::from_name(m).is_some() => Ok(Ty::Bool),
                    _ => Err(err(
                        LawErrorKind::UnknownName,
                        args[0].span,
                        "`nearby` takes a material name literal",
                    )),
                }
            }
            "material_at" | "walkable" | "occupied" | "in_bounds" => {
                arity(2)?;
                self.expect(&args[0], Ty::Int)?;
                self.expect(&args[1], Ty::Int)?;
                Ok(if name == "material_at" { Ty::Str } else { Ty::Bool })
            }
            _ => Err(err(LawErrorKind::UnknownName, span, format!("unknown function `{name}`"))),
        }
    }

    fn check_literal_names(&self, a: &Expr, b: &Expr) -> Result<(), LawError> {
        for (lhs, rhs) in [(a, b), (b, a)] {
            let ExprKind::Str(text) = &rhs.kind else { continue };
            let ok = match &lhs.kind {
                ExprKind::Action => Action::from_name(text).is_some(),
                ExprKind::Call(f, _) if f == "target_material" || f == "material_at" => {
                    text == "none" || Material::from_name(text).is_some()
                }
                ExprKind::Call(f, _) if f == "target_entity_kind" => {
                    text == "none" || EntityKind::from_name(text).is_some()
                }
                ExprKind::Path(p) if p.len() == 2 && p[0] == "player" && p[1] == "action" => {
                    Action::from_name(text).is_some()
                }
                _ => true,
            };
            if !ok {
                return Err(err(
                    LawErrorKind::UnknownName,
                    rhs.span,
                    format!("`{text}` is not a valid name here"),
                ));
            }
        }
        Ok(())
    }

    fn expr(&mut self, e: &Expr) -> Result<Ty, LawError> {
        match &e.kind {
            ExprKind::Int(_) => Ok(Ty::Int),
            ExprKind::Real(_) => Ok(Ty::Real),
            ExprKind::Bool(_) => Ok(Ty::Bool),
            ExprKind::Str(_) => Ok(Ty::Str),
            ExprKind::Action => Ok(Ty::Action),
            ExprKind::Path(p) => self.path(p, e.span).map(|(t, _)| t),
            ExprKind::Unary(UnOp::Neg, inner) => self.numeric(inner),
            ExprKind::Unary(UnOp::Not, inner) => {
                self.expect(inner, Ty::Bool)?;
                Ok(Ty::Bool)
            }
            ExprKind::Binary(op, a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                let mismatch = || {
                    type_err(
                        e.span,
                        format!("`{}` cannot combine {} and {}", op.symbol(), ta.name(), tb.name()),
                    )
                };
                match op {
                    BinOp::And | BinOp::Or => {
                        if ta == Ty::Bool && tb == Ty::Bool {
                            Ok(Ty::Bool)
                        } else {
                            Err(mismatch())
                        }
                    }
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        if !(ta.is_numeric() && tb.is_numeric()) {
                            Err(mismatch())
                        } else if *op == BinOp::Div || ta == Ty::Real || tb == Ty::Real {
                            Ok(Ty::Real)
                        } else {
                            Ok(Ty::Int)
                        }
                    }
                    BinOp::Eq | BinOp::Ne => {
                        let ok = (ta.is_numeric() && tb.is_numeric())
                            || (ta == tb && matches!(ta, Ty::Bool | Ty::Str))
                            || matches!((ta, tb), (Ty::Action, Ty::Str) | (Ty::Str, Ty::Action));
                        if !ok {
                            return Err(mismatch());
                        }
                        if matches!((ta, tb), (Ty::Action, Ty::Str) | (Ty::Str, Ty::Action))
                            && !matches!((&a.kind, &b.kind), (ExprKind::Str(_), _) | (_, ExprKind::Str(_)))
                        {
                            return Err(type_err(e.span, "actions compare only with string literals"));
                        }
                        self.check_literal_names(a, b)?;
                        Ok(Ty::Bool)
                    }
                    _ => {
                        if ta.is_numeric() && tb.is_numeric() {
                            Ok(Ty::Bool)
                        } else {
                            Err(mismatch())
                        }
                    }
                }
            }
            ExprKind::Call(name, args) => self.call(name, args, e.span),
            ExprKind::CountWhere { var, kind, filter } => {
                self.scopes.push(HashMap::new());
                self.bind(var, Binding::Entity(*kind));
                let r = self.expect(filter, Ty::Bool);
                self.scopes.pop();
                r?;
                Ok(Ty::Int)
            }
        }
    }

    fn block(&mut self, b: &Block) -> Result<(), LawError> {
        self.scopes.push(HashMap::new());
        let r = b.0.iter().try_for_each(|s| self.stmt(s));
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), LawError> {
        match s {
            Stmt::Assign {
                target,
                support,
                span,
            } => {
                let (ty, writable) = self.path(target, *span)?;
                if !writable {
                    return Err(err(
                        LawErrorKind::UnknownPath,
                        *span,
                        format!("`{}` is not an assignable state path", target.join(".")),
                    ));
                }
                for elem in support {
                    self.expect(&elem.value, ty)?;
                    if let Some(g) = &elem.guard {
                        self.expect(g, Ty::Bool)?;
                    }
                }
                Ok(())
            }
            Stmt::Let { name, value, .. } => {
                let t = self.expr(value)?;
                let b = match t {
                    Ty::Entity(k) => Binding::Entity(k),
                    t => Binding::Value(t),
                };
                self.bind(name, b);
                Ok(())
            }
            Stmt::If {
                cond,
                then,
                otherwise,
                ..
            } => {
                self.expect(cond, Ty::Bool)?;
                self.block(then)?;
                if let Some(o) = otherwise {
                    self.block(o)?;
                }
                Ok(())
            }
            Stmt::For {
                var,
                kind,
                filter,
                body,
                ..
            } => {
                self.scopes.push(HashMap::new());
                self.bind(var, Binding::Entity(*kind));
                let r = (|| {
                    if let Some(f) = filter {
                        self.expect(f, Ty::Bool)?;
                    }
                    self.block(body)
                })();
                self.scopes.pop();
                r
            }
            Stmt::SetFacingMaterial { .. } => Ok(()),
            Stmt::SetMaterial { x, y, .. } => {
                self.expect(x, Ty::Int)?;
                self.expect(y, Ty::Int)
            }
        }
    }
}

/// Type-checks one law against the state schema.
pub fn check_law(law: &LawDef) -> Result<(), LawError> {
    let mut params = HashMap::new();
    for (name, lit) in &law.params {
        let ty = match lit {
            Literal::Int(_) => Ty::Int,
            Literal::Real(_) => Ty::Real,
        };
        if params.insert(name.as_str(), ty).is_some() {
            return Err(err(
                LawErrorKind::DuplicateName,
                law.span,
                format!("law `{}`: parameter `{name}` defined twice", law.name),
            ));
        }
    }
    let mut c = Checker {
        params,
        scopes: vec![HashMap::new()],
    };
    c.expect(&law.when, Ty::Bool)?;
    c.block(&law.effect)
}

pub fn check_library(laws: &[LawDef]) -> Result<(), LawError> {
    let mut seen = BTreeSet::new();
    for law in laws {
        if !seen.insert(law.name.as_str()) {
            return Err(err(
                LawErrorKind::DuplicateName,
                law.span,
                format!("law `{}` is defined more than once", law.name),
            ));
        }
        check_law(law)?;
    }
    Ok(())
}
