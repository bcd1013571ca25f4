//! Source printer. Output re-parses to a structurally equal tree.

use std::fmt::Write;

use super::ast::*;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn real(r: f64) -> String {
    format!("{r:?}")
}

fn operand(e: &Expr) -> String {
    match e.kind {
        ExprKind::Binary(..) | ExprKind::Unary(UnOp::Not, _) => format!("({})", expr(e)),
        _ => expr(e),
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(i) => i.to_string(),
        ExprKind::Real(r) => real(*r),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Str(s) => quote(s),
        ExprKind::Action => "action".to_string(),
        ExprKind::Path(p) => p.join("."),
        ExprKind::Unary(UnOp::Neg, inner) => format!("-{}", operand(inner)),
        ExprKind::Unary(UnOp::Not, inner) => format!("!{}", operand(inner)),
        ExprKind::Binary(op, a, b) => format!("{} {} {}", operand(a), op.symbol(), operand(b)),
        ExprKind::Call(name, args) => {
            let args: Vec<String> = args.iter().map(expr).collect();
            format!("{name}({})", args.join(", "))
        }
        ExprKind::CountWhere { var, kind, filter } => {
            format!("count({var} in {kind} where {})", expr(filter))
        }
    }
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn block(out: &mut String, b: &Block, depth: usize) {
    out.push_str("{\n");
    for s in &b.0 {
        stmt(out, s, depth + 1);
    }
    indent(out, depth);
    out.push('}');
}

fn if_chain(out: &mut String, cond: &Expr, then: &Block, otherwise: &Option<Block>, depth: usize) {
    write!(out, "if {} ", expr(cond)).unwrap();
    block(out, then, depth);
    match otherwise {
        None => {}
        Some(Block(stmts)) => match stmts.as_slice() {
            [Stmt::If {
                cond,
                then,
                otherwise,
                ..
            }] => {
                out.push_str(" else ");
                if_chain(out, cond, then, otherwise, depth);
            }
            _ => {
                out.push_str(" else ");
                block(out, &Block(stmts.clone()), depth);
            }
        },
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match s {
        Stmt::Assign { target, support, .. } => {
            let elems: Vec<String> = support
                .iter()
                .map(|d| match &d.guard {
                    Some(g) => format!("{} if {}", expr(&d.value), expr(g)),
                    None => expr(&d.value),
                })
                .collect();
            write!(out, "{} <- dist[{}]", target.join("."), elems.join(", ")).unwrap();
        }
        Stmt::Let { name, value, .. } => {
            write!(out, "let {name} = {}", expr(value)).unwrap();
        }
        Stmt::If {
            cond,
            then,
            otherwise,
            ..
        } => if_chain(out, cond, then, otherwise, depth),
        Stmt::For {
            var,
            kind,
            filter,
            body,
            ..
        } => {
            write!(out, "for {var} in entities({kind}) ").unwrap();
            if let Some(f) = filter {
                write!(out, "where {} ", expr(f)).unwrap();
            }
            block(out, body, depth);
        }
        Stmt::SetFacingMaterial { material, .. } => {
            write!(out, "set_facing_material({})", quote(material.name())).unwrap();
        }
        Stmt::SetMaterial { x, y, material, .. } => {
            write!(
                out,
                "set_material({}, {}, {})",
                expr(x),
                expr(y),
                quote(material.name())
            )
            .unwrap();
        }
    }
    out.push('\n');
}

/// Prints one law in canonical layout.
pub fn law(l: &LawDef) -> String {
    let mut out = format!("law {} {{\n", l.name);
    if !l.params.is_empty() {
        let ps: Vec<String> = l
            .params
            .iter()
            .map(|(n, v)| match v {
                Literal::Int(i) => format!("{n} = {i}"),
                Literal::Real(r) => format!("{n} = {}", real(*r)),
            })
            .collect();
        writeln!(out, "    params: {{ {} }}", ps.join(", ")).unwrap();
    }
    writeln!(out, "    when: {}", expr(&l.when)).unwrap();
    out.push_str("    effect: ");
    block(&mut out, &l.effect, 1);
    out.push_str("\n}\n");
    out
}

pub fn laws(ls: &[LawDef]) -> String {
    ls.iter().map(law).collect::<Vec<_>>().join("\n")
}
