use super::ast::*;
use super::lexer::{syntax_error, tokenize, Tok, Token};
use crate::error::{LawError, LawErrorKind};
use crate::state::{EntityKind, Material};

pub const KEYWORDS: &[&str] = &[
    "law", "params", "when", "effect", "let", "if", "else", "for", "in", "entities", "where",
    "dist", "true", "false", "action", "set_facing_material", "set_material",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, LawError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Real(r) => format!("`{r}`"),
            Tok::Str(s) => format!("{s:?}"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        Err(syntax_error(
            self.span(),
            format!("expected {wanted}, found {}", Self::describe(self.peek())),
        ))
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(t) if *t == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Span> {
        if self.is_sym(s) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<Span> {
        if self.is_kw(k) {
            Ok(self.bump().span)
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn binder(&mut self) -> PResult<(String, Span)> {
        let (name, span) = self.ident()?;
        if KEYWORDS.contains(&name.as_str()) || name == "player" || name == "world" {
            return Err(syntax_error(span, format!("`{name}` is reserved")));
        }
        Ok((name, span))
    }

    fn string(&mut self) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Str(s) => {
                let span = self.bump().span;
                Ok((s, span))
            }
            _ => self.unexpected("a string"),
        }
    }

    fn kind(&mut self) -> PResult<EntityKind> {
        let (name, span) = self.ident()?;
        match EntityKind::from_name(&name) {
            Some(EntityKind::Player) | None => Err(LawError {
                kind: LawErrorKind::UnknownName,
                message: format!("`{name}` is not an NPC entity kind"),
                line: span.line,
                column: span.column,
                file: None,
            }),
            Some(k) => Ok(k),
        }
    }

    fn material(&mut self) -> PResult<Material> {
        let (name, span) = self.string()?;
        Material::from_name(&name).ok_or_else(|| LawError {
            kind: LawErrorKind::UnknownName,
            message: format!("unknown material `{name}`"),
            line: span.line,
            column: span.column,
            file: None,
        })
    }

    fn law(&mut self) -> PResult<LawDef> {
        let span = self.expect_kw("law")?;
        let (name, _) = self.ident()?;
        self.expect_sym("{")?;
        let mut params = Vec::new();
        if self.is_kw("params") {
            self.bump();
            self.expect_sym(":")?;
            self.expect_sym("{")?;
            while !self.is_sym("}") {
                let (pname, _) = self.binder()?;
                self.expect_sym("=")?;
                let neg = self.eat_sym("-");
                let lit = match self.peek().clone() {
                    Tok::Int(i) => Literal::Int(if neg { -i } else { i }),
                    Tok::Real(r) => Literal::Real(if neg { -r } else { r }),
                    _ => return self.unexpected("a number"),
                };
                self.bump();
                params.push((pname, lit));
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("}")?;
        }
        self.expect_kw("when")?;
        self.expect_sym(":")?;
        let when = self.expr()?;
        self.expect_kw("effect")?;
        self.expect_sym(":")?;
        let effect = self.block()?;
        self.expect_sym("}")?;
        Ok(LawDef {
            name,
            params,
            when,
            effect,
            span,
        })
    }

    fn block(&mut self) -> PResult<Block> {
        self.expect_sym("{")?;
        let mut stmts = Vec::new();
        while !self.is_sym("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.unexpected("`}`");
            }
            stmts.push(self.stmt()?);
        }
        self.bump();
        Ok(Block(stmts))
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        if self.is_kw("let") {
            self.bump();
            let (name, _) = self.binder()?;
            self.expect_sym("=")?;
            let value = self.expr()?;
            return Ok(Stmt::Let { name, value, span });
        }
        if self.is_kw("if") {
            return self.if_stmt();
        }
        if self.is_kw("for") {
            self.bump();
            let (var, _) = self.binder()?;
            self.expect_kw("in")?;
            self.expect_kw("entities")?;
            self.expect_sym("(")?;
            let kind = self.kind()?;
            self.expect_sym(")")?;
            let filter = if self.is_kw("where") {
                self.bump();
                Some(self.expr()?)
            } else {
                None
            };
            let body = self.block()?;
            return Ok(Stmt::For {
                var,
                kind,
                filter,
                body,
                span,
            });
        }
        if self.is_kw("set_facing_material") {
            self.bump();
            self.expect_sym("(")?;
            let material = self.material()?;
            self.expect_sym(")")?;
            return Ok(Stmt::SetFacingMaterial { material, span });
        }
        if self.is_kw("set_material") {
            self.bump();
            self.expect_sym("(")?;
            let x = self.expr()?;
            self.expect_sym(",")?;
            let y = self.expr()?;
            self.expect_sym(",")?;
            let material = self.material()?;
            self.expect_sym(")")?;
            return Ok(Stmt::SetMaterial { x, y, material, span });
        }
        let mut target = vec![self.ident()?.0];
        while self.eat_sym(".") {
            target.push(self.ident()?.0);
        }
        self.expect_sym("<-")?;
        self.expect_kw("dist")?;
        self.expect_sym("[")?;
        let mut support = Vec::new();
        while !self.is_sym("]") {
            let value = self.expr()?;
            let guard = if self.is_kw("if") {
                self.bump();
                Some(self.expr()?)
            } else {
                None
            };
            support.push(DistElem { value, guard });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym("]")?;
        if support.is_empty() {
            return Err(syntax_error(span, "a distribution needs at least one value"));
        }
        Ok(Stmt::Assign {
            target,
            support,
            span,
        })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let span = self.expect_kw("if")?;
        let cond = self.expr()?;
        let then = self.block()?;
        let otherwise = if self.is_kw("else") {
            self.bump();
            if self.is_kw("if") {
                Some(Block(vec![self.if_stmt()?]))
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt::If {
            cond,
            then,
            otherwise,
            span,
        })
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.or()
    }

    fn binary_level(
        &mut self,
        ops: &[(&str, BinOp)],
        next: fn(&mut Self) -> PResult<Expr>,
    ) -> PResult<Expr> {
        let mut lhs = next(self)?;
        'outer: loop {
            for (sym, op) in ops {
                if self.is_sym(sym) {
                    let span = self.bump().span;
                    let rhs = next(self)?;
                    lhs = Expr::new(ExprKind::Binary(*op, Box::new(lhs), Box::new(rhs)), span);
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn or(&mut self) -> PResult<Expr> {
        self.binary_level(&[("||", BinOp::Or)], Self::and)
    }

    fn and(&mut self) -> PResult<Expr> {
        self.binary_level(&[("&&", BinOp::And)], Self::not)
    }

    fn not(&mut self) -> PResult<Expr> {
        if self.is_sym("!") {
            let span = self.bump().span;
            let inner = self.not()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Not, Box::new(inner)), span));
        }
        self.cmp()
    }

    fn cmp(&mut self) -> PResult<Expr> {
        let lhs = self.add()?;
        const OPS: [(&str, BinOp); 6] = [
            ("==", BinOp::Eq),
            ("!=", BinOp::Ne),
            ("<=", BinOp::Le),
            (">=", BinOp::Ge),
            ("<", BinOp::Lt),
            (">", BinOp::Gt),
        ];
        for (sym, op) in OPS {
            if self.is_sym(sym) {
                let span = self.bump().span;
                let rhs = self.add()?;
                return Ok(Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span));
            }
        }
        Ok(lhs)
    }

    fn add(&mut self) -> PResult<Expr> {
        self.binary_level(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::mul)
    }

    fn mul(&mut self) -> PResult<Expr> {
        self.binary_level(&[("*", BinOp::Mul), ("/", BinOp::Div)], Self::unary)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.is_sym("-") {
            let span = self.bump().span;
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Unary(UnOp::Neg, Box::new(inner)), span));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::new(ExprKind::Int(i), span))
            }
            Tok::Real(r) => {
                self.bump();
                Ok(Expr::new(ExprKind::Real(r), span))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::new(ExprKind::Str(s), span))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "true" => return Ok(Expr::new(ExprKind::Bool(true), span)),
                    "false" => return Ok(Expr::new(ExprKind::Bool(false), span)),
                    "action" => return Ok(Expr::new(ExprKind::Action, span)),
                    _ => {}
                }
                if self.is_sym("(") {
                    self.bump();
                    if name == "count" && matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Ident(k)) if k == "in")
                    {
                        let (var, _) = self.binder()?;
                        self.expect_kw("in")?;
                        let kind = self.kind()?;
                        self.expect_kw("where")?;
                        let filter = self.expr()?;
                        self.expect_sym(")")?;
                        return Ok(Expr::new(
                            ExprKind::CountWhere {
                                var,
                                kind,
                                filter: Box::new(filter),
                            },
                            span,
                        ));
                    }
                    let mut args = Vec::new();
                    while !self.is_sym(")") {
                        args.push(self.expr()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym(")")?;
                    return Ok(Expr::new(ExprKind::Call(name, args), span));
                }
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(syntax_error(span, format!("unexpected keyword `{name}`")));
                }
                let mut path = vec![name];
                while self.eat_sym(".") {
                    path.push(self.ident()?.0);
                }
                Ok(Expr::new(ExprKind::Path(path), span))
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Syntax-only parse of a law source file.
pub fn parse_source(src: &str) -> Result<Vec<LawDef>, LawError> {
    let mut p = Parser {
        toks: tokenize(src)?,
        pos: 0,
    };
    let mut laws = Vec::new();
    while !matches!(p.peek(), Tok::Eof) {
        laws.push(p.law()?);
    }
    Ok(laws)
}
