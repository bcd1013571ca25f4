use super::ast::Span;
use crate::error::{LawError, LawErrorKind};

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

const SYMBOLS: &[&str] = &[
    "<-", "==", "!=", "<=", ">=", "&&", "||", "{", "}", "(", ")", "[", "]", ",", ":", ".", "=",
    "<", ">", "+", "-", "*", "/", "!",
];

pub fn syntax_error(span: Span, message: impl Into<String>) -> LawError {
    LawError {
        kind: LawErrorKind::Syntax,
        message: message.into(),
        line: span.line,
        column: span.column,
        file: None,
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LawError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize| {
        let c = chars[*i];
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, column: col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col);
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let mut real = false;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col);
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                real = true;
                advance(&mut i, &mut line, &mut col);
                while i < chars.len() && chars[i].is_ascii_digit() {
                    advance(&mut i, &mut line, &mut col);
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '-' || chars[j] == '+') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    real = true;
                    while i < j {
                        advance(&mut i, &mut line, &mut col);
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        advance(&mut i, &mut line, &mut col);
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let tok = if real {
                Tok::Real(
                    text.parse()
                        .map_err(|_| syntax_error(span, format!("bad number `{text}`")))?,
                )
            } else {
                Tok::Int(
                    text.parse()
                        .map_err(|_| syntax_error(span, format!("integer `{text}` out of range")))?,
                )
            };
            out.push(Token { tok, span });
            continue;
        }
        if c == '"' {
            advance(&mut i, &mut line, &mut col);
            let mut text = String::new();
            loop {
                let Some(&d) = chars.get(i) else {
                    return Err(syntax_error(span, "unterminated string"));
                };
                advance(&mut i, &mut line, &mut col);
                match d {
                    '"' => break,
                    '\\' => {
                        let Some(&e) = chars.get(i) else {
                            return Err(syntax_error(span, "unterminated string"));
                        };
                        advance(&mut i, &mut line, &mut col);
                        match e {
                            '"' | '\\' => text.push(e),
                            'n' => text.push('\n'),
                            _ => return Err(syntax_error(span, format!("unknown escape `\\{e}`"))),
                        }
                    }
                    '\n' => return Err(syntax_error(span, "newline in string")),
                    _ => text.push(d),
                }
            }
            out.push(Token { tok: Tok::Str(text), span });
            continue;
        }
        let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
        let Some(sym) = SYMBOLS.iter().find(|s| rest.starts_with(**s)) else {
            return Err(syntax_error(span, format!("unexpected character `{c}`")));
        };
        for _ in sym.chars() {
            advance(&mut i, &mut line, &mut col);
        }
        out.push(Token { tok: Tok::Sym(sym), span });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, column: col },
    });
    Ok(out)
}
