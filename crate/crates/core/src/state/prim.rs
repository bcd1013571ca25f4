use std::fmt;

use serde_json::Value;

/// Primitive leaf value with exact equality.
///
/// Reals are held as integer millionths, the canonical rounding grid, so
/// they hash and compare exactly.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prim {
    Null,
    Bool(bool),
    Int(i64),
    Real(i64),
    Str(String),
}

impl Prim {
    pub fn real(x: f64) -> Option<Prim> {
        if x.is_finite() {
            Some(Prim::Real((x * 1e6).round() as i64))
        } else {
            None
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Prim::Int(i) => Some(*i as f64),
            Prim::Real(m) => Some(*m as f64 / 1e6),
            _ => None,
        }
    }

    /// Leaf conversion; `None` for containers.
    pub fn from_value(v: &Value) -> Option<Prim> {
        Some(match v {
            Value::Null => Prim::Null,
            Value::Bool(b) => Prim::Bool(*b),
            Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Prim::Int(i)
                } else if n.is_u64() {
                    Prim::Int(n.as_u64()? as i64)
                } else {
                    Prim::real(n.as_f64()?)?
                }
            }
            Value::String(s) => Prim::Str(s.clone()),
            _ => return None,
        })
    }

    pub fn to_value(&self) -> Value {
        match self {
            Prim::Null => Value::Null,
            Prim::Bool(b) => Value::Bool(*b),
            Prim::Int(i) => Value::from(*i),
            Prim::Real(m) => Value::from(*m as f64 / 1e6),
            Prim::Str(s) => Value::from(s.clone()),
        }
    }
}

impl fmt::Display for Prim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prim::Null => f.write_str("null"),
            Prim::Bool(b) => write!(f, "{b}"),
            Prim::Int(i) => write!(f, "{i}"),
            Prim::Real(_) => write!(f, "{:?}", self.as_f64().unwrap()),
            Prim::Str(s) => write!(f, "{s:?}"),
        }
    }
}
