//! Law DSL: a small typed language of preconditions and distributional
//! effects over world-state paths.
//!
//! ```text
//! law collect_wood {
//!     when: action == "do" && target_material() == "tree"
//!     effect: {
//!         player.inventory.wood <- dist[min(player.inventory.wood + 1, 9)]
//!     }
//! }
//! ```

pub mod ast;
pub mod check;
mod eval;
pub mod lexer;
pub mod lint;
mod parser;
pub mod pretty;

pub use ast::LawDef;
pub use check::Ty;
pub use eval::{eval_effect, eval_precondition, Dist, Effects};
pub use parser::KEYWORDS;

use crate::error::{LawError, LawErrorKind};

/// EBNF of the law language.
pub const GRAMMAR: &str = include_str!("grammar.ebnf");

/// Parses and type-checks a law source.
pub fn parse_laws(src: &str) -> Result<Vec<LawDef>, LawError> {
    let laws = parser::parse_source(src)?;
    check::check_library(&laws)?;
    Ok(laws)
}

/// Ordered, name-unique collection of checked laws.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LawLibrary {
    laws: Vec<LawDef>,
}

impl LawLibrary {
    pub fn parse(src: &str) -> Result<Self, LawError> {
        Ok(Self {
            laws: parse_laws(src)?,
        })
    }

    /// Like [`LawLibrary::parse`], tagging errors with `file`.
    pub fn parse_named(file: &str, src: &str) -> Result<Self, LawError> {
        Self::parse(src).map_err(|mut e| {
            e.file = Some(file.to_string());
            e
        })
    }

    pub fn from_laws(laws: Vec<LawDef>) -> Result<Self, LawError> {
        check::check_library(&laws)?;
        Ok(Self { laws })
    }

    /// Appends `other`, rejecting names already present.
    pub fn merge(mut self, other: LawLibrary) -> Result<Self, LawError> {
        for law in other.laws {
            if self.get(&law.name).is_some() {
                return Err(LawError {
                    kind: LawErrorKind::DuplicateName,
                    message: format!("law `{}` is defined more than once", law.name),
                    line: law.span.line,
                    column: law.span.column,
                    file: None,
                });
            }
            self.laws.push(law);
        }
        Ok(self)
    }

    pub fn laws(&self) -> &[LawDef] {
        &self.laws
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.laws.iter().map(|l| l.name.as_str()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&LawDef> {
        self.laws.iter().find(|l| l.name == name)
    }

    pub fn to_source(&self) -> String {
        pretty::laws(&self.laws)
    }

    pub fn lint(&self) -> Vec<String> {
        lint::lint(&self.laws)
    }
}
