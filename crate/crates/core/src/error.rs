use std::fmt;

use thiserror::Error;

use crate::state::WorldState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("state invariant violated: {}", .0.join("; "))]
    Invariant(Vec<String>),
    #[error("malformed state document: {0}")]
    Schema(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatchError {
    #[error("{0}: add/replace without a value")]
    MissingValue(String),
    #[error("{0}: add targets an existing leaf")]
    AlreadyPresent(String),
    #[error("{0}: no such leaf")]
    Missing(String),
    #[error("{0}: leaf conflicts with a container")]
    Conflict(String),
    #[error("{0}: array index leaves a gap")]
    SparseArray(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("world size {0}x{1} is below the 7x7 minimum")]
    SizeTooSmall(i32, i32),
    #[error("position ({0}, {1}) is out of bounds")]
    OutOfBounds(i32, i32),
    #[error("unknown material `{0}`")]
    UnknownMaterial(String),
    #[error("unknown entity kind `{0}`")]
    UnknownKind(String),
    #[error("unknown action `{0}`")]
    UnknownAction(String),
    #[error("unknown item `{0}`")]
    UnknownItem(String),
    #[error("tile ({0}, {1}) is occupied")]
    Occupied(i32, i32),
    #[error("no entity with id {0}")]
    UnknownEntity(u32),
    #[error("negative count {1} for `{0}`")]
    NegativeCount(String, i32),
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("facing must be a unit cardinal step, got ({0}, {1})")]
    InvalidDirection(i32, i32),
    #[error("the player cannot be removed")]
    RemovePlayer,
    #[error("daylight {0} outside [0, 1]")]
    Daylight(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LawErrorKind {
    Syntax,
    UnknownPath,
    Type,
    DuplicateName,
    UnknownName,
}

impl LawErrorKind {
    pub fn label(self) -> &'static str {
        match self {
            LawErrorKind::Syntax => "syntax error",
            LawErrorKind::UnknownPath => "unknown path",
            LawErrorKind::Type => "type error",
            LawErrorKind::DuplicateName => "duplicate name",
            LawErrorKind::UnknownName => "unknown name",
        }
    }
}

/// Parse or type-check failure with a 1-based source location.
#[derive(Debug, Error, Clone, PartialEq)]
pub struct LawError {
    pub kind: LawErrorKind,
    pub message: String,
    pub line: usize,
    pub column: usize,
    pub file: Option<String>,
}

impl fmt::Display for LawError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{file}:")?;
        }
        write!(
            f,
            "{}:{}: {}: {}",
            self.line,
            self.column,
            self.kind.label(),
            self.message
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("law `{law}`: {message}")]
pub struct EvalError {
    pub law: String,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("schema mismatch at {}", .0.join(", "))]
    SchemaMismatch(Vec<String>),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("invalid model configuration: {0}")]
    Config(String),
    #[error("weights: {0}")]
    Weights(String),
    #[error("empty dataset: nothing to fit")]
    EmptyDataset,
    /// The sampled state breaks a structural invariant; it is kept so the
    /// caller can decide what to do with it.
    #[error("sampled state is invalid: {}", .violations.join("; "))]
    InvalidSample {
        state: Box<WorldState>,
        violations: Vec<String>,
    },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReconstructError {
    #[error("sampled path `{0}` is not in the state schema")]
    UnknownPath(String),
    #[error(transparent)]
    State(#[from] StateError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("unknown mutator `{0}`")]
    UnknownMutator(String),
    #[error("mutator `{0}` does not apply to this transition")]
    NotApplicable(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("scenario `{scenario}` step {step}: {message}")]
    Scenario {
        scenario: String,
        step: usize,
        message: String,
    },
    #[error("nothing to aggregate")]
    EmptyAggregate,
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Json {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Law(#[from] LawError),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{path}: {message}")]
    Bundle { path: String, message: String },
}
