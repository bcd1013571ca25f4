use std::path::{Path, PathBuf};

use serde::Deserialize;

use lawmix_core::error::{HarnessError, IoError, LawError, ModelError};

/// A failed command and its exit code.
#[derive(Debug)]
pub enum Failure {
    Parse(String),
    Numeric(String),
    Io(String),
    Args(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Io(_) => 4,
            Failure::Args(_) => 5,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Numeric(m) | Failure::Io(m) | Failure::Args(m) => m,
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io { .. } => Failure::Io(e.to_string()),
            IoError::Model(m) => m.into(),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<LawError> for Failure {
    fn from(e: LawError) -> Self {
        Failure::Parse(e.to_string())
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Config(_) => Failure::Args(e.to_string()),
            ModelError::Weights(_) => Failure::Parse(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::UnknownScenario(_) | HarnessError::UnknownMutator(_) | HarnessError::NotApplicable(_) => {
                Failure::Args(e.to_string())
            }
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

/// Defaults read from `--config`. Keys mirror the long flag names with
/// underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub width: Option<i32>,
    pub height: Option<i32>,
    pub out: Option<PathBuf>,
    pub data: Option<PathBuf>,
    pub laws: Option<Vec<PathBuf>>,
    pub corpus: Option<String>,
    pub weights: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub bundle: Option<PathBuf>,
    pub model: Option<String>,
    pub scenarios: Option<String>,
    pub scenario: Option<String>,
    pub distractors: Option<usize>,
    pub trials: Option<usize>,
    pub samples: Option<usize>,
    pub max_iter: Option<usize>,
    pub grad_tol: Option<f64>,
    pub memory: Option<usize>,
    pub l2: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub quiet: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
    }
}

/// Flag, else config value, else `None`.
pub fn pick<T: Clone>(flag: Option<T>, file: &Option<T>) -> Option<T> {
    flag.or_else(|| file.clone())
}

pub fn require<T>(v: Option<T>, what: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure::Args(format!("missing {what}")))
}
