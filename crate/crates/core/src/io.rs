//! On-disk formats. Trajectories are JSON lines of
//! `{"action", "next_state", "state"}` with canonical states; weights are a
//! JSON map from law name to weight; a bundle names law files and a weights
//! file relative to itself. Every JSON file ends with a newline.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::env::Action;
use crate::error::IoError;
use crate::inference::Transition;
use crate::lang::LawLibrary;
use crate::model::{MixtureModel, ModelConfig, DEFAULT_DELTA, DEFAULT_EPSILON};
use crate::state::{canonicalize, from_canonical, CanonicalDocument, WorldState};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn json_err(path: &Path, line: usize, message: impl ToString) -> IoError {
    IoError::Json {
        path: path.display().to_string(),
        line,
        message: message.to_string(),
    }
}

pub fn read_text(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(io_err(path))
}

/// Writes `text`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_text(path, &to_json(value))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| json_err(path, e.line(), e))
}

#[derive(Serialize, Deserialize)]
struct Record {
    action: String,
    next_state: Value,
    state: Value,
}

pub fn encode_transition(t: &Transition) -> String {
    let r = Record {
        action: t.action.name().to_string(),
        next_state: canonicalize(&t.next).into_value(),
        state: canonicalize(&t.state).into_value(),
    };
    serde_json::to_string(&r).expect("records serialize")
}

pub fn decode_transition(line: &str) -> Result<Transition, String> {
    let r: Record = serde_json::from_str(line).map_err(|e| e.to_string())?;
    let action = Action::from_name(&r.action).ok_or_else(|| format!("unknown action `{}`", r.action))?;
    let state = |v: Value| from_canonical(&CanonicalDocument::from_value(v)).map_err(|e| e.to_string());
    Ok(Transition {
        state: state(r.state)?,
        action,
        next: state(r.next_state)?,
    })
}

pub fn trajectory_text(data: &[Transition]) -> String {
    data.iter().map(|t| encode_transition(t) + "\n").collect()
}

pub fn write_trajectory(path: &Path, data: &[Transition]) -> Result<(), IoError> {
    write_text(path, &trajectory_text(data))
}

/// Blank lines are skipped; errors carry the 1-based line number.
pub fn read_trajectory(path: &Path) -> Result<Vec<Transition>, IoError> {
    let text = read_text(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| decode_transition(l).map_err(|m| json_err(path, i + 1, m)))
        .collect()
}

pub fn read_state(path: &Path) -> Result<WorldState, IoError> {
    let text = read_text(path)?;
    let doc = CanonicalDocument::parse(&text)?;
    Ok(from_canonical(&doc)?)
}

pub fn write_state(path: &Path, s: &WorldState) -> Result<(), IoError> {
    write_text(path, &(canonicalize(s).to_text() + "\n"))
}

/// Parses and merges law files in order; errors name the file.
pub fn load_laws<P: AsRef<Path>>(paths: &[P]) -> Result<LawLibrary, IoError> {
    let mut lib = LawLibrary::default();
    for p in paths {
        let p = p.as_ref();
        let src = read_text(p)?;
        lib = lib.merge(LawLibrary::parse_named(&p.display().to_string(), &src)?)?;
    }
    Ok(lib)
}

pub type WeightMap = BTreeMap<String, f64>;

pub fn write_weights(path: &Path, w: &WeightMap) -> Result<(), IoError> {
    write_json(path, w)
}

pub fn read_weights(path: &Path) -> Result<WeightMap, IoError> {
    read_json(path)
}

/// Everything needed to rebuild a fitted model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bundle {
    pub laws: Vec<String>,
    pub weights: Option<String>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

fn default_epsilon() -> f64 {
    DEFAULT_EPSILON
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let p = Path::new(p);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Builds a model from law files and an optional weights file.
pub fn build_model<P: AsRef<Path>>(
    laws: &[P],
    weights: Option<&Path>,
    config: ModelConfig<f64>,
) -> Result<MixtureModel<f64>, IoError> {
    let lib = load_laws(laws)?;
    let mut model = MixtureModel::new(lib).with_config(config)?;
    if let Some(w) = weights {
        model.set_weight_map(&read_weights(w)?)?;
    }
    Ok(model)
}

pub fn load_bundle(path: &Path) -> Result<MixtureModel<f64>, IoError> {
    let b: Bundle = read_json(path)?;
    if b.laws.is_empty() {
        return Err(IoError::Bundle {
            path: path.display().to_string(),
            message: "no law files listed".into(),
        });
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let laws: Vec<PathBuf> = b.laws.iter().map(|p| resolve(base, p)).collect();
    let weights = b.weights.as_deref().map(|w| resolve(base, w));
    build_model(
        &laws,
        weights.as_deref(),
        ModelConfig {
            epsilon: b.epsilon,
            delta: b.delta,
        },
    )
}
