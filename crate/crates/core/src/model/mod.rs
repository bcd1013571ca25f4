//! Weighted product-of-experts world model over law predictions.
//!
//! Each active law predicts a uniform distribution over a finite support
//! for some observable paths. For one path, law `i` contributes the expert
//!
//! ```text
//! phi_i(v) = (1 - eps) / |S_i|   if v in S_i
//!          = eps / |D|           otherwise
//! ```
//!
//! over the domain `D` (all supports plus the current value), and the path
//! distribution is `p(v) ∝ exp(sum_i theta_i ln phi_i(v))`. Paths no active
//! law touches persist with probability `1 - delta`.

mod observe;

use std::collections::BTreeMap;

use rand::Rng;

use crate::env::Action;
use crate::error::{ModelError, ReconstructError};
use crate::lang::{eval_effect, eval_precondition, Dist, LawLibrary};
use crate::scalar::{log_sum_exp, Scalar};
use crate::state::{Prim, WorldState};

pub use observe::{observables, path_string, reconstruct, Observables};

pub const DEFAULT_EPSILON: f64 = 1e-3;
pub const DEFAULT_DELTA: f64 = 1e-6;

/// Laws' predictions for one transition, grouped by path. Law indices are
/// ascending within each path.
pub type Prediction = BTreeMap<String, Vec<(usize, Dist)>>;

/// Domain and per-law log-expert values for one predicted path.
#[derive(Clone, Debug, PartialEq)]
pub struct PathFactors<T> {
    pub domain: Vec<Prim>,
    /// `(law index, ln phi(u) for u in domain)`.
    pub logs: Vec<(usize, Vec<T>)>,
}

impl<T: Scalar> PathFactors<T> {
    /// Builds the domain from the supports, `current`, and `extra` in that
    /// order, then tabulates every law's log expert over it.
    pub fn new(preds: &[(usize, Dist)], current: Option<&Prim>, extra: Option<&Prim>, epsilon: T) -> Self {
        let mut domain: Vec<Prim> = Vec::new();
        let mut push = |v: &Prim| {
            if !domain.contains(v) {
                domain.push(v.clone());
            }
        };
        for (_, d) in preds {
            d.support().iter().for_each(&mut push);
        }
        current.into_iter().chain(extra).for_each(&mut push);
        let off = (epsilon / T::count(domain.len())).ln();
        let logs = preds
            .iter()
            .map(|(i, d)| {
                let on = ((T::one() - epsilon) / T::count(d.len())).ln();
                let g = domain.iter().map(|u| if d.contains(u) { on } else { off }).collect();
                (*i, g)
            })
            .collect();
        Self { domain, logs }
    }

    pub fn index_of(&self, v: &Prim) -> Option<usize> {
        self.domain.iter().position(|u| u == v)
    }

    /// Unnormalized log scores under `weights`.
    pub fn scores(&self, weights: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.domain.len()];
        for (i, g) in &self.logs {
            let w = weights[*i];
            for (o, gi) in out.iter_mut().zip(g) {
                *o = *o + w * *gi;
            }
        }
        out
    }

    /// Normalized log probabilities over the domain.
    pub fn log_probs(&self, weights: &[T]) -> Vec<T> {
        let s = self.scores(weights);
        let z = log_sum_exp(&s);
        s.into_iter().map(|x| x - z).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig<T> {
    pub epsilon: T,
    pub delta: T,
}

impl<T: Scalar> Default for ModelConfig<T> {
    fn default() -> Self {
        Self {
            epsilon: T::lit(DEFAULT_EPSILON),
            delta: T::lit(DEFAULT_DELTA),
        }
    }
}

impl<T: Scalar> ModelConfig<T> {
    pub fn validate(&self) -> Result<(), ModelError> {
        let within = |x: T, hi: f64| x > T::zero() && x <= T::lit(hi);
        if !within(self.epsilon, 0.1) {
            return Err(ModelError::Config(format!("epsilon {} outside (0, 0.1]", self.epsilon)));
        }
        if !within(self.delta, 1e-3) {
            return Err(ModelError::Config(format!("delta {} outside (0, 0.001]", self.delta)));
        }
        Ok(())
    }
}

/// A law library with one real weight per law.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureModel<T> {
    laws: LawLibrary,
    weights: Vec<T>,
    config: ModelConfig<T>,
}

impl<T: Scalar> MixtureModel<T> {
    /// Every weight starts at 1.
    pub fn new(laws: LawLibrary) -> Self {
        let weights = vec![T::one(); laws.len()];
        Self {
            laws,
            weights,
            config: ModelConfig::default(),
        }
    }

    pub fn with_config(mut self, config: ModelConfig<T>) -> Result<Self, ModelError> {
        config.validate()?;
        self.config = config;
        Ok(self)
    }

    pub fn laws(&self) -> &LawLibrary {
        &self.laws
    }

    pub fn config(&self) -> ModelConfig<T> {
        self.config
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn set_weights(&mut self, weights: Vec<T>) -> Result<(), ModelError> {
        if weights.len() != self.laws.len() {
            return Err(ModelError::Weights(format!(
                "expected {} weights, got {}",
                self.laws.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite()) {
            return Err(ModelError::Weights(format!("non-finite weight {w}")));
        }
        self.weights = weights;
        Ok(())
    }

    /// Sets weights by law name. Unnamed laws keep their weight; unknown
    /// names are an error.
    pub fn set_weight_map(&mut self, map: &BTreeMap<String, f64>) -> Result<(), ModelError> {
        let mut w = self.weights.clone();
        for (name, v) in map {
            let i = self
                .laws
                .laws()
                .iter()
                .position(|l| &l.name == name)
                .ok_or_else(|| ModelError::Weights(format!("no law named `{name}`")))?;
            w[i] = T::from_f64(*v).ok_or_else(|| ModelError::Weights(format!("bad weight {v}")))?;
        }
        self.set_weights(w)
    }

    pub fn weight_map(&self) -> BTreeMap<String, f64> {
        self.laws
            .laws()
            .iter()
            .zip(&self.weights)
            .map(|(l, w)| (l.name.clone(), w.to_f64_lossy()))
            .collect()
    }

    /// Indices of laws whose precondition holds.
    pub fn active_laws(&self, s: &WorldState, a: Action) -> Vec<usize> {
        (0..self.laws.len())
            .filter(|&i| eval_precondition(&self.laws.laws()[i], s, a))
            .collect()
    }

    pub fn predict(&self, s: &WorldState, a: Action) -> Result<Prediction, ModelError> {
        predict(&self.laws, s, a)
    }

    /// Per-path log probabilities of `next`; predicted paths use the
    /// mixture, the rest the persistence default.
    pub fn path_log_probs(
        &self,
        s: &WorldState,
        a: Action,
        next: &WorldState,
    ) -> Result<BTreeMap<String, T>, ModelError> {
        let pred = self.predict(s, a)?;
        let before = observables(s);
        check_schema(&pred, &before)?;
        Ok(self.score_paths(&pred, &before, &observables(next)))
    }

    fn score_paths(&self, pred: &Prediction, before: &Observables, after: &Observables) -> BTreeMap<String, T> {
        let mut out = BTreeMap::new();
        for (path, preds) in pred {
            let observed = after.get(path).unwrap_or(&Prim::Null);
            let f = PathFactors::new(preds, before.get(path), Some(observed), self.config.epsilon);
            let lp = f.log_probs(&self.weights);
            out.insert(path.clone(), lp[f.index_of(observed).expect("observed value is in the domain")]);
        }
        let (stay, change) = persistence(self.config.delta);
        for path in before.keys().chain(after.keys()) {
            if out.contains_key(path) {
                continue;
            }
            let same = before.get(path).is_some() && before.get(path) == after.get(path);
            out.insert(path.clone(), if same { stay } else { change });
        }
        out
    }

    /// Log likelihood of each candidate, sharing one law evaluation.
    pub fn log_likelihood_batch(
        &self,
        s: &WorldState,
        a: Action,
        candidates: &[WorldState],
    ) -> Result<Vec<T>, ModelError> {
        let pred = self.predict(s, a)?;
        let before = observables(s);
        check_schema(&pred, &before)?;
        Ok(candidates
            .iter()
            .map(|c| self.score_paths(&pred, &before, &observables(c)).into_values().sum())
            .collect())
    }

    /// `ln p(next | s, a)`.
    pub fn log_likelihood(&self, s: &WorldState, a: Action, next: &WorldState) -> Result<T, ModelError> {
        Ok(self.path_log_probs(s, a, next)?.into_values().sum())
    }

    /// Marginal distribution the model samples `path` from.
    pub fn path_distribution(&self, s: &WorldState, a: Action, path: &str) -> Result<Vec<(Prim, T)>, ModelError> {
        let pred = self.predict(s, a)?;
        let before = observables(s);
        match pred.get(path) {
            Some(preds) => {
                let f = PathFactors::new(preds, before.get(path), None, self.config.epsilon);
                let lp = f.log_probs(&self.weights);
                Ok(f.domain.into_iter().zip(lp.into_iter().map(T::exp)).collect())
            }
            None => match before.get(path) {
                Some(v) => Ok(vec![(v.clone(), T::one())]),
                None => Err(ModelError::SchemaMismatch(vec![path.to_string()])),
            },
        }
    }

    /// `ln p(path = value)` under the sampling distribution.
    pub fn observable_log_prob(&self, s: &WorldState, a: Action, path: &str, value: &Prim) -> Result<T, ModelError> {
        Ok(self
            .path_distribution(s, a, path)?
            .into_iter()
            .find(|(v, _)| v == value)
            .map_or(T::neg_infinity(), |(_, p)| p.ln()))
    }

    /// Draws every predicted path independently; other paths keep their
    /// current values. A state that breaks an invariant comes back inside
    /// [`ModelError::InvalidSample`].
    pub fn sample<R: Rng + ?Sized>(&self, s: &WorldState, a: Action, rng: &mut R) -> Result<WorldState, ModelError> {
        let pred = self.predict(s, a)?;
        let before = observables(s);
        check_schema(&pred, &before)?;
        let mut values = BTreeMap::new();
        for (path, preds) in &pred {
            let f = PathFactors::new(preds, before.get(path), None, self.config.epsilon);
            let probs: Vec<f64> = f.log_probs(&self.weights).into_iter().map(|x| x.exp().to_f64_lossy()).collect();
            let mut u: f64 = rng.gen::<f64>() * probs.iter().sum::<f64>();
            let mut pick = probs.len() - 1;
            for (k, p) in probs.iter().enumerate() {
                if u < *p {
                    pick = k;
                    break;
                }
                u -= p;
            }
            values.insert(path.clone(), f.domain[pick].clone());
        }
        let next = reconstruct(s, &values).map_err(|e| match e {
            ReconstructError::UnknownPath(p) => ModelError::SchemaMismatch(vec![p]),
            ReconstructError::State(e) => ModelError::Config(format!("sampled state does not parse: {e}")),
        })?;
        let violations = next.violations();
        if violations.is_empty() {
            Ok(next)
        } else {
            Err(ModelError::InvalidSample {
                state: Box::new(next),
                violations,
            })
        }
    }
}

/// `(ln(1 - delta), ln delta)`.
pub fn persistence<T: Scalar>(delta: T) -> (T, T) {
    ((T::one() - delta).ln(), delta.ln())
}

pub fn predict(laws: &LawLibrary, s: &WorldState, a: Action) -> Result<Prediction, ModelError> {
    let mut out = Prediction::new();
    for (i, law) in laws.laws().iter().enumerate() {
        if !eval_precondition(law, s, a) {
            continue;
        }
        for (path, dist) in eval_effect(law, s, a)? {
            out.entry(path).or_default().push((i, dist));
        }
    }
    Ok(out)
}

fn check_schema(pred: &Prediction, before: &Observables) -> Result<(), ModelError> {
    let missing: Vec<String> = pred.keys().filter(|p| !before.contains_key(*p)).cloned().collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(ModelError::SchemaMismatch(missing))
    }
}
