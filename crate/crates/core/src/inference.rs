//! Maximum-likelihood law weights.
//!
//! The negative log-likelihood of a dataset is convex in the weights. Its
//! gradient for law `i` is `-(g_i(v*) - E_p[g_i])` summed over every path the
//! law predicts, where `g_i = ln phi_i` and `v*` is the observed value. A law
//! that is never active has an exactly zero gradient.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::Action;
use crate::error::ModelError;
use crate::lang::LawLibrary;
use crate::model::{observables, persistence, predict, ModelConfig, MixtureModel, PathFactors};
use crate::scalar::{log_sum_exp, CompensatedSum, Scalar};
use crate::state::{Prim, WorldState};

/// One observed step.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: WorldState,
    pub action: Action,
    pub next: WorldState,
}

#[derive(Clone, Debug, PartialEq)]
struct PreparedPath<T> {
    observed: usize,
    factors: PathFactors<T>,
}

#[derive(Clone, Debug, PartialEq)]
struct PreparedTransition<T> {
    /// Persistence terms; independent of the weights.
    constant: T,
    paths: Vec<PreparedPath<T>>,
}

/// Law evaluations cached once per transition so the objective is pure
/// arithmetic.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedDataset<T> {
    n_laws: usize,
    transitions: Vec<PreparedTransition<T>>,
    activation_counts: Vec<usize>,
}

impl<T: Scalar> PreparedDataset<T> {
    pub fn new(laws: &LawLibrary, data: &[Transition], config: ModelConfig<T>) -> Result<Self, ModelError> {
        config.validate()?;
        let (stay, change) = persistence(config.delta);
        let mut activation_counts = vec![0; laws.len()];
        let mut transitions = Vec::with_capacity(data.len());
        for t in data {
            for (i, law) in laws.laws().iter().enumerate() {
                if crate::lang::eval_precondition(law, &t.state, t.action) {
                    activation_counts[i] += 1;
                }
            }
            let pred = predict(laws, &t.state, t.action)?;
            let before = observables(&t.state);
            let after = observables(&t.next);
            let missing: Vec<String> = pred.keys().filter(|p| !before.contains_key(*p)).cloned().collect();
            if !missing.is_empty() {
                return Err(ModelError::SchemaMismatch(missing));
            }
            let mut constant = T::zero();
            for (path, v) in &before {
                if pred.contains_key(path) {
                    continue;
                }
                constant = constant + if after.get(path) == Some(v) { stay } else { change };
            }
            let born = after
                .keys()
                .filter(|p| !before.contains_key(*p) && !pred.contains_key(*p))
                .count();
            constant = constant + T::count(born) * change;
            let paths = pred
                .iter()
                .map(|(path, preds)| {
                    let observed = after.get(path).unwrap_or(&Prim::Null);
                    let factors = PathFactors::new(preds, before.get(path), Some(observed), config.epsilon);
                    PreparedPath {
                        observed: factors.index_of(observed).expect("observed value is in the domain"),
                        factors,
                    }
                })
                .collect();
            transitions.push(PreparedTransition { constant, paths });
        }
        Ok(Self {
            n_laws: laws.len(),
            transitions,
            activation_counts,
        })
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn n_laws(&self) -> usize {
        self.n_laws
    }

    /// Transitions on which each law's precondition held.
    pub fn activation_counts(&self) -> &[usize] {
        &self.activation_counts
    }

    /// Dataset NLL without the penalty.
    pub fn nll(&self, weights: &[T]) -> T {
        self.nll_and_grad(weights).0
    }

    pub fn nll_and_grad(&self, weights: &[T]) -> (T, Vec<T>) {
        assert_eq!(weights.len(), self.n_laws, "one weight per law");
        let mut constant = CompensatedSum::default();
        let mut nll = CompensatedSum::default();
        let mut grad = vec![CompensatedSum::default(); self.n_laws];
        for t in &self.transitions {
            constant.add(-t.constant);
            for p in &t.paths {
                let scores = p.factors.scores(weights);
                let at = scores[p.observed];
                let shifted: Vec<T> = scores.iter().map(|&s| s - at).collect();
                let z = log_sum_exp(&shifted);
                nll.add(z);
                let probs: Vec<T> = shifted.iter().map(|&s| (s - z).exp()).collect();
                for (i, g) in &p.factors.logs {
                    let expected: T = g.iter().zip(&probs).map(|(&gi, &pi)| gi * pi).sum();
                    grad[*i].add(expected - g[p.observed]);
                }
            }
        }
        (constant.value() + nll.value(), grad.iter().map(|g| g.value()).collect())
    }
}

/// NLL plus `l2 / 2 * |w|^2`, with gradient.
pub fn objective<T: Scalar>(ds: &PreparedDataset<T>, weights: &[T], l2: T) -> (T, Vec<T>) {
    let (mut f, mut g) = ds.nll_and_grad(weights);
    if l2 > T::zero() {
        let half = T::lit(0.5);
        for (gi, &w) in g.iter_mut().zip(weights) {
            f = f + half * l2 * w * w;
            *gi = *gi + l2 * w;
        }
    }
    (f, g)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    GradientTol,
    MaxIter,
    LineSearchFailure,
}

impl FitStatus {
    pub fn name(self) -> &'static str {
        match self {
            FitStatus::GradientTol => "gradient-tol",
            FitStatus::MaxIter => "max-iter",
            FitStatus::LineSearchFailure => "line-search-failure",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LbfgsConfig<T> {
    pub memory: usize,
    pub max_iter: usize,
    pub grad_tol: T,
    pub c1: T,
    pub backtrack: T,
    pub max_backtracks: usize,
    /// Largest change of any coordinate in one line search.
    pub max_step: T,
}

impl<T: Scalar> Default for LbfgsConfig<T> {
    fn default() -> Self {
        Self {
            memory: 10,
            max_iter: 200,
            grad_tol: T::lit(1e-6),
            c1: T::lit(1e-4),
            backtrack: T::lit(0.5),
            max_backtracks: 30,
            max_step: T::lit(10.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LbfgsResult<T> {
    pub x: Vec<T>,
    pub initial_f: T,
    pub f: T,
    pub iterations: usize,
    pub status: FitStatus,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn inf_norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

/// Armijo backtracking from a unit step, shortened so no coordinate moves
/// more than `max_step`.
fn line_search<T: Scalar, F: FnMut(&[T]) -> (T, Vec<T>)>(
    f: &mut F,
    x: &[T],
    fx: T,
    d: &[T],
    slope: T,
    cfg: &LbfgsConfig<T>,
) -> Option<(Vec<T>, T, Vec<T>)> {
    let longest = inf_norm(d);
    let mut step = if longest > cfg.max_step { cfg.max_step / longest } else { T::one() };
    for _ in 0..=cfg.max_backtracks {
        let xn: Vec<T> = x.iter().zip(d).map(|(&xi, &di)| xi + step * di).collect();
        let (fn_, gn) = f(&xn);
        let decrease = cfg.c1 * step * slope;
        // Below round-off the sufficient-decrease test cannot be resolved.
        let unresolvable = -decrease <= T::epsilon() * T::lit(4.0) * fx.abs() && fn_ <= fx;
        if fn_.is_finite() && gn.iter().all(|v| v.is_finite()) && (fn_ <= fx + decrease || unresolvable) {
            return Some((xn, fn_, gn));
        }
        step = step * cfg.backtrack;
    }
    None
}

/// Limited-memory BFGS with an Armijo backtracking line search.
pub fn minimize<T: Scalar, F: FnMut(&[T]) -> (T, Vec<T>)>(
    mut f: F,
    x0: Vec<T>,
    cfg: &LbfgsConfig<T>,
) -> LbfgsResult<T> {
    let mut x = x0;
    let (mut fx, mut g) = f(&x);
    let initial_f = fx;
    let finite = |v: T, g: &[T]| v.is_finite() && g.iter().all(|x| x.is_finite());
    let mut history: std::collections::VecDeque<(Vec<T>, Vec<T>, T)> = Default::default();
    let done = |fx, x, it, status| LbfgsResult {
        x,
        initial_f,
        f: fx,
        iterations: it,
        status,
    };
    if !finite(fx, &g) {
        return done(fx, x, 0, FitStatus::LineSearchFailure);
    }
    for it in 0..cfg.max_iter {
        if inf_norm(&g) <= cfg.grad_tol {
            return done(fx, x, it, FitStatus::GradientTol);
        }
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = *rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, &yi)| *qi = *qi - a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi = *qi * gamma);
        }
        for ((s, y, rho), a) in history.iter().zip(alphas.into_iter().rev()) {
            let b = *rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, &si)| *qi = *qi + (a - b) * si);
        }
        let mut d: Vec<T> = q.into_iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) || !slope.is_finite() {
            history.clear();
            d = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &d);
        }
        let mut accepted = line_search(&mut f, &x, fx, &d, slope, cfg);
        if accepted.is_none() && !history.is_empty() {
            // Retry along steepest descent with fresh curvature.
            history.clear();
            d = g.iter().map(|&v| -v).collect();
            slope = dot(&g, &d);
            accepted = line_search(&mut f, &x, fx, &d, slope, cfg);
        }
        let Some((xn, fn_, gn)) = accepted else {
            return done(fx, x, it, FitStatus::LineSearchFailure);
        };
        let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > T::zero() && sy.is_finite() {
            if history.len() == cfg.memory {
                history.pop_front();
            }
            history.push_back((s, y, T::one() / sy));
        }
        x = xn;
        fx = fn_;
        g = gn;
    }
    let status = if inf_norm(&g) <= cfg.grad_tol {
        FitStatus::GradientTol
    } else {
        FitStatus::MaxIter
    };
    done(fx, x, cfg.max_iter, status)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitConfig<T> {
    pub model: ModelConfig<T>,
    pub lbfgs: LbfgsConfig<T>,
    /// Ridge penalty strength; zero disables it.
    pub l2: T,
}

impl<T: Scalar> Default for FitConfig<T> {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            lbfgs: LbfgsConfig::default(),
            l2: T::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub weights: BTreeMap<String, f64>,
    pub initial_nll: f64,
    pub final_nll: f64,
    pub iterations: usize,
    pub status: FitStatus,
    pub activation_counts: BTreeMap<String, usize>,
}

/// Fits one weight per law from all-ones.
pub fn fit_weights<T: Scalar>(
    laws: &LawLibrary,
    data: &[Transition],
    cfg: &FitConfig<T>,
) -> Result<(MixtureModel<T>, FitResult), ModelError> {
    if data.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let ds = PreparedDataset::new(laws, data, cfg.model)?;
    let r = minimize(|w| objective(&ds, w, cfg.l2), vec![T::one(); laws.len()], &cfg.lbfgs);
    let mut model = MixtureModel::new(laws.clone()).with_config(cfg.model)?;
    if r.x.iter().all(|w| w.is_finite()) {
        model.set_weights(r.x.clone())?;
    }
    let names = laws.names();
    let result = FitResult {
        weights: model.weight_map(),
        initial_nll: r.initial_f.to_f64_lossy(),
        final_nll: r.f.to_f64_lossy(),
        iterations: r.iterations,
        status: r.status,
        activation_counts: names
            .iter()
            .zip(ds.activation_counts())
            .map(|(n, c)| (n.to_string(), *c))
            .collect(),
    };
    Ok((model, result))
}
