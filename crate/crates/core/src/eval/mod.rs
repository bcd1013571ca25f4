//! Discriminative evaluation: rank the true next state among mutated
//! distractors, and measure how far model samples land from the truth.

mod mutators;
mod scenarios;

use serde::{Deserialize, Serialize};

pub use mutators::{generate_distractors, Mutator};
pub use scenarios::{
    all_scenarios, core_suite, extended_suite, group_of, scenario_by_name, Goal, Scenario, SCENARIO_SIZE,
};

use crate::env::{transition, Action};
use crate::error::{HarnessError, ModelError};
use crate::inference::Transition;
use crate::model::MixtureModel;
use crate::rng::{self, StreamRng};
use crate::scalar::Scalar;
use crate::state::{canonicalize, count_elements, diff_ops, states_equal, WorldState};

pub const DEFAULT_DISTRACTORS: usize = 8;

/// Anything that can score candidate next states and sample one.
pub trait EvaluatableWorldModel {
    fn name(&self) -> String;

    /// Higher is more plausible.
    fn score(&self, s: &WorldState, a: Action, candidate: &WorldState) -> Result<f64, ModelError>;

    fn score_batch(&self, s: &WorldState, a: Action, candidates: &[WorldState]) -> Result<Vec<f64>, ModelError> {
        candidates.iter().map(|c| self.score(s, a, c)).collect()
    }

    fn sample(&self, s: &WorldState, a: Action, rng: &mut StreamRng) -> Result<WorldState, ModelError>;
}

/// Scores 0 for the true next state and -1 otherwise.
#[derive(Clone, Copy, Debug, Default)]
pub struct OracleModel;

impl<M: EvaluatableWorldModel + ?Sized> EvaluatableWorldModel for &M {
    fn name(&self) -> String {
        (**self).name()
    }

    fn score(&self, s: &WorldState, a: Action, cand: &WorldState) -> Result<f64, ModelError> {
        (**self).score(s, a, cand)
    }

    fn score_batch(&self, s: &WorldState, a: Action, cands: &[WorldState]) -> Result<Vec<f64>, ModelError> {
        (**self).score_batch(s, a, cands)
    }

    fn sample(&self, s: &WorldState, a: Action, rng: &mut StreamRng) -> Result<WorldState, ModelError> {
        (**self).sample(s, a, rng)
    }
}

impl EvaluatableWorldModel for OracleModel {
    fn name(&self) -> String {
        "oracle".into()
    }

    fn score(&self, s: &WorldState, a: Action, candidate: &WorldState) -> Result<f64, ModelError> {
        Ok(if states_equal(candidate, &transition(s, a)) { 0.0 } else { -1.0 })
    }

    fn score_batch(&self, s: &WorldState, a: Action, candidates: &[WorldState]) -> Result<Vec<f64>, ModelError> {
        let truth = canonicalize(&transition(s, a)).to_bytes();
        Ok(candidates
            .iter()
            .map(|c| if canonicalize(c).to_bytes() == truth { 0.0 } else { -1.0 })
            .collect())
    }

    fn sample(&self, s: &WorldState, a: Action, _rng: &mut StreamRng) -> Result<WorldState, ModelError> {
        Ok(transition(s, a))
    }
}

/// Uninformed baseline: a hash of the inputs mapped to `[0, 1)`. Samples
/// predict no change.
#[derive(Clone, Copy, Debug, Default)]
pub struct RandomModel {
    pub seed: u64,
}

impl RandomModel {
    fn hash_score(&self, context: &[u8], candidate: &WorldState) -> f64 {
        let mut bytes = context.to_vec();
        bytes.extend_from_slice(&canonicalize(candidate).to_bytes());
        (rng::hash_seed(&bytes) >> 11) as f64 / (1u64 << 53) as f64
    }

    fn context(&self, s: &WorldState, a: Action) -> Vec<u8> {
        let mut bytes = self.seed.to_le_bytes().to_vec();
        bytes.extend_from_slice(a.name().as_bytes());
        bytes.extend_from_slice(&canonicalize(s).to_bytes());
        bytes
    }
}

impl EvaluatableWorldModel for RandomModel {
    fn name(&self) -> String {
        "random".into()
    }

    fn score(&self, s: &WorldState, a: Action, candidate: &WorldState) -> Result<f64, ModelError> {
        Ok(self.hash_score(&self.context(s, a), candidate))
    }

    fn score_batch(&self, s: &WorldState, a: Action, candidates: &[WorldState]) -> Result<Vec<f64>, ModelError> {
        let ctx = self.context(s, a);
        Ok(candidates.iter().map(|c| self.hash_score(&ctx, c)).collect())
    }

    fn sample(&self, s: &WorldState, _a: Action, _rng: &mut StreamRng) -> Result<WorldState, ModelError> {
        Ok(s.clone())
    }
}

impl<T: Scalar> EvaluatableWorldModel for MixtureModel<T> {
    fn name(&self) -> String {
        "mixture".into()
    }

    fn score(&self, s: &WorldState, a: Action, candidate: &WorldState) -> Result<f64, ModelError> {
        Ok(self.log_likelihood(s, a, candidate)?.to_f64_lossy())
    }

    fn score_batch(&self, s: &WorldState, a: Action, candidates: &[WorldState]) -> Result<Vec<f64>, ModelError> {
        Ok(self
            .log_likelihood_batch(s, a, candidates)?
            .into_iter()
            .map(Scalar::to_f64_lossy)
            .collect())
    }

    fn sample(&self, s: &WorldState, a: Action, rng: &mut StreamRng) -> Result<WorldState, ModelError> {
        MixtureModel::sample(self, s, a, rng)
    }
}

/// Rank of the truth among `1 + distractors.len()` candidates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Ranking {
    pub rank: usize,
    pub candidates: usize,
    /// Set when the truth's score was not finite; it is then ranked last.
    pub non_finite: bool,
}

impl Ranking {
    pub fn reciprocal(&self) -> f64 {
        1.0 / self.rank as f64
    }
}

/// Pessimistic rank: ties with a distractor count against the truth.
pub fn rank_truth(truth_score: f64, distractor_scores: &[f64]) -> Ranking {
    let candidates = distractor_scores.len() + 1;
    if !truth_score.is_finite() {
        return Ranking {
            rank: candidates,
            candidates,
            non_finite: true,
        };
    }
    // NaN distractors behave like -inf.
    let beaten = distractor_scores.iter().filter(|&&d| d >= truth_score).count();
    Ranking {
        rank: 1 + beaten,
        candidates,
        non_finite: false,
    }
}

pub fn mean(xs: &[f64]) -> Result<f64, HarnessError> {
    if xs.is_empty() {
        Err(HarnessError::EmptyAggregate)
    } else {
        Ok(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

/// `H_n / n`: expected reciprocal rank when scores carry no information.
pub fn random_baseline_mrr(candidates: usize) -> f64 {
    (1..=candidates).map(|i| 1.0 / i as f64).sum::<f64>() / candidates as f64
}

/// Number of leaf operations turning `a` into `b`.
pub fn raw_distance(a: &WorldState, b: &WorldState) -> usize {
    diff_ops(&canonicalize(a), &canonicalize(b)).len()
}

/// `raw_distance / count_elements(truth)`, 0 for an empty document.
pub fn normalized_distance(predicted: &WorldState, truth: &WorldState) -> f64 {
    let doc = canonicalize(truth);
    let n = count_elements(&doc);
    if n == 0 {
        return 0.0;
    }
    diff_ops(&canonicalize(predicted), &doc).len() as f64 / n as f64
}



/// Runs the scenario policy through `step` until the goal holds or the
/// script ends.
pub fn run_scenario<F: FnMut(&WorldState, Action) -> WorldState>(sc: &Scenario, mut step: F) -> Vec<Transition> {
    let mut out: Vec<Transition> = Vec::with_capacity(sc.actions.len());
    let mut s = sc.initial.clone();
    for &a in sc.actions.iter().take(sc.max_steps) {
        let next = step(&s, a);
        out.push(Transition {
            state: s,
            action: a,
            next: next.clone(),
        });
        s = next;
        if sc.goal.is_some_and(|g| g(&out)) {
            break;
        }
    }
    out
}

/// The scenario under the true environment.
pub fn rollout(sc: &Scenario) -> Vec<Transition> {
    run_scenario(sc, transition)
}

/// One ranking problem: a step plus its distractors.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub step: Transition,
    pub distractors: Vec<WorldState>,
}

/// Ranking problems for every step of `sc`; distractors depend only on
/// `(seed, scenario name, step index)`.
pub fn problems(sc: &Scenario, k: usize, seed: u64) -> Vec<Problem> {
    rollout(sc)
        .into_iter()
        .enumerate()
        .map(|(i, step)| {
            let mut rng = rng::substream(seed, &format!("distractors/{}/{i}", sc.name));
            let distractors = generate_distractors(&step.state, step.action, &step.next, k, &mut rng);
            Problem { step, distractors }
        })
        .collect()
}

/// `None` when the problem has no distractors.
pub fn rank_problem(model: &dyn EvaluatableWorldModel, p: &Problem) -> Result<Option<Ranking>, ModelError> {
    if p.distractors.is_empty() {
        return Ok(None);
    }
    let mut cands = Vec::with_capacity(p.distractors.len() + 1);
    cands.push(p.step.next.clone());
    cands.extend(p.distractors.iter().cloned());
    let scores = model.score_batch(&p.step.state, p.step.action, &cands)?;
    Ok(Some(rank_truth(scores[0], &scores[1..])))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub group: String,
    pub stochastic: bool,
    pub transitions: usize,
    /// Rank per transition; `None` where no mutator applied.
    pub ranks: Vec<Option<usize>>,
    pub skipped: usize,
    pub flagged: usize,
    /// Samples that broke a state invariant; they are measured as is.
    pub invalid_samples: usize,
    /// Means over ranked transitions; `None` when nothing was ranked.
    pub rank1: Option<f64>,
    pub mrr: Option<f64>,
    /// Means of one model sample per transition.
    pub raw_distance: f64,
    pub normalized_distance: f64,
}

/// Per-group means over scenario means.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupReport {
    pub group: String,
    pub scenarios: usize,
    pub rank1: Option<f64>,
    pub mrr: Option<f64>,
    pub raw_distance: f64,
    pub normalized_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub model: String,
    pub distractors: usize,
    pub seed: u64,
    pub scenarios: Vec<ScenarioReport>,
    pub groups: Vec<GroupReport>,
    /// Means over scenarios of the per-scenario means.
    pub rank1: f64,
    pub mrr: f64,
    pub raw_distance: f64,
    pub normalized_distance: f64,
}

pub fn evaluate_scenario(
    model: &dyn EvaluatableWorldModel,
    sc: &Scenario,
    k: usize,
    seed: u64,
) -> Result<ScenarioReport, HarnessError> {
    let fail = |step: usize, e: ModelError| HarnessError::Scenario {
        scenario: sc.name.to_string(),
        step,
        message: e.to_string(),
    };
    let mut ranks = Vec::new();
    let mut rr = Vec::new();
    let mut top = Vec::new();
    let mut raw = Vec::new();
    let mut norm = Vec::new();
    let mut flagged = 0;
    let mut invalid = 0;
    for (i, p) in problems(sc, k, seed).iter().enumerate() {
        let r = rank_problem(model, p).map_err(|e| fail(i, e))?;
        if let Some(r) = r {
            flagged += usize::from(r.non_finite);
            rr.push(r.reciprocal());
            top.push(if r.rank == 1 { 1.0 } else { 0.0 });
        }
        ranks.push(r.map(|r| r.rank));
        let mut srng = rng::substream(seed, &format!("sample/{}/{i}", sc.name));
        let sample = match model.sample(&p.step.state, p.step.action, &mut srng) {
            Ok(x) => x,
            Err(ModelError::InvalidSample { state, .. }) => {
                invalid += 1;
                *state
            }
            Err(e) => return Err(fail(i, e)),
        };
        raw.push(raw_distance(&sample, &p.step.next) as f64);
        norm.push(normalized_distance(&sample, &p.step.next));
    }
    Ok(ScenarioReport {
        scenario: sc.name.to_string(),
        group: group_of(sc.name).to_string(),
        stochastic: sc.stochastic,
        transitions: ranks.len(),
        skipped: ranks.iter().filter(|r| r.is_none()).count(),
        ranks,
        flagged,
        invalid_samples: invalid,
        rank1: mean(&top).ok(),
        mrr: mean(&rr).ok(),
        raw_distance: mean(&raw)?,
        normalized_distance: mean(&norm)?,
    })
}

/// Mean-of-means over `reports`, skipping scenarios with no value.
pub fn aggregate<F: Fn(&ScenarioReport) -> Option<f64>>(reports: &[ScenarioReport], f: F) -> Result<f64, HarnessError> {
    mean(&reports.iter().filter_map(f).collect::<Vec<_>>())
}

/// Groups in first-seen order.
pub fn group_reports(reports: &[ScenarioReport]) -> Vec<GroupReport> {
    let mut names: Vec<&str> = Vec::new();
    for r in reports {
        if !names.contains(&r.group.as_str()) {
            names.push(&r.group);
        }
    }
    names
        .into_iter()
        .map(|g| {
            let members: Vec<ScenarioReport> = reports.iter().filter(|r| r.group == g).cloned().collect();
            GroupReport {
                group: g.to_string(),
                scenarios: members.len(),
                rank1: aggregate(&members, |r| r.rank1).ok(),
                mrr: aggregate(&members, |r| r.mrr).ok(),
                raw_distance: aggregate(&members, |r| Some(r.raw_distance)).unwrap_or(0.0),
                normalized_distance: aggregate(&members, |r| Some(r.normalized_distance)).unwrap_or(0.0),
            }
        })
        .collect()
}

pub fn evaluate_suite(
    model: &dyn EvaluatableWorldModel,
    suite: &[Scenario],
    k: usize,
    seed: u64,
) -> Result<SuiteReport, HarnessError> {
    let scenarios = suite
        .iter()
        .map(|sc| evaluate_scenario(model, sc, k, seed))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport {
        model: model.name(),
        distractors: k,
        seed,
        rank1: aggregate(&scenarios, |r| r.rank1)?,
        mrr: aggregate(&scenarios, |r| r.mrr)?,
        raw_distance: aggregate(&scenarios, |r| Some(r.raw_distance))?,
        normalized_distance: aggregate(&scenarios, |r| Some(r.normalized_distance))?,
        groups: group_reports(&scenarios),
        scenarios,
    })
}

/// Scenarios whose true rollout draws no randomness.
pub fn deterministic(suite: Vec<Scenario>) -> Vec<Scenario> {
    suite.into_iter().filter(|s| !s.stochastic).collect()
}
