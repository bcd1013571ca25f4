use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use lawmix_core::eval::{
    all_scenarios, core_suite, deterministic, evaluate_suite, extended_suite, rollout, scenario_by_name,
    EvaluatableWorldModel, OracleModel, RandomModel, Scenario, SuiteReport, DEFAULT_DISTRACTORS,
};
use lawmix_core::error::ModelError;
use lawmix_core::explore::{collect_from, coverage, Coverage};
use lawmix_core::inference::{fit_weights, FitStatus};
use lawmix_core::io::{self, Bundle};
use lawmix_core::lang::{LawLibrary, GRAMMAR};
use lawmix_core::planner::{compare_plans, plan_scenario, PlanComparison};
use lawmix_core::rng::substream;
use lawmix_core::state::canonicalize;
use lawmix_core::{corpus, env, model, FitConfig, Model, ModelConfig};

use crate::config::{pick, require, Failure, FileConfig};
use crate::{CollectArgs, DumpArgs, EvalArgs, FitArgs, ModelArgs, PlanArgs, SimulateArgs};

fn seed(flag: Option<u64>, file: &FileConfig) -> Result<u64, Failure> {
    require(pick(flag, &file.seed), "--seed")
}

fn builtin(name: &str) -> Result<LawLibrary, Failure> {
    match name {
        "standard" => Ok(corpus::standard()),
        "full" => Ok(corpus::full()),
        _ => Err(Failure::Args(format!("unknown corpus `{name}` (expected standard or full)"))),
    }
}

fn laws(flag: Vec<PathBuf>, corpus: Option<String>, file: &FileConfig) -> Result<LawLibrary, Failure> {
    let paths = if flag.is_empty() { file.laws.clone().unwrap_or_default() } else { flag };
    match (paths.is_empty(), pick(corpus, &file.corpus)) {
        (false, None) => Ok(io::load_laws(&paths)?),
        (true, Some(name)) => builtin(&name),
        (false, Some(_)) => Err(Failure::Args("pass either --laws or --corpus, not both".into())),
        (true, None) => Err(Failure::Args("no laws: pass --laws or --corpus".into())),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => Ok(io::write_text(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn print_coverage(c: &Coverage) {
    println!("{:<22} {:>6} {:>8}", "action", "taken", "changed");
    for (a, n) in &c.actions {
        println!("{a:<22} {:>6} {:>8}", n.taken, n.changed);
    }
    let changed: Vec<&str> = c.actions.iter().filter(|(_, n)| n.changed > 0).map(|(a, _)| a.as_str()).collect();
    println!("state-changing actions: {}", changed.join(", "));
    let never = c.never_active();
    if !never.is_empty() {
        println!("laws never active: {}", never.join(", "));
    }
}

pub fn collect(a: CollectArgs, file: &FileConfig, quiet: bool) -> Result<(), Failure> {
    let seed = seed(a.seed, file)?;
    let steps = pick(a.steps, &file.steps).unwrap_or(400);
    let size = (pick(a.width, &file.width).unwrap_or(16), pick(a.height, &file.height).unwrap_or(16));
    let out = require(pick(a.out, &file.out), "--out")?;
    let initial = env::initial_state(seed, size).map_err(|e| Failure::Args(e.to_string()))?;
    let data = collect_from(&initial, steps, seed);
    io::write_trajectory(&out, &data)?;
    if !quiet {
        println!("wrote {} transitions to {}", data.len(), out.display());
        print_coverage(&coverage(&corpus::full(), &data));
    }
    Ok(())
}

pub fn fit(a: FitArgs, file: &FileConfig, quiet: bool) -> Result<(), Failure> {
    let lib = laws(a.laws, a.corpus, file)?;
    let data_path = require(pick(a.data, &file.data), "--data")?;
    let out = require(pick(a.out, &file.out), "--out")?;
    let data = io::read_trajectory(&data_path)?;
    if data.is_empty() {
        return Err(Failure::Numeric(format!("{}: empty trajectory, nothing to fit", data_path.display())));
    }
    let mut cfg = FitConfig::default();
    if let Some(v) = pick(a.max_iter, &file.max_iter) {
        cfg.lbfgs.max_iter = v;
    }
    if let Some(v) = pick(a.grad_tol, &file.grad_tol) {
        cfg.lbfgs.grad_tol = v;
    }
    if let Some(v) = pick(a.memory, &file.memory) {
        cfg.lbfgs.memory = v;
    }
    if let Some(v) = pick(a.l2, &file.l2) {
        cfg.l2 = v;
    }
    if let Some(v) = pick(a.epsilon, &file.epsilon) {
        cfg.model.epsilon = v;
    }
    if let Some(v) = pick(a.delta, &file.delta) {
        cfg.model.delta = v;
    }
    if !(cfg.lbfgs.memory >= 1 && cfg.lbfgs.grad_tol > 0.0 && cfg.l2 >= 0.0) {
        return Err(Failure::Args("memory must be >= 1, grad-tol > 0 and l2 >= 0".into()));
    }
    cfg.model.validate()?;
    let (model, result) = fit_weights(&lib, &data, &cfg)?;
    io::write_weights(&out, &result.weights)?;
    if let Some(p) = pick(a.report, &file.report) {
        io::write_json(&p, &result)?;
    }
    if let Some(p) = pick(a.bundle, &file.bundle) {
        write_bundle(&p, &model)?;
    }
    if !quiet {
        println!(
            "{}: nll {} -> {} in {} iterations",
            result.status.name(),
            result.initial_nll,
            result.final_nll,
            result.iterations
        );
        for (name, w) in &result.weights {
            println!("{name:<30} {w:>12.6} {:>6}", result.activation_counts[name]);
        }
    }
    match result.status {
        FitStatus::GradientTol | FitStatus::MaxIter => Ok(()),
        FitStatus::LineSearchFailure => Err(Failure::Numeric("line search failed; weights are the last good iterate".into())),
    }
}

/// Writes `<stem>.law`, `<stem>.weights.json` and the bundle itself.
fn write_bundle(path: &Path, model: &Model) -> Result<(), Failure> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("bundle");
    let dir = path.parent().unwrap_or(Path::new(""));
    let law_file = format!("{stem}.law");
    let weight_file = format!("{stem}.weights.json");
    io::write_text(&dir.join(&law_file), &model.laws().to_source())?;
    io::write_weights(&dir.join(&weight_file), &model.weight_map())?;
    let b = Bundle {
        laws: vec![law_file],
        weights: Some(weight_file),
        epsilon: model.config().epsilon,
        delta: model.config().delta,
    };
    Ok(io::write_json(path, &b)?)
}

/// A mixture model from `--laws` / `--corpus` / `--weights`, or from a bundle.
fn mixture(m: &ModelArgs, file: &FileConfig) -> Result<Option<Model>, Failure> {
    let name = pick(m.model.clone(), &file.model);
    if let Some(name) = name {
        return Ok(match name.as_str() {
            "oracle" | "env" | "random" => None,
            path => Some(io::load_bundle(Path::new(path))?),
        });
    }
    let lib = laws(m.laws.clone(), m.corpus.clone(), file)?;
    let mut model = Model::new(lib).with_config(ModelConfig::default())?;
    if let Some(w) = pick(m.weights.clone(), &file.weights) {
        model.set_weight_map(&io::read_weights(&w)?)?;
    }
    Ok(Some(model))
}

struct Loaded {
    mixture: Option<Model>,
    kind: String,
}

impl Loaded {
    fn new(m: &ModelArgs, file: &FileConfig) -> Result<Self, Failure> {
        let mixture = mixture(m, file)?;
        let kind = pick(m.model.clone(), &file.model).unwrap_or_else(|| "mixture".into());
        Ok(Self { mixture, kind })
    }

    fn model(&self, seed: u64) -> Box<dyn EvaluatableWorldModel + '_> {
        match (&self.mixture, self.kind.as_str()) {
            (Some(m), _) => Box::new(m),
            (None, "random") => Box::new(RandomModel { seed }),
            (None, _) => Box::new(OracleModel),
        }
    }
}

fn select_scenarios(spec: &str) -> Result<Vec<Scenario>, Failure> {
    Ok(match spec {
        "core" => core_suite(),
        "extended" => extended_suite(),
        "all" => all_scenarios(),
        "deterministic" => deterministic(core_suite()),
        list => list
            .split(',')
            .map(|n| scenario_by_name(n.trim()))
            .collect::<Result<Vec<_>, _>>()?,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"))
}

fn print_report(r: &SuiteReport) {
    println!(
        "{:<10} {:<34} {:>3} {:>4} {:>7} {:>7} {:>8} {:>8}",
        "group", "scenario", "n", "skip", "rank@1", "mrr", "raw", "norm"
    );
    for s in &r.scenarios {
        println!(
            "{:<10} {:<34} {:>3} {:>4} {:>7} {:>7} {:>8.3} {:>8.5}",
            s.group,
            s.scenario,
            s.transitions,
            s.skipped,
            opt(s.rank1),
            opt(s.mrr),
            s.raw_distance,
            s.normalized_distance
        );
    }
    for g in &r.groups {
        println!(
            "{:<10} {:<34} {:>3} {:>4} {:>7} {:>7} {:>8.3} {:>8.5}",
            "group",
            g.group,
            g.scenarios,
            "",
            opt(g.rank1),
            opt(g.mrr),
            g.raw_distance,
            g.normalized_distance
        );
    }
    println!(
        "aggregate ({}, k={}, seed {}): rank@1 {:.4} mrr {:.4} raw {:.3} norm {:.5}",
        r.model, r.distractors, r.seed, r.rank1, r.mrr, r.raw_distance, r.normalized_distance
    );
}

pub fn eval(a: EvalArgs, file: &FileConfig, quiet: bool) -> Result<(), Failure> {
    let seed = seed(a.seed, file)?;
    let k = pick(a.distractors, &file.distractors).unwrap_or(DEFAULT_DISTRACTORS);
    if k == 0 {
        return Err(Failure::Args("--distractors must be at least 1".into()));
    }
    let suite = select_scenarios(&pick(a.scenarios, &file.scenarios).unwrap_or_else(|| "core".into()))?;
    let loaded = Loaded::new(&a.model, file)?;
    let report = evaluate_suite(&*loaded.model(seed), &suite, k, seed)?;
    if let Some(p) = pick(a.out, &file.out) {
        io::write_json(&p, &report)?;
    }
    if !quiet {
        print_report(&report);
    }
    Ok(())
}

pub fn simulate(a: SimulateArgs, file: &FileConfig, quiet: bool) -> Result<(), Failure> {
    let seed = seed(a.seed, file)?;
    let n = pick(a.samples, &file.samples).unwrap_or(1);
    let (state, action) = match &a.state {
        Some(p) => {
            let action = require(a.action.as_deref(), "--action with --state")?;
            let action = env::Action::from_name(action)
                .ok_or_else(|| Failure::Args(format!("unknown action `{action}`")))?;
            (io::read_state(p)?, action)
        }
        None => {
            let name = require(pick(a.scenario.clone(), &file.scenario), "--scenario or --state")?;
            let steps = rollout(&scenario_by_name(&name)?);
            let t = steps
                .get(a.step)
                .ok_or_else(|| Failure::Args(format!("`{name}` has {} steps", steps.len())))?;
            let action = match a.action.as_deref() {
                Some(x) => env::Action::from_name(x).ok_or_else(|| Failure::Args(format!("unknown action `{x}`")))?,
                None => t.action,
            };
            (t.state.clone(), action)
        }
    };
    let loaded = Loaded::new(&a.model, file)?;
    let m = loaded.model(seed);
    let before = model::observables(&state);
    let mut text = String::new();
    let mut changed: BTreeMap<String, usize> = BTreeMap::new();
    let mut invalid = 0;
    for i in 0..n {
        let mut rng = substream(seed, &format!("simulate/{i}"));
        let next = match m.sample(&state, action, &mut rng) {
            Ok(next) => next,
            Err(ModelError::InvalidSample { state, .. }) => {
                invalid += 1;
                *state
            }
            Err(e) => return Err(e.into()),
        };
        for (path, v) in model::observables(&next) {
            if before.get(&path) != Some(&v) {
                *changed.entry(path).or_default() += 1;
            }
        }
        text.push_str(&canonicalize(&next).to_text());
        text.push('\n');
    }
    if let Some(p) = pick(a.out, &file.out) {
        io::write_text(&p, &text)?;
    }
    if !quiet {
        println!("{n} samples of `{}` from {}", action.name(), m.name());
        if invalid > 0 {
            println!("{invalid} samples break a state invariant and are kept as drawn");
        }
        let mut rows: Vec<(&String, &usize)> = changed.iter().collect();
        rows.sort_by(|x, y| y.1.cmp(x.1).then(x.0.cmp(y.0)));
        for (path, c) in rows {
            println!("{c:>6}/{n} {path}");
        }
    }
    Ok(())
}

fn print_plans(c: &PlanComparison) {
    println!("{} ({}, {} trials, model {})", c.scenario, c.reward.name(), c.trials, c.model);
    println!("{:<22} {:>10} {:>9} {:>10} {:>9}", "plan", "env", "steps", "model", "steps");
    for p in &c.plans {
        println!(
            "{:<22} {:>10.4} {:>9.2} {:>10.4} {:>9.2}",
            p.plan, p.env.mean_reward, p.env.mean_steps, p.model.mean_reward, p.model.mean_steps
        );
    }
    let order = |o: &Vec<Vec<String>>| o.iter().map(|g| g.join(" = ")).collect::<Vec<_>>().join(" > ");
    println!("env order: {}", order(&c.env_order));
    println!("model order: {}", order(&c.model_order));
    println!("agreement: {}", c.agreement);
}

pub fn plan(a: PlanArgs, file: &FileConfig, quiet: bool) -> Result<(), Failure> {
    let seed = seed(a.seed, file)?;
    let trials = pick(a.trials, &file.trials).unwrap_or(10);
    if trials == 0 {
        return Err(Failure::Args("--trials must be at least 1".into()));
    }
    let name = require(pick(a.scenario, &file.scenario), "--scenario")?;
    let sc = plan_scenario(&name)?;
    let loaded = Loaded::new(&a.model, file)?;
    let cmp = compare_plans(&sc, &*loaded.model(seed), trials, seed);
    if let Some(p) = pick(a.out, &file.out) {
        io::write_json(&p, &cmp)?;
    }
    if !quiet {
        print_plans(&cmp);
    }
    Ok(())
}

pub fn dump_mechanics(a: DumpArgs) -> Result<(), Failure> {
    write_or_print(a.out.as_deref(), &io::to_json(env::mechanics()))
}

pub fn dump_grammar(a: DumpArgs) -> Result<(), Failure> {
    write_or_print(a.out.as_deref(), GRAMMAR)
}
