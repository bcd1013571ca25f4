//! End-to-end acceptance checks, one PASS/FAIL line each.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;

use lawmix_core::corpus;
use lawmix_core::env::{add_object, blank_state, initial_state, set_player_inventory_item, set_tile_material, Action};
use lawmix_core::eval::{all_scenarios, deterministic, evaluate_suite, rank_truth, raw_distance, OracleModel, RandomModel};
use lawmix_core::explore::collect_from;
use lawmix_core::inference::{fit_weights, Transition};
use lawmix_core::lang::LawLibrary;
use lawmix_core::model::reconstruct;
use lawmix_core::planner::{compare_plans, plan_scenario};
use lawmix_core::rng::substream;
use lawmix_core::state::{Position, Prim};
use lawmix_core::{FitConfig, Model, ModelConfig, PreparedDataset};

const ORACLE_TOL: f64 = 1e-9;
const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-4;
const FD_FIXTURES: u64 = 60;
const BASELINE_TRIALS: usize = 100_000;
const BASELINE_TOL: f64 = 0.01;
const MRR_FLOOR: f64 = 0.9;
const CALIBRATION_TOL: f64 = 0.05;
const PLAN_TRIALS: usize = 10;
const SEED: u64 = 7;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, took: Duration, detail: String) -> Outcome {
    ensure(took <= limit, format!("{detail}; limit {:.0} s", limit.as_secs_f64()))
}

fn seed_trajectory() -> Vec<Transition> {
    collect_from(&initial_state(SEED, (16, 16)).unwrap(), 400, SEED)
}

fn likelihood_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = substream(1, "oracle");
    let mut worst: f64 = 0.0;
    let fixtures = 300;
    for _ in 0..fixtures {
        let current = r.gen_range(0..5);
        let s = set_player_inventory_item(&blank_state((7, 7), 0).unwrap(), "sapling", current).unwrap();
        let mut src = String::new();
        let mut supports = Vec::new();
        for k in 0..r.gen_range(1..=3) {
            let mut values: Vec<i64> = (0..5).collect();
            values.shuffle(&mut r);
            values.truncate(r.gen_range(1..=3));
            let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            src.push_str(&format!(
                "law l{k} {{ when: true effect: {{ player.inventory.sapling <- dist[{}] }} }}\n",
                list.join(", ")
            ));
            supports.push(values);
        }
        let lib = LawLibrary::parse(&src).map_err(|e| e.to_string())?;
        let w: Vec<f64> = (0..lib.len()).map(|_| r.gen_range(-1.0..3.0)).collect();
        let mut m = Model::new(lib);
        m.set_weights(w.clone()).map_err(|e| e.to_string())?;

        let observed = r.gen_range(0..5);
        let mut sampled: Vec<i64> = Vec::new();
        for v in supports.iter().flatten().copied().chain([current as i64]) {
            if !sampled.contains(&v) {
                sampled.push(v);
            }
        }
        let mut domain = sampled.clone();
        if !domain.contains(&observed) {
            domain.push(observed);
        }
        let eps = lawmix_core::model::DEFAULT_EPSILON;
        let brute = |domain: &[i64]| -> Vec<f64> {
            let mass: Vec<f64> = domain
                .iter()
                .map(|u| {
                    supports
                        .iter()
                        .zip(&w)
                        .map(|(sup, wi)| {
                            let phi = if sup.contains(u) {
                                (1.0 - eps) / sup.len() as f64
                            } else {
                                eps / domain.len() as f64
                            };
                            phi.powf(*wi)
                        })
                        .product()
                })
                .collect();
            let z: f64 = mass.iter().sum();
            mass.iter().map(|x| x / z).collect()
        };
        let path = "player/inventory/sapling";
        let want = brute(&sampled);
        let got = m.path_distribution(&s, Action::Noop, path).map_err(|e| e.to_string())?;
        if got.len() != sampled.len() {
            return Err(format!("support size {} vs {}", got.len(), sampled.len()));
        }
        for (v, p) in got {
            let Prim::Int(v) = v else { return Err("non-integer support".into()) };
            let k = sampled.iter().position(|x| *x == v).ok_or("value outside domain")?;
            worst = worst.max((p - want[k]).abs());
        }
        let next = set_player_inventory_item(&s, "sapling", observed as i32).unwrap();
        let lp = m.path_log_probs(&s, Action::Noop, &next).map_err(|e| e.to_string())?[path];
        let full = brute(&domain);
        let k = domain.iter().position(|x| *x == observed).unwrap();
        worst = worst.max((lp - full[k].ln()).abs());
    }
    let took = start.elapsed();
    let detail = format!("{fixtures} fixtures, max error {worst:.2e}, {:.2} s", took.as_secs_f64());
    if worst > ORACLE_TOL {
        return Err(detail);
    }
    within(Duration::from_secs(1), took, detail)
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let full = corpus::full();
    let names = full.names();
    let mut r = substream(2, "fd");
    let mut worst: f64 = 0.0;
    let mut coords = 0;
    for fixture in 0..FD_FIXTURES {
        let mut picked = names.clone();
        picked.shuffle(&mut r);
        let chosen = picked[..r.gen_range(1..=5)].iter().map(|n| full.get(n).unwrap().clone()).collect();
        let lib = LawLibrary::from_laws(chosen).map_err(|e| e.to_string())?;
        let mut s = initial_state(fixture, (9, 9)).unwrap();
        let mut data = Vec::new();
        for _ in 0..r.gen_range(1..=20) {
            let a = Action::ALL[r.gen_range(0..Action::ALL.len())];
            let next = lawmix_core::env::transition(&s, a);
            data.push(Transition { state: s, action: a, next: next.clone() });
            s = next;
        }
        let ds = PreparedDataset::new(&lib, &data, ModelConfig::default()).map_err(|e| e.to_string())?;
        let w: Vec<f64> = (0..lib.len()).map(|_| r.gen_range(-0.5..2.5)).collect();
        let (_, g) = ds.nll_and_grad(&w);
        for i in 0..w.len() {
            let (mut up, mut down) = (w.clone(), w.clone());
            up[i] += FD_STEP;
            down[i] -= FD_STEP;
            let fd = (ds.nll(&up) - ds.nll(&down)) / (2.0 * FD_STEP);
            let rel = (g[i] - fd).abs() / g[i].abs().max(fd.abs()).max(1.0);
            worst = worst.max(rel);
            coords += 1;
        }
    }
    let took = start.elapsed();
    let detail = format!(
        "{FD_FIXTURES} fixtures, {coords} coordinates, max relative error {worst:.2e}, {:.2} s",
        took.as_secs_f64()
    );
    if worst > FD_TOL {
        return Err(detail);
    }
    within(Duration::from_secs(10), took, detail)
}

fn routing_sparsity(data: &[Transition]) -> Outcome {
    let never = LawLibrary::parse("law never_fires { when: player.inventory.health > 9 effect: { player.thirst <- dist[0.0] } }")
        .map_err(|e| e.to_string())?;
    let lib = corpus::full().merge(never).map_err(|e| e.to_string())?;
    let ds = PreparedDataset::new(&lib, data, ModelConfig::default()).map_err(|e| e.to_string())?;
    let idle: Vec<usize> = (0..lib.len()).filter(|&i| ds.activation_counts()[i] == 0).collect();
    let base = vec![1.0; lib.len()];
    let mut bumped = base.clone();
    for &i in &idle {
        bumped[i] = 37.25;
    }
    let (f0, g0) = ds.nll_and_grad(&base);
    let (f1, g1) = ds.nll_and_grad(&bumped);
    let mut same = f0.to_bits() == f1.to_bits() && g0.iter().zip(&g1).all(|(a, b)| a.to_bits() == b.to_bits());
    same &= idle.iter().all(|&i| g0[i].to_bits() == 0.0f64.to_bits());
    let mut a = Model::new(lib.clone());
    let mut b = Model::new(lib);
    a.set_weights(base).map_err(|e| e.to_string())?;
    b.set_weights(bumped).map_err(|e| e.to_string())?;
    let mut scored = 0;
    for t in data.iter().step_by(10) {
        let cands = [t.next.clone(), t.state.clone()];
        let x = a.log_likelihood_batch(&t.state, t.action, &cands).map_err(|e| e.to_string())?;
        let y = b.log_likelihood_batch(&t.state, t.action, &cands).map_err(|e| e.to_string())?;
        same &= x.iter().zip(&y).all(|(p, q)| p.to_bits() == q.to_bits());
        scored += cands.len();
    }
    ensure(same, format!("{} never-active laws perturbed; nll, gradient and {scored} scores bit-identical", idle.len()))
}

fn random_baseline() -> Outcome {
    let start = Instant::now();
    let mut r = substream(4, "uniform");
    let mut total = 0.0;
    for _ in 0..BASELINE_TRIALS {
        let scores: Vec<f64> = (0..9).map(|_| r.gen()).collect();
        total += rank_truth(scores[0], &scores[1..]).reciprocal();
    }
    let mrr = total / BASELINE_TRIALS as f64;
    let want = lawmix_core::eval::random_baseline_mrr(9);
    let took = start.elapsed();
    let detail = format!("MRR {mrr:.4} vs H9/9 = {want:.4} over {BASELINE_TRIALS} trials");
    if (mrr - want).abs() > BASELINE_TOL {
        return Err(detail);
    }
    within(Duration::from_secs(30), took, detail)
}

fn oracle_ceiling() -> Outcome {
    let start = Instant::now();
    let suite = deterministic(all_scenarios());
    let r = evaluate_suite(&OracleModel, &suite, 8, SEED).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let detail = format!(
        "{} deterministic scenarios, rank@1 {:.4}, raw distance {:.4}",
        suite.len(),
        r.rank1,
        r.raw_distance
    );
    if r.rank1 != 1.0 || r.raw_distance != 0.0 {
        return Err(detail);
    }
    within(Duration::from_secs(60), took, detail)
}

fn learning_efficacy(fitted: &Model, fit_time: Duration) -> Outcome {
    let start = Instant::now();
    let suite = deterministic(all_scenarios());
    let mrr = |m: &dyn lawmix_core::eval::EvaluatableWorldModel| {
        evaluate_suite(m, &suite, 8, SEED).map(|r| r.mrr).map_err(|e| e.to_string())
    };
    let fit = mrr(fitted)?;
    let unfit = mrr(&Model::new(corpus::full()))?;
    let random = mrr(&RandomModel { seed: SEED })?;
    let took = start.elapsed() + fit_time;
    let detail = format!("fitted MRR {fit:.4}, unfitted {unfit:.4}, random {random:.4}");
    if !(fit >= MRR_FLOOR && fit > unfit && fit > random) {
        return Err(detail);
    }
    within(Duration::from_secs(600), took, detail)
}

fn skeleton_calibration() -> Outcome {
    let mut s = blank_state((9, 9), 0).unwrap();
    for x in 3..=5 {
        s = set_tile_material(&s, Position::new(x, 1), "path").unwrap();
    }
    let s = add_object(&s, "skeleton", Position::new(4, 1), &serde_json::Map::new()).unwrap();
    let id = s.next_entity_id - 1;
    let path = format!("objects/{id}/position/x");
    let mut r = substream(SEED, "coin");
    let mut stays = 0;
    let data: Vec<Transition> = (0..500)
        .map(|_| {
            let x = if r.gen_bool(0.5) {
                stays += 1;
                4
            } else if r.gen_bool(0.5) {
                3
            } else {
                5
            };
            let values = [(path.clone(), Prim::Int(x))].into_iter().collect();
            Transition { state: s.clone(), action: Action::Noop, next: reconstruct(&s, &values).unwrap() }
        })
        .collect();
    let std = corpus::standard();
    let lib = LawLibrary::from_laws(vec![
        std.get("skeleton_idle").unwrap().clone(),
        std.get("skeleton_wander").unwrap().clone(),
    ])
    .map_err(|e| e.to_string())?;
    let (m, _) = fit_weights(&lib, &data, &FitConfig::default()).map_err(|e| e.to_string())?;
    let d = m.path_distribution(&s, Action::Noop, &path).map_err(|e| e.to_string())?;
    let stay = d.iter().find(|(v, _)| *v == Prim::Int(4)).map_or(0.0, |(_, p)| *p);
    let empirical = stays as f64 / 500.0;
    ensure(
        (stay - empirical).abs() <= CALIBRATION_TOL,
        format!("fitted stay probability {stay:.4}, empirical {empirical:.4}"),
    )
}

fn planning(fitted: &Model) -> Outcome {
    let start = Instant::now();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, want) in [("stone_miner", Some((3.0, 0.0))), ("sword_maker", Some((4.0, 2.0))), ("zombie_fighter", None)] {
        let c = compare_plans(&plan_scenario(name).map_err(|e| e.to_string())?, fitted, PLAN_TRIALS, SEED);
        let env: Vec<f64> = c.plans.iter().map(|p| p.env.mean_reward).collect();
        let model: Vec<f64> = c.plans.iter().map(|p| p.model.mean_reward).collect();
        ok &= c.agreement;
        ok &= match want {
            Some((a, b)) => env == [a, b],
            None => (env[0] - 2.0).abs() < 1e-12 && env[0] > env[1],
        };
        lines.push(format!("{name} env {env:?} model {model:?}"));
    }
    let took = start.elapsed();
    let detail = lines.join("; ");
    ensure(ok, detail.clone())?;
    within(Duration::from_secs(300), took, detail)
}

fn one_leaf() -> Outcome {
    let truth = blank_state((9, 9), 0).unwrap();
    let wrong = set_player_inventory_item(&truth, "wood", 1).unwrap();
    let d = raw_distance(&wrong, &truth);
    ensure(d == 1, format!("raw distance {d}"))
}

fn run(bin: &str, dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin)
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| format!("{bin}: {e}"))?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr)))
    }
}

fn cli_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_lawmix");
    let commands: [&[&str]; 9] = [
        &["collect", "--seed", "7", "--steps", "200", "--out", "t.jsonl"],
        &["fit", "--data", "t.jsonl", "--corpus", "full", "--out", "w.json", "--report", "r.json", "--bundle", "b.json"],
        &["eval", "--model", "b.json", "--scenarios", "deterministic", "--seed", "7", "--out", "e.json"],
        &["eval", "--model", "random", "--scenarios", "core", "--seed", "7", "--out", "e2.json"],
        &["simulate", "--model", "b.json", "--scenario", "craft_wooden_pickaxe", "--samples", "20", "--seed", "7", "--out", "s.jsonl"],
        &["plan", "--model", "b.json", "--scenario", "zombie_fighter", "--trials", "3", "--seed", "7", "--out", "p.json"],
        &["plan", "--model", "oracle", "--scenario", "stone_miner", "--trials", "2", "--seed", "7", "--out", "p2.json"],
        &["dump-mechanics", "--out", "m.json"],
        &["dump-grammar", "--out", "g.ebnf"],
    ];
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    for d in &dirs {
        for c in commands {
            let mut args = vec!["-q"];
            args.extend_from_slice(c);
            run(bin, d.path(), &args)?;
        }
    }
    let mut files: Vec<String> = std::fs::read_dir(dirs[0].path())
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    let mut differing = Vec::new();
    for f in &files {
        let a = std::fs::read(dirs[0].path().join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dirs[1].path().join(f)).map_err(|e| e.to_string())?;
        if a != b || a.is_empty() {
            differing.push(f.clone());
        }
    }
    ensure(
        differing.is_empty() && files.len() >= 13,
        format!("{} commands, {} files compared, differing: {differing:?}", commands.len(), files.len()),
    )
}

fn report(n: usize, name: &str, outcome: Outcome, failures: &mut usize) {
    match outcome {
        Ok(d) => println!("PASS {n:>2} {name}: {d}"),
        Err(d) => {
            *failures += 1;
            println!("FAIL {n:>2} {name}: {d}");
        }
    }
}

fn main() -> ExitCode {
    let mut failures = 0;
    let data = seed_trajectory();
    let fit_start = Instant::now();
    let fitted = fit_weights(&corpus::full(), &data, &FitConfig::default()).map(|(m, _)| m);
    let fit_time = fit_start.elapsed();

    report(1, "likelihood oracle", likelihood_oracle(), &mut failures);
    report(2, "gradient check", gradient_check(), &mut failures);
    report(3, "routing sparsity", routing_sparsity(&data), &mut failures);
    report(4, "random baseline", random_baseline(), &mut failures);
    report(5, "oracle ceiling", oracle_ceiling(), &mut failures);
    match &fitted {
        Ok(m) => {
            report(6, "learning efficacy", learning_efficacy(m, fit_time), &mut failures);
            report(7, "skeleton calibration", skeleton_calibration(), &mut failures);
            report(8, "planning orderings", planning(m), &mut failures);
        }
        Err(e) => {
            report(6, "learning efficacy", Err(e.to_string()), &mut failures);
            report(7, "skeleton calibration", skeleton_calibration(), &mut failures);
            report(8, "planning orderings", Err(e.to_string()), &mut failures);
        }
    }
    report(9, "one-leaf fidelity", one_leaf(), &mut failures);
    report(10, "cli determinism", cli_determinism(), &mut failures);

    if failures == 0 {
        println!("acceptance: 10/10 passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} failed");
        ExitCode::FAILURE
    }
}
