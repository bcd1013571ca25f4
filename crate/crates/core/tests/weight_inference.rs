mod common;

use rand::seq::SliceRandom;
use rand::Rng;

use lawmix_core::corpus;
use lawmix_core::env::{add_object, blank_state, set_tile_material, transition, Action};
use lawmix_core::eval::Mutator;
use lawmix_core::inference::{fit_weights, minimize, objective, FitStatus, Transition};
use lawmix_core::lang::LawLibrary;
use lawmix_core::model::{observables, reconstruct};
use lawmix_core::rng::substream;
use lawmix_core::state::{Position, Prim, WorldState};
use lawmix_core::{FitConfig, LbfgsConfig, ModelConfig, PreparedDataset};

use common::walk;

fn central_difference(ds: &PreparedDataset, w: &[f64], i: usize, h: f64) -> f64 {
    let (mut up, mut down) = (w.to_vec(), w.to_vec());
    up[i] += h;
    down[i] -= h;
    (ds.nll(&up) - ds.nll(&down)) / (2.0 * h)
}

fn assert_gradient(ds: &PreparedDataset, w: &[f64]) {
    let (_, g) = ds.nll_and_grad(w);
    for (i, gi) in g.iter().enumerate() {
        let fd = central_difference(ds, w, i, 1e-5);
        let scale = gi.abs().max(fd.abs()).max(1.0);
        assert!((gi - fd).abs() / scale <= 1e-4, "coordinate {i}: {gi} vs {fd}");
    }
}

fn subset(lib: &LawLibrary, names: &[&str]) -> LawLibrary {
    LawLibrary::from_laws(names.iter().map(|n| lib.get(n).unwrap().clone()).collect()).unwrap()
}

#[test]
fn gradient_matches_finite_differences() {
    let full = corpus::full();
    let names = full.names();
    let mut r = substream(5, "fd");
    for fixture in 0..60u64 {
        let mut picked: Vec<&str> = names.clone();
        picked.shuffle(&mut r);
        let lib = subset(&full, &picked[..r.gen_range(1..=5)]);
        let xs: Vec<usize> = (0..r.gen_range(1..=20)).map(|_| r.gen_range(0..17)).collect();
        let data = walk(fixture, 9, &xs);
        let ds = PreparedDataset::new(&lib, &data, ModelConfig::default()).unwrap();
        let w: Vec<f64> = (0..lib.len()).map(|_| r.gen_range(-0.5..2.5)).collect();
        assert_gradient(&ds, &w);
    }
}

#[test]
fn exact_law_is_pushed_up() {
    let lib = subset(&corpus::standard(), &["move_right"]);
    let data = walk(1, 9, &[4]);
    let ds = PreparedDataset::new(&lib, &data, ModelConfig::default()).unwrap();
    let (_, g) = ds.nll_and_grad(&[1.0]);
    assert!(g[0] < 0.0);
    assert_gradient(&ds, &[1.0]);
}

#[test]
fn inactive_law_has_zero_gradient() {
    let lib = subset(&corpus::full(), &["move_left", "make_iron_sword", "hunger"]);
    let data = walk(2, 9, &[0, 1, 2, 3, 4, 0]);
    let ds = PreparedDataset::new(&lib, &data, ModelConfig::default()).unwrap();
    assert_eq!(ds.activation_counts()[1], 0);
    let (_, g) = ds.nll_and_grad(&[1.3, 0.7, 2.0]);
    assert_eq!(g[1].to_bits(), 0.0f64.to_bits());
    assert_ne!(g[2], 0.0);
}

#[test]
fn empty_dataset_is_flat() {
    let lib = corpus::standard();
    let ds = PreparedDataset::new(&lib, &[], ModelConfig::default()).unwrap();
    let (f, g) = ds.nll_and_grad(&vec![1.0; lib.len()]);
    assert_eq!(f, 0.0);
    assert!(g.iter().all(|x| *x == 0.0));
    assert!(fit_weights(&lib, &[], &FitConfig::default()).is_err());
}

#[test]
fn quadratic_converges_quickly() {
    let c = [3.0, -1.5, 0.25, 7.0];
    let r = minimize(
        |x: &[f64]| {
            let f = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
            (f, x.iter().zip(&c).map(|(a, b)| 2.0 * (a - b)).collect())
        },
        vec![0.0; 4],
        &LbfgsConfig { grad_tol: 1e-10, ..Default::default() },
    );
    assert_eq!(r.status, FitStatus::GradientTol);
    assert!(r.iterations <= 25);
    for (x, want) in r.x.iter().zip(&c) {
        assert!((x - want).abs() < 1e-8);
    }
}

fn rosenbrock(x: &[f64]) -> (f64, Vec<f64>) {
    let (a, b) = (x[0], x[1]);
    let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
    let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
    (f, g)
}

#[test]
fn rosenbrock_converges() {
    let r = minimize(rosenbrock, vec![-1.2, 1.0], &LbfgsConfig::default());
    assert_eq!(r.status, FitStatus::GradientTol);
    assert!((r.x[0] - 1.0).abs() < 1e-5 && (r.x[1] - 1.0).abs() < 1e-5, "{:?}", r.x);
}

#[test]
fn converged_start_takes_no_steps() {
    let r = minimize(rosenbrock, vec![1.0, 1.0], &LbfgsConfig::default());
    assert_eq!(r.iterations, 0);
    assert_eq!(r.x, vec![1.0, 1.0]);
    assert_eq!(r.status, FitStatus::GradientTol);
}

#[test]
fn non_finite_objective_stops_the_search() {
    let r = minimize(
        |x: &[f64]| if x[0] > 0.5 { (f64::NAN, vec![f64::NAN]) } else { (-x[0], vec![-1.0]) },
        vec![0.0],
        &LbfgsConfig::default(),
    );
    assert_eq!(r.status, FitStatus::LineSearchFailure);
    assert!(r.f.is_finite() && r.x[0] <= 0.5);
}

#[test]
fn accepted_values_never_increase() {
    let mut last = f64::INFINITY;
    for k in 0..40 {
        let cfg = LbfgsConfig { max_iter: k, ..Default::default() };
        let r = minimize(rosenbrock, vec![-1.2, 1.0], &cfg);
        assert!(r.f <= last, "iteration {k}");
        last = r.f;
    }

    let data = walk(3, 10, &(0..60).map(|i| (i * 7) % 17).collect::<Vec<_>>());
    let lib = corpus::full();
    let ds = PreparedDataset::new(&lib, &data, ModelConfig::default()).unwrap();
    let mut last = f64::INFINITY;
    for k in 0..12 {
        let cfg = LbfgsConfig { max_iter: k, ..Default::default() };
        let r = minimize(|w| objective(&ds, w, 0.0), vec![1.0; lib.len()], &cfg);
        assert!(r.f <= last);
        last = r.f;
    }
}

#[test]
fn fitting_is_deterministic() {
    let data = walk(8, 10, &(0..80).map(|i| (i * 11 + 3) % 17).collect::<Vec<_>>());
    let lib = corpus::full();
    let (_, a) = fit_weights(&lib, &data, &FitConfig::default()).unwrap();
    let (_, b) = fit_weights(&lib, &data, &FitConfig::default()).unwrap();
    assert_eq!(a, b);
    assert!(a.final_nll <= a.initial_nll);
    for (x, y) in a.weights.values().zip(b.weights.values()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

fn walled_walk(seed: u64, n: usize) -> Vec<Transition> {
    let mut s = blank_state((9, 9), seed).unwrap();
    for (x, y) in [(1, 1), (2, 5), (6, 2), (5, 6), (7, 4), (3, 7)] {
        s = set_tile_material(&s, Position::new(x, y), "stone").unwrap();
    }
    let mut r = substream(seed, "walk");
    let mut out = Vec::new();
    for _ in 0..n {
        let a = *[Action::MoveLeft, Action::MoveRight, Action::MoveUp, Action::MoveDown, Action::Noop]
            .choose(&mut r)
            .unwrap();
        let next = transition(&s, a);
        out.push(Transition { state: s, action: a, next: next.clone() });
        s = next;
    }
    out
}

#[test]
fn single_law_ranks_truth_over_illegal_moves() {
    let lib = subset(&corpus::standard(), &["move_left", "move_right", "move_up", "move_down"]);
    let (model, _) = fit_weights(&lib, &walled_walk(1, 120), &FitConfig::default()).unwrap();
    let mut r = substream(2, "mutants");
    let mut checked = 0;
    for t in walled_walk(2, 200) {
        let Some(bad) = Mutator::IllegalMovement.apply(&t.state, t.action, &t.next, &mut r) else {
            continue;
        };
        let truth = model.log_likelihood(&t.state, t.action, &t.next).unwrap();
        let wrong = model.log_likelihood(&t.state, t.action, &bad).unwrap();
        assert!(truth > wrong);
        checked += 1;
    }
    assert!(checked >= 20);
}

#[test]
fn correct_law_beats_its_contradiction() {
    let stay = LawLibrary::parse(
        "law stay_put {\n    when: action == \"move_right\"\n    effect: {\n        player.position.x <- dist[player.position.x]\n    }\n}\n",
    )
    .unwrap();
    let lib = subset(&corpus::standard(), &["move_right"]).merge(stay).unwrap();
    let mut data = Vec::new();
    for seed in 0..30u64 {
        let s = blank_state((9, 9), seed).unwrap();
        let s = lawmix_core::env::set_player_position(&s, Position::new((seed % 6) as i32, (seed % 9) as i32)).unwrap();
        data.push(Transition { next: transition(&s, Action::MoveRight), state: s, action: Action::MoveRight });
    }
    let (model, fit) = fit_weights(&lib, &data, &FitConfig::default()).unwrap();
    assert!(fit.weights["move_right"] > fit.weights["stay_put"]);
    for t in &data {
        let truth = observables(&t.next)["player/position/x"].clone();
        let d = model.path_distribution(&t.state, t.action, "player/position/x").unwrap();
        let p = d.iter().find(|(v, _)| *v == truth).unwrap().1;
        assert!(p >= 0.9, "{p}");
    }
}

fn skeleton_state() -> (WorldState, u32) {
    let mut s = blank_state((9, 9), 0).unwrap();
    for x in 3..=5 {
        s = set_tile_material(&s, Position::new(x, 1), "path").unwrap();
    }
    let s = add_object(&s, "skeleton", Position::new(4, 1), &serde_json::Map::new()).unwrap();
    (s.clone(), s.next_entity_id - 1)
}

#[test]
fn calibrates_to_a_coin_flip() {
    let (s, id) = skeleton_state();
    let path = format!("objects/{id}/position/x");
    let mut outcomes: Vec<i32> = [4; 250].into_iter().chain([3; 125]).chain([5; 125]).collect();
    outcomes.shuffle(&mut substream(9, "coin"));
    let data: Vec<Transition> = outcomes
        .into_iter()
        .map(|x| {
            let values = [(path.clone(), Prim::Int(x as i64))].into_iter().collect();
            Transition { state: s.clone(), action: Action::Noop, next: reconstruct(&s, &values).unwrap() }
        })
        .collect();
    let lib = subset(&corpus::standard(), &["skeleton_idle", "skeleton_wander"]);
    let (model, fit) = fit_weights(&lib, &data, &FitConfig::default()).unwrap();
    assert_ne!(fit.status, FitStatus::LineSearchFailure);
    let d = model.path_distribution(&s, Action::Noop, &path).unwrap();
    let stay = d.iter().find(|(v, _)| *v == Prim::Int(4)).unwrap().1;
    assert!((stay - 0.5).abs() <= 0.05, "{stay}");
}
