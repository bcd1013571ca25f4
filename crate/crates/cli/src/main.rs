//! `lawmix`: collect trajectories, fit law weights, evaluate, simulate and
//! plan.
//!
//! Exit codes: 0 ok, 2 parse error, 3 numeric failure, 4 I/O error,
//! 5 bad arguments.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Failure, FileConfig};

#[derive(Parser, Debug)]
#[command(name = "lawmix", version, about = "Mixture-of-laws world models for a survival gridworld")]
struct Cli {
    /// TOML file with default values; flags win.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Suppress summaries on stdout.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the scripted exploration policy and write a trajectory.
    Collect(CollectArgs),
    /// Fit law weights to a trajectory.
    Fit(FitArgs),
    /// Rank and fidelity evaluation over scenarios.
    Eval(EvalArgs),
    /// Sample next states from a model.
    Simulate(SimulateArgs),
    /// Compare plans under the environment and a model.
    Plan(PlanArgs),
    /// Print the mechanics table as JSON.
    DumpMechanics(DumpArgs),
    /// Print the law language grammar.
    DumpGrammar(DumpArgs),
}

#[derive(Args, Debug, Default)]
pub struct ModelArgs {
    /// `oracle`, `env`, `random`, or a bundle JSON path.
    #[arg(long)]
    pub model: Option<String>,
    /// Law files; used when no `--model` is given.
    #[arg(long, num_args = 1..)]
    pub laws: Vec<std::path::PathBuf>,
    /// Built-in law set: `standard` or `full`.
    #[arg(long)]
    pub corpus: Option<String>,
    /// Weights JSON for `--laws` / `--corpus`.
    #[arg(long)]
    pub weights: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct CollectArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Step budget.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub width: Option<i32>,
    #[arg(long)]
    pub height: Option<i32>,
    /// Trajectory output (JSON lines).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Trajectory input (JSON lines).
    #[arg(long)]
    pub data: Option<std::path::PathBuf>,
    #[arg(long, num_args = 1..)]
    pub laws: Vec<std::path::PathBuf>,
    #[arg(long)]
    pub corpus: Option<String>,
    /// Weights output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Fit report output.
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
    /// Bundle output; law source and weights are written beside it.
    #[arg(long)]
    pub bundle: Option<std::path::PathBuf>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub memory: Option<usize>,
    #[arg(long)]
    pub l2: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `core`, `extended`, `all`, `deterministic`, or comma-separated names.
    #[arg(long)]
    pub scenarios: Option<String>,
    #[arg(long)]
    pub distractors: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Scenario supplying the state and action.
    #[arg(long)]
    pub scenario: Option<String>,
    /// Transition index within the scenario rollout.
    #[arg(long, default_value_t = 0)]
    pub step: usize,
    /// Canonical state JSON; overrides `--scenario`.
    #[arg(long)]
    pub state: Option<std::path::PathBuf>,
    #[arg(long)]
    pub action: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sampled states output (JSON lines).
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub scenario: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comparison output.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let quiet = cli.quiet || file.quiet.unwrap_or(false);
    match cli.command {
        Command::Collect(a) => commands::collect(a, &file, quiet),
        Command::Fit(a) => commands::fit(a, &file, quiet),
        Command::Eval(a) => commands::eval(a, &file, quiet),
        Command::Simulate(a) => commands::simulate(a, &file, quiet),
        Command::Plan(a) => commands::plan(a, &file, quiet),
        Command::DumpMechanics(a) => commands::dump_mechanics(a),
        Command::DumpGrammar(a) => commands::dump_grammar(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 5 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
