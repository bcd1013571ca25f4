//! Mixture-of-laws world models for a pure survival gridworld.
//!
//! The crate is organized bottom-up:
//!
//! - [`state`]: the world-state data model, canonical documents and leaf patches
//! - [`env`]: the MiniCraft transition function and setup utilities
//! - [`lang`]: the law DSL (parser, checker, evaluator, pretty-printer)
//! - [`model`]: the product-of-experts likelihood and forward sampling
//! - [`inference`]: NLL gradients and L-BFGS weight fitting
//! - [`eval`]: mutators, scenarios, ranking and fidelity metrics
//! - [`planner`]: options, plans and rollout comparison
//! - [`explore`]: the scripted data-collection policy
//! - [`io`]: trajectory, weight and bundle files
//!
//! Numeric code is generic over [`Scalar`]; the aliases below fix it to `f64`.

pub mod corpus;
pub mod env;
pub mod eval;
pub mod error;
pub mod explore;
pub mod inference;
pub mod io;
pub mod lang;
pub mod model;
pub mod planner;
pub mod rng;
pub mod scalar;
pub mod state;

pub use scalar::Scalar;

pub type Model = model::MixtureModel<f64>;
pub type ModelConfig = model::ModelConfig<f64>;
pub type FitConfig = inference::FitConfig<f64>;
pub type LbfgsConfig = inference::LbfgsConfig<f64>;
pub type PreparedDataset = inference::PreparedDataset<f64>;
pub type PathFactors = model::PathFactors<f64>;
