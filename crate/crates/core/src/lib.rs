//! Deterministic federated learning simulation with per-client hyperparameter
//! tuning by population metaheuristics.
//!
//! The crate is split into four layers:
//!
//! - [`metaheuristics`]: African Vulture Optimization plus PSO and GWO
//!   baselines behind a common minimize contract.
//! - [`nn`]: a small softmax MLP with analytic gradients and an SGD local
//!   update with momentum and weight decay.
//! - [`data`]: IDX loading, synthetic blob generation and subsampling.
//! - [`fl`]: partitioning, client selection, FedAvg / FedAVO client updates,
//!   weighted aggregation and per-round metrics.
//!
//! Every random decision is drawn from a stream derived from an explicit
//! seed (see [`rng`]), so a run is reproducible bit for bit regardless of
//! how work is scheduled across threads.

pub mod data;
pub mod fl;
pub mod metaheuristics;
pub mod nn;
pub mod rng;

pub use data::Dataset;
pub use fl::{Algorithm, ClientShard, FlConfig, RoundMetrics};
pub use metaheuristics::{AvoConfig, Optimum, SearchSpace, Tuner};
pub use nn::{HyperParams, ModelParams, ModelSpec, UpdateMode};
