//! Federated orchestration: partitioning, client selection, FedAvg and
//! tuned client updates, weighted aggregation and per-round metrics.

mod aggregate;
mod client;
mod partition;
mod server;

pub use aggregate::aggregate;
pub use client::{client_update_fedavg, client_update_fedavo, client_update_tuned, decode_hyperparams, ClientOutcome};
pub use partition::{partition_iid, partition_noniid, ClientShard, VALIDATION_FRACTION};
pub use server::{initial_params, run_federated, select_clients, ClientReport, RoundMetrics};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::data::DataError;
use crate::metaheuristics::{AvoConfig, OptimError, PsoConfig, SearchSpace, Tuner};
use crate::nn::{HyperParams, NnError, UpdateMode};

#[derive(Debug, Error)]
pub enum FlError {
    #[error("invalid federated config: {0}")]
    InvalidConfig(String),
    #[error("not enough data: need {needed} samples, have {available}")]
    NotEnoughData { needed: usize, available: usize },
    #[error("class {class} exhausted: needed {needed} more samples, {available} left")]
    ClassExhausted { class: usize, needed: usize, available: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("round {round}, client {client}: {source}")]
    Client { round: usize, client: usize, source: Box<FlError> },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Optim(#[from] OptimError),
}

pub type Result<T, E = FlError> = std::result::Result<T, E>;

/// Index of the local-epoch coordinate in a hyperparameter search space.
pub const EPOCHS_DIM: usize = 3;
pub const MAX_EPOCHS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    FedAvg,
    FedAvo,
    FedPso,
    FedGwo,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::FedAvg, Algorithm::FedAvo, Algorithm::FedPso, Algorithm::FedGwo];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FedAvg => "fedavg",
            Algorithm::FedAvo => "fedavo",
            Algorithm::FedPso => "fedpso",
            Algorithm::FedGwo => "fedgwo",
        }
    }

    /// The optimizer that tunes client hyperparameters, if any.
    pub fn tuner(self) -> Option<Tuner> {
        match self {
            Algorithm::FedAvg => None,
            Algorithm::FedAvo => Some(Tuner::Avo(AvoConfig::default())),
            Algorithm::FedPso => Some(Tuner::Pso(PsoConfig::default())),
            Algorithm::FedGwo => Some(Tuner::Gwo),
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = FlError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| FlError::InvalidConfig(format!("unknown algorithm {s:?}")))
    }
}

/// `(η, β, λ, E)` bounds for IID data.
pub fn iid_search_space() -> SearchSpace {
    SearchSpace::new(vec![1e-5, 0.1, 1e-4, 1.0], vec![0.01, 0.9, 0.01, 5.0], vec![EPOCHS_DIM])
        .expect("static bounds are valid")
}

/// `(η, β, λ, E)` bounds for non-IID data.
pub fn noniid_search_space() -> SearchSpace {
    SearchSpace::new(vec![0.01, 1e-10, 1e-10, 1.0], vec![0.1, 1e-9, 1e-8, 5.0], vec![EPOCHS_DIM])
        .expect("static bounds are valid")
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlConfig {
    pub num_clients: usize,
    /// Fraction of clients selected per round.
    pub client_fraction: f64,
    pub batch_size: usize,
    pub rounds: usize,
    pub algorithm: Algorithm,
    /// Optimizer generations per client update.
    pub tuning_epochs: usize,
    pub population_size: usize,
    pub search_space: SearchSpace,
    /// Used by FedAvg, and as the fallback when tuning finds nothing.
    pub fixed_hp: HyperParams,
    pub seed: u64,
    pub update_mode: UpdateMode,
    /// End the run after the first round whose global accuracy reaches this.
    pub stop_at_accuracy: Option<f64>,
}

impl Default for FlConfig {
    fn default() -> Self {
        Self {
            num_clients: 10,
            client_fraction: 1.0,
            batch_size: 16,
            rounds: 10,
            algorithm: Algorithm::FedAvo,
            tuning_epochs: 3,
            population_size: 50,
            search_space: iid_search_space(),
            fixed_hp: HyperParams { eta: 0.01, beta: 0.0, lambda: 0.0, epochs: 5 },
            seed: 0,
            update_mode: UpdateMode::Velocity,
            stop_at_accuracy: None,
        }
    }
}

impl FlConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FlError::InvalidConfig(msg));
        if self.num_clients == 0 {
            return bad("num_clients must be at least 1".into());
        }
        if !(self.client_fraction > 0.0 && self.client_fraction <= 1.0) {
            return bad(format!("client_fraction must be in (0, 1], got {}", self.client_fraction));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        self.fixed_hp.validate()?;
        if let Some(a) = self.stop_at_accuracy {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("stop_at_accuracy must be in [0, 1], got {a}"));
            }
        }
        if self.algorithm.tuner().is_none() {
            return Ok(());
        }
        if self.tuning_epochs == 0 {
            return bad("tuning_epochs must be at least 1".into());
        }
        if self.population_size < 2 {
            return bad("population_size must be at least 2".into());
        }
        let space = &self.search_space;
        if space.dims() != 4 || !space.integer_dims().contains(&EPOCHS_DIM) {
            return bad("search space must be (eta, beta, lambda, epochs) with integer epochs".into());
        }
        if space.lower()[..EPOCHS_DIM].iter().any(|&l| l < 0.0) {
            return bad("eta, beta and lambda bounds must be nonnegative".into());
        }
        if space.lower()[EPOCHS_DIM] < 1.0 || space.upper()[EPOCHS_DIM] > MAX_EPOCHS as f64 {
            return bad(format!("epoch bounds must lie within [1, {MAX_EPOCHS}]"));
        }
        Ok(())
    }

    /// Clients selected per round.
    pub fn clients_per_round(&self) -> usize {
        ((self.num_clients as f64 * self.client_fraction).floor() as usize).clamp(1, self.num_clients)
    }

    /// Objective calls per tuned client update: initial population plus
    /// one evaluation per member per generation.
    pub fn tuning_budget(&self) -> usize {
        match self.algorithm.tuner() {
            Some(_) => self.population_size * (1 + self.tuning_epochs),
            None => 0,
        }
    }
}
