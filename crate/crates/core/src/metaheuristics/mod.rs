//! Population-based continuous minimizers.
//!
//! All optimizers share one contract: given a [`SearchSpace`], an objective
//! (lower is better), a population size and a seed, they return an
//! [`Optimum`] holding the all-time best position, its fitness and the
//! per-generation best-fitness trace.

mod avo;
mod gwo;
mod levy;
mod pso;
mod space;

pub use avo::{
    avo_generation, avo_optimize, develop_stage1_step, develop_stage2_step, exploration_step, select_reference_vulture,
    selection_probabilities, starvation_rate, AvoConfig, Population, Stage, Vulture,
};
pub use gwo::gwo_optimize;
pub use levy::{levy_flight, mantegna_sigma};
pub use pso::{pso_optimize, PsoConfig};
pub use space::SearchSpace;

use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OptimError {
    #[error("empty population")]
    EmptyPopulation,
    #[error("non-finite fitness")]
    NonFiniteFitness,
    #[error("need two leaders")]
    NeedTwoLeaders,
    #[error("iteration out of range: {iteration} > {max_iterations}")]
    IterationOutOfRange { iteration: usize, max_iterations: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid search space: {0}")]
    InvalidSpace(String),
    #[error("invalid optimizer config: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = OptimError> = std::result::Result<T, E>;

/// Outcome of one optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    /// All-time best position, integer dimensions rounded.
    pub position: Vec<f64>,
    pub fitness: f64,
    /// Best fitness after initialization (entry 0) and after every
    /// generation. Monotone nonincreasing.
    pub trace: Vec<f64>,
    /// Number of objective calls.
    pub evaluations: usize,
    /// Moves rejected because the objective returned a non-finite value.
    pub rejected: usize,
}

impl Optimum {
    /// The trace as `(generation, best_fitness)` records.
    pub fn trace_records(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.trace.iter().copied().enumerate()
    }

    /// `false` when every evaluation failed.
    pub fn found_finite(&self) -> bool {
        self.fitness.is_finite()
    }
}

/// Which optimizer drives a tuning run.
#[derive(Debug, Clone, PartialEq)]
pub enum Tuner {
    Avo(AvoConfig),
    Pso(PsoConfig),
    Gwo,
}

impl Tuner {
    /// Runs the optimizer for `iterations` generations, overriding whatever
    /// iteration count the embedded config carries.
    pub fn optimize<F>(
        &self,
        space: &SearchSpace,
        objective: F,
        population_size: usize,
        iterations: usize,
        seed: u64,
    ) -> Result<Optimum>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        match self {
            Tuner::Avo(cfg) => {
                let cfg = AvoConfig { max_iterations: iterations, ..cfg.clone() };
                avo_optimize(space, objective, &cfg, population_size, seed)
            }
            Tuner::Pso(cfg) => {
                let cfg = PsoConfig { max_iterations: iterations, ..cfg.clone() };
                pso_optimize(space, objective, &cfg, population_size, seed)
            }
            Tuner::Gwo => gwo_optimize(space, objective, population_size, iterations, seed),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Tuner::Avo(_) => "avo",
            Tuner::Pso(_) => "pso",
            Tuner::Gwo => "gwo",
        }
    }
}

/// Evaluates every position at its snapped point. Non-finite results come
/// back as `None`. Output order matches input order.
pub(crate) fn evaluate_all<F>(space: &SearchSpace, positions: &[Vec<f64>], objective: &F) -> Vec<Option<f64>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    positions
        .par_iter()
        .map(|p| {
            let f = objective(&space.snap(p));
            f.is_finite().then_some(f)
        })
        .collect()
}

pub(crate) fn check_population_size(population_size: usize) -> Result<()> {
    if population_size < 2 {
        return Err(OptimError::InvalidConfig(format!("population size must be at least 2, got {population_size}")));
    }
    Ok(())
}
