//! Minimal softmax MLP: forward pass, cross-entropy, analytic gradients and
//! the SGD local update with momentum and weight decay.

mod loss;
mod model;
mod sgd;
mod train;

pub use loss::cross_entropy;
pub use model::{forward, gradient, ModelParams, ModelSpec};
pub use sgd::{sgd_step, HyperParams, UpdateMode};
pub use train::{evaluate, train_local, Evaluation, Trained};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NnError {
    #[error("invalid model spec: {0}")]
    InvalidSpec(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("diverged")]
    Diverged,
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),
}

pub type Result<T, E = NnError> = std::result::Result<T, E>;

/// Borrowed view of labelled rows: `inputs` is row-major `len × dim`.
#[derive(Debug, Clone, Copy)]
pub struct Batch<'a> {
    pub inputs: &'a [f64],
    pub labels: &'a [usize],
    pub dim: usize,
}

impl<'a> Batch<'a> {
    pub fn new(inputs: &'a [f64], labels: &'a [usize], dim: usize) -> Result<Self> {
        if dim == 0 || inputs.len() != labels.len() * dim {
            return Err(NnError::DimensionMismatch { expected: labels.len() * dim, found: inputs.len() });
        }
        Ok(Self { inputs, labels, dim })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }
}
