use rand::seq::SliceRandom;

use super::model::{batch_gradient, Workspace};
use super::{sgd_step, Batch, HyperParams, ModelParams, ModelSpec, NnError, Result, UpdateMode};
use crate::rng::stream;

/// Result of a local training run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trained {
    pub params: ModelParams,
    /// Number of SGD steps applied.
    pub steps: usize,
}

/// Runs `hp.epochs` passes over `data` in mini-batches of `batch_size`
/// (the last batch may be short). Each epoch reshuffles with a stream
/// derived from `seed` and the epoch index. Velocity starts at zero.
pub fn train_local(
    spec: &ModelSpec,
    params: &ModelParams,
    data: &Batch,
    hp: &HyperParams,
    batch_size: usize,
    mode: UpdateMode,
    seed: u64,
) -> Result<Trained> {
    spec.check_params(params)?;
    spec.check_batch(data)?;
    hp.validate()?;
    if data.is_empty() {
        return Err(NnError::EmptyBatch);
    }
    if batch_size == 0 {
        return Err(NnError::InvalidHyperParams("batch size must be at least 1".into()));
    }

    let mut params = params.clone();
    let mut velocity = vec![0.0; params.len()];
    let mut grad = vec![0.0; params.len()];
    let mut ws = Workspace::new(spec);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut steps = 0;
    for epoch in 0..hp.epochs {
        order.sort_unstable();
        order.shuffle(&mut stream(seed, &[epoch as u64]));
        for chunk in order.chunks_mut(batch_size) {
            batch_gradient(spec, params.values(), data, chunk, &mut grad, &mut ws);
            sgd_step(params.values_mut(), &grad, hp, &mut velocity, mode)?;
            steps += 1;
        }
    }
    if params.values().iter().any(|v| !v.is_finite()) {
        return Err(NnError::Diverged);
    }
    Ok(Trained { params, steps })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// Mean cross-entropy and argmax accuracy (ties go to the lowest class).
pub fn evaluate(spec: &ModelSpec, params: &ModelParams, data: &Batch) -> Result<Evaluation> {
    spec.check_params(params)?;
    spec.check_batch(data)?;
    if data.is_empty() {
        return Err(NnError::EmptyBatch);
    }
    let mut ws = Workspace::new(spec);
    let mut loss = 0.0;
    let mut correct = 0usize;
    for (i, &label) in data.labels.iter().enumerate() {
        let probs = ws.forward_row(spec, params.values(), data.row(i));
        let mut arg = 0;
        for (c, p) in probs.iter().enumerate() {
            if *p > probs[arg] {
                arg = c;
            }
        }
        if arg == label {
            correct += 1;
        }
        loss -= probs[label].max(1e-12).ln();
    }
    let n = data.len() as f64;
    Ok(Evaluation { loss: loss / n, accuracy: correct as f64 / n })
}
