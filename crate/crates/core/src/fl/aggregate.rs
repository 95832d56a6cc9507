use super::{FlError, Result};
use crate::nn::ModelParams;

/// Sample-weighted average `Σ (n_k / n) ω_k`, summed in list order.
///
/// A coordinate on which every update agrees is copied through unchanged,
/// so aggregating identical models is exact regardless of rounding in the
/// weights.
pub fn aggregate(updates: &[(ModelParams, usize)]) -> Result<ModelParams> {
    let (first, _) = updates.first().ok_or_else(|| FlError::InvalidConfig("no updates to aggregate".into()))?;
    let len = first.len();
    for (params, n_k) in updates {
        if params.len() != len {
            return Err(FlError::LengthMismatch { expected: len, found: params.len() });
        }
        if *n_k == 0 {
            return Err(FlError::InvalidConfig("every update needs at least one sample".into()));
        }
    }
    let total: usize = updates.iter().map(|(_, n_k)| n_k).sum();
    let weights: Vec<f64> = updates.iter().map(|(_, n_k)| *n_k as f64 / total as f64).collect();

    let mut out = vec![0.0; len];
    for (j, slot) in out.iter_mut().enumerate() {
        let head = first.values()[j];
        if updates.iter().all(|(p, _)| p.values()[j] == head) {
            *slot = head;
            continue;
        }
        for ((params, _), w) in updates.iter().zip(&weights) {
            *slot += w * params.values()[j];
        }
    }
    Ok(ModelParams::from_raw(out))
}
