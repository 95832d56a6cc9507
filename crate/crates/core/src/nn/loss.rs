use super::{NnError, Result};

const PROB_FLOOR: f64 = 1e-12;

/// Mean negative log-probability of the true class. Probabilities are
/// floored at `1e-12` before the log.
pub fn cross_entropy(probs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if probs.is_empty() {
        return Err(NnError::EmptyBatch);
    }
    if probs.len() != labels.len() {
        return Err(NnError::DimensionMismatch { expected: probs.len(), found: labels.len() });
    }
    let mut total = 0.0;
    for (row, &label) in probs.iter().zip(labels) {
        let p = *row.get(label).ok_or(NnError::LabelOutOfRange { label, classes: row.len() })?;
        total -= p.max(PROB_FLOOR).ln();
    }
    Ok(total / probs.len() as f64)
}
