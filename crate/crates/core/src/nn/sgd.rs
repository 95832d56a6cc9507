use super::{NnError, Result};

/// One client's local optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperParams {
    /// Learning rate.
    pub eta: f64,
    /// Momentum.
    pub beta: f64,
    /// Weight decay.
    pub lambda: f64,
    /// Local epochs.
    pub epochs: usize,
}

impl HyperParams {
    pub fn new(eta: f64, beta: f64, lambda: f64, epochs: usize) -> Result<Self> {
        let hp = Self { eta, beta, lambda, epochs };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(NnError::InvalidHyperParams(format!("eta must be nonnegative, got {}", self.eta)));
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(NnError::InvalidHyperParams(format!("beta must be nonnegative, got {}", self.beta)));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(NnError::InvalidHyperParams(format!("lambda must be nonnegative, got {}", self.lambda)));
        }
        if self.epochs == 0 {
            return Err(NnError::InvalidHyperParams("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// How momentum and weight decay enter the step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum UpdateMode {
    /// `v ← βv + g + λw; w ← w − ηv`
    #[default]
    Velocity,
    /// `w ← βw − ηg − ληw`, applied exactly as written.
    Literal,
}

/// Applies one update in place. `velocity` must start at zero for a fresh
/// run and is left untouched in literal mode.
pub fn sgd_step(
    params: &mut [f64],
    grad: &[f64],
    hp: &HyperParams,
    velocity: &mut [f64],
    mode: UpdateMode,
) -> Result<()> {
    if grad.len() != params.len() || velocity.len() != params.len() {
        return Err(NnError::DimensionMismatch { expected: params.len(), found: grad.len().min(velocity.len()) });
    }
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(NnError::Diverged);
    }
    match mode {
        UpdateMode::Velocity => {
            for ((w, g), v) in params.iter_mut().zip(grad).zip(velocity.iter_mut()) {
                *v = hp.beta * *v + g + hp.lambda * *w;
                *w -= hp.eta * *v;
            }
        }
        UpdateMode::Literal => {
            for (w, g) in params.iter_mut().zip(grad) {
                *w = hp.beta * *w - hp.eta * g - hp.lambda * hp.eta * *w;
            }
        }
    }
    Ok(())
}
