use super::{OptimError, Result};
use crate::rng::Draws;

/// Box bounds for a continuous search, with optional integer dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer_dims: Vec<usize>,
}

impl SearchSpace {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, integer_dims: Vec<usize>) -> Result<Self> {
        if lower.is_empty() {
            return Err(OptimError::InvalidSpace("at least one dimension required".into()));
        }
        if lower.len() != upper.len() {
            return Err(OptimError::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(OptimError::InvalidSpace(format!("dimension {i}: lower {lo} must be below upper {hi}")));
            }
        }
        let mut integer_dims = integer_dims;
        integer_dims.sort_unstable();
        integer_dims.dedup();
        if let Some(&d) = integer_dims.iter().find(|&&d| d >= lower.len()) {
            return Err(OptimError::InvalidSpace(format!("integer dimension {d} out of range")));
        }
        Ok(Self { lower, upper, integer_dims })
    }

    /// Same bounds on every dimension, no integer dimensions.
    pub fn uniform(dims: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dims], vec![upper; dims], Vec::new())
    }

    pub fn dims(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn integer_dims(&self) -> &[usize] {
        &self.integer_dims
    }

    pub(crate) fn check_dims(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dims() {
            return Err(OptimError::DimensionMismatch { expected: self.dims(), found: v.len() });
        }
        Ok(())
    }

    /// Hard clamp into the box. NaN components are left as they are so the
    /// caller can reject the move.
    pub fn clamp(&self, v: &mut [f64]) {
        for ((x, lo), hi) in v.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.clamp(*lo, *hi);
        }
    }

    /// Clamps, then rounds integer dimensions half-up (staying in bounds).
    pub fn snap(&self, v: &[f64]) -> Vec<f64> {
        let mut out = v.to_vec();
        self.clamp(&mut out);
        for &d in &self.integer_dims {
            let lo = self.lower[d].ceil();
            let hi = self.upper[d].floor();
            let r = (out[d] + 0.5).floor();
            out[d] = if lo <= hi { r.clamp(lo, hi) } else { r };
        }
        out
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.dims() && v.iter().zip(&self.lower).zip(&self.upper).all(|((x, lo), hi)| lo <= x && x <= hi)
    }

    pub fn sample<D: Draws + ?Sized>(&self, rng: &mut D) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(lo, hi)| lo + (hi - lo) * rng.uniform()).collect()
    }
}
