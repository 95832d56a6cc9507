//! Gaussian blob generator.

use rand::seq::index;

use super::{DataError, Dataset, Result};
use crate::rng::{stream, Draws};

/// Blob layout. `scale` is the simplex edge scale: class centers sit at
/// `scale · e_j` on distinct, seeded axes (or on seeded random directions
/// of norm `scale` when there are fewer dimensions than classes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticParams {
    pub n: usize,
    pub classes: usize,
    pub dims: usize,
    pub spread: f64,
    pub scale: f64,
    pub seed: u64,
}

impl SyntheticParams {
    pub const DEFAULT_SCALE: f64 = 4.0;

    pub fn new(n: usize, classes: usize, dims: usize, spread: f64, seed: u64) -> Self {
        Self { n, classes, dims, spread, scale: Self::DEFAULT_SCALE, seed }
    }
}

/// Sample `i` has label `i mod M`, so classes are balanced round-robin.
///
/// Raw coordinates are mapped into `[0, 1]` by one affine transform fixed by
/// the centers (four standard deviations of margin) and then clamped, so the
/// relative geometry is the same for every sample.
pub fn synthetic_classification(p: &SyntheticParams) -> Result<Dataset> {
    if p.classes < 2 || p.n < p.classes {
        return Err(DataError::Invalid(format!("need n >= classes >= 2, got n={} classes={}", p.n, p.classes)));
    }
    if p.dims < 2 {
        return Err(DataError::Invalid("need at least 2 dimensions".into()));
    }
    if !(p.spread >= 0.0 && p.spread.is_finite()) || !(p.scale > 0.0 && p.scale.is_finite()) {
        return Err(DataError::Invalid("spread must be >= 0 and scale > 0".into()));
    }

    let mut rng = stream(p.seed, &[0xB10B]);
    let (m, d) = (p.classes, p.dims);
    let mut centers = vec![0.0; m * d];
    if d >= m {
        let axes = index::sample(&mut rng, d, m);
        for (k, axis) in axes.iter().enumerate() {
            centers[k * d + axis] = p.scale;
        }
    } else {
        for c in centers.chunks_mut(d) {
            loop {
                c.iter_mut().for_each(|x| *x = rng.standard_normal());
                let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm > 1e-9 {
                    c.iter_mut().for_each(|x| *x *= p.scale / norm);
                    break;
                }
            }
        }
    }

    let margin = 4.0 * p.spread;
    let lo = centers.iter().copied().fold(f64::INFINITY, f64::min) - margin;
    let hi = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max) + margin;
    let width = hi - lo;

    let mut inputs = Vec::with_capacity(p.n * d);
    let mut labels = Vec::with_capacity(p.n);
    for i in 0..p.n {
        let k = i % m;
        labels.push(k);
        for &c in &centers[k * d..(k + 1) * d] {
            let raw = c + p.spread * rng.standard_normal();
            inputs.push(((raw - lo) / width).clamp(0.0, 1.0));
        }
    }
    Dataset::new(inputs, labels, d, m)
}
