//! Lévy-stable steps by Mantegna's algorithm.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use super::{OptimError, Result};
use crate::rng::Draws;

/// Scale of the numerator normal in Mantegna's algorithm:
/// `[Γ(1+β) sin(πβ/2) / (Γ((1+β)/2) β 2^((β-1)/2))]^(1/β)`.
pub fn mantegna_sigma(beta: f64) -> f64 {
    let num = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    (num / den).powf(1.0 / beta)
}

/// One Lévy step per dimension: `0.01 * u / |v|^(1/β)` with
/// `u ~ N(0, σ²)` and `v ~ N(0, 1)`.
///
/// Draw order per component: `u`, then `v` (redrawn while `|v| < 1e-300`).
pub fn levy_flight<D: Draws + ?Sized>(dims: usize, beta: f64, rng: &mut D) -> Result<Vec<f64>> {
    if dims == 0 {
        return Err(OptimError::InvalidConfig("levy flight needs at least one dimension".into()));
    }
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(OptimError::InvalidConfig(format!("levy beta must lie in (1, 2], got {beta}")));
    }
    let sigma = mantegna_sigma(beta);
    let steps = (0..dims)
        .map(|_| {
            let u = rng.standard_normal() * sigma;
            let mut v = rng.standard_normal();
            while v.abs() < 1e-300 {
                v = rng.standard_normal();
            }
            0.01 * u / v.abs().powf(1.0 / beta)
        })
        .collect();
    Ok(steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    struct Fixed(Vec<f64>);

    impl Draws for Fixed {
        fn uniform(&mut self) -> f64 {
            unreachable!()
        }
        fn standard_normal(&mut self) -> f64 {
            self.0.remove(0)
        }
    }

    #[test]
    fn sigma_at_three_halves() {
        // Γ(2.5) = 1.329340388179137, Γ(1.25) = 0.906402477055477
        let expected =
            (1.329340388179137 * (0.75 * PI).sin() / (0.906402477055477 * 1.5 * 2f64.powf(0.25))).powf(1.0 / 1.5);
        assert!((mantegna_sigma(1.5) - expected).abs() < 1e-12);
        assert!((mantegna_sigma(1.5) - 0.696575).abs() < 1e-6);
    }

    #[test]
    fn zero_numerator_gives_zero_step() {
        let mut d = Fixed(vec![0.0, 0.7]);
        assert_eq!(levy_flight(1, 1.5, &mut d).unwrap(), vec![0.0]);
    }

    #[test]
    fn tiny_denominator_is_redrawn() {
        let mut d = Fixed(vec![1.0, 0.0, 1e-301, 1.0]);
        let step = levy_flight(1, 1.5, &mut d).unwrap();
        assert!((step[0] - 0.01 * mantegna_sigma(1.5)).abs() < 1e-15);
        assert!(d.0.is_empty());
    }

    #[test]
    fn rejects_bad_arguments() {
        let mut rng = stream(0, &[]);
        assert!(levy_flight(0, 1.5, &mut rng).is_err());
        assert!(levy_flight(2, 1.0, &mut rng).is_err());
        assert!(levy_flight(2, 2.5, &mut rng).is_err());
    }

    #[test]
    fn heavier_tail_than_matched_gaussian() {
        let mut rng = stream(42, &[]);
        let mut steps = levy_flight(100_000, 1.5, &mut rng).unwrap();
        steps.sort_by(f64::total_cmp);
        let q = |p: f64| steps[((steps.len() - 1) as f64 * p) as usize];
        let iqr = q(0.75) - q(0.25);
        // A normal with this IQR has sigma = IQR / 1.349.
        let sigma = iqr / 1.348_979_500_392_163_5;
        let threshold = 0.05;
        let frac = steps.iter().filter(|s| s.abs() > threshold).count() as f64 / steps.len() as f64;
        // Gaussian two-sided tail beyond threshold.
        let z = threshold / sigma;
        let gauss_tail = statrs::function::erf::erfc(z / 2f64.sqrt());
        assert!(frac > gauss_tail, "levy tail {frac} vs gaussian {gauss_tail}");
    }
}
