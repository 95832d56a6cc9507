//! Grey Wolf Optimizer: wolves move to the mean of three leader-guided
//! points while the coefficient `a` decays linearly from 2 to 0.

use super::{check_population_size, evaluate_all, Optimum, Result, SearchSpace};
use crate::rng::{stream, Draws};

const GWO_STREAM: u64 = 0x6E0_0001;

#[derive(Clone)]
struct Leader {
    position: Vec<f64>,
    fitness: f64,
}

/// Keeps the three best positions seen so far, best first.
fn update_leaders(leaders: &mut Vec<Leader>, position: &[f64], fitness: f64) {
    let at = leaders.iter().position(|l| fitness < l.fitness).unwrap_or(leaders.len());
    if at < 3 {
        leaders.insert(at, Leader { position: position.to_vec(), fitness });
        leaders.truncate(3);
    }
}

pub fn gwo_optimize<F>(
    space: &SearchSpace,
    objective: F,
    population_size: usize,
    max_iterations: usize,
    seed: u64,
) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_population_size(population_size)?;
    let mut rng = stream(seed, &[GWO_STREAM]);
    let mut wolves: Vec<Vec<f64>> = (0..population_size).map(|_| space.sample(&mut rng)).collect();
    let fits = evaluate_all(space, &wolves, &objective);
    let mut evaluations = population_size;
    let mut rejected = 0;

    let mut leaders: Vec<Leader> = Vec::with_capacity(3);
    for (w, f) in wolves.iter().zip(&fits) {
        match f {
            Some(f) => update_leaders(&mut leaders, w, *f),
            None => rejected += 1,
        }
    }
    // Every initial evaluation failed: fall back to unranked wolves.
    while leaders.len() < 3 {
        let i = leaders.len() % wolves.len();
        leaders.push(Leader { position: wolves[i].clone(), fitness: f64::INFINITY });
    }

    let mut trace = vec![leaders[0].fitness];
    for iteration in 0..max_iterations {
        let a = 2.0 - 2.0 * iteration as f64 / max_iterations as f64;
        for w in wolves.iter_mut() {
            for (d, x) in w.iter_mut().enumerate() {
                let mut sum = 0.0;
                for leader in &leaders {
                    let r1 = rng.uniform();
                    let r2 = rng.uniform();
                    let big_a = 2.0 * a * r1 - a;
                    let c = 2.0 * r2;
                    let dist = (c * leader.position[d] - *x).abs();
                    sum += leader.position[d] - big_a * dist;
                }
                *x = sum / 3.0;
            }
            space.clamp(w);
        }
        let fits = evaluate_all(space, &wolves, &objective);
        evaluations += wolves.len();
        for (w, f) in wolves.iter().zip(fits) {
            match f {
                Some(f) => update_leaders(&mut leaders, w, f),
                None => rejected += 1,
            }
        }
        trace.push(leaders[0].fitness);
    }

    let best = &leaders[0];
    Ok(Optimum { position: space.snap(&best.position), fitness: best.fitness, trace, evaluations, rejected })
}
