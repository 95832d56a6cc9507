//! Global-best particle swarm with constriction-style coefficients.

use super::{check_population_size, evaluate_all, OptimError, Optimum, Result, SearchSpace};
use crate::rng::{stream, Draws};

const PSO_STREAM: u64 = 0x950_0001;

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    pub max_iterations: usize,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self { inertia: 0.729, cognitive: 1.49445, social: 1.49445, max_iterations: 100 }
    }
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_fitness: f64,
}

pub fn pso_optimize<F>(
    space: &SearchSpace,
    objective: F,
    cfg: &PsoConfig,
    population_size: usize,
    seed: u64,
) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    check_population_size(population_size)?;
    if [cfg.inertia, cfg.cognitive, cfg.social].iter().any(|c| !c.is_finite() || *c < 0.0) {
        return Err(OptimError::InvalidConfig("PSO coefficients must be finite and nonnegative".into()));
    }
    let mut rng = stream(seed, &[PSO_STREAM]);
    let span: Vec<f64> = space.upper().iter().zip(space.lower()).map(|(u, l)| u - l).collect();

    let positions: Vec<Vec<f64>> = (0..population_size).map(|_| space.sample(&mut rng)).collect();
    let velocities: Vec<Vec<f64>> =
        (0..population_size).map(|_| span.iter().map(|s| 0.1 * s * (2.0 * rng.uniform() - 1.0)).collect()).collect();
    let fits = evaluate_all(space, &positions, &objective);
    let mut evaluations = population_size;
    let mut rejected = fits.iter().filter(|f| f.is_none()).count();

    let mut swarm: Vec<Particle> = positions
        .into_iter()
        .zip(velocities)
        .zip(fits)
        .map(|((position, velocity), f)| Particle {
            best_position: position.clone(),
            position,
            velocity,
            best_fitness: f.unwrap_or(f64::INFINITY),
        })
        .collect();

    let (mut gbest_pos, mut gbest_fit) = global_best(&swarm);
    let mut trace = vec![gbest_fit];

    for _ in 0..cfg.max_iterations {
        for p in swarm.iter_mut() {
            for d in 0..span.len() {
                let r1 = rng.uniform();
                let r2 = rng.uniform();
                let v = cfg.inertia * p.velocity[d]
                    + cfg.cognitive * r1 * (p.best_position[d] - p.position[d])
                    + cfg.social * r2 * (gbest_pos[d] - p.position[d]);
                p.velocity[d] = v.clamp(-span[d], span[d]);
                p.position[d] += p.velocity[d];
            }
            space.clamp(&mut p.position);
        }
        let positions: Vec<Vec<f64>> = swarm.iter().map(|p| p.position.clone()).collect();
        let fits = evaluate_all(space, &positions, &objective);
        evaluations += positions.len();
        for (p, f) in swarm.iter_mut().zip(fits) {
            match f {
                Some(f) if f < p.best_fitness => {
                    p.best_fitness = f;
                    p.best_position = p.position.clone();
                }
                Some(_) => {}
                None => rejected += 1,
            }
        }
        let (pos, fit) = global_best(&swarm);
        if fit < gbest_fit {
            gbest_pos = pos;
            gbest_fit = fit;
        }
        trace.push(gbest_fit);
    }

    Ok(Optimum { position: space.snap(&gbest_pos), fitness: gbest_fit, trace, evaluations, rejected })
}

fn global_best(swarm: &[Particle]) -> (Vec<f64>, f64) {
    let best = swarm.iter().min_by(|a, b| a.best_fitness.total_cmp(&b.best_fitness)).expect("swarm is nonempty");
    (best.best_position.clone(), best.best_fitness)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    #[test]
    fn constant_objective() {
        let space = SearchSpace::uniform(2, -1.0, 1.0).unwrap();
        let cfg = PsoConfig { max_iterations: 10, ..Default::default() };
        let opt = pso_optimize(&space, |_: &[f64]| -2.0, &cfg, 5, 0).unwrap();
        assert_eq!(opt.fitness, -2.0);
        assert_eq!(opt.evaluations, 5 + 10 * 5);
    }

    #[test]
    fn sphere_2d_converges() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = PsoConfig { max_iterations: 200, ..Default::default() };
        let hits = (0..10).filter(|&seed| pso_optimize(&space, sphere, &cfg, 50, seed).unwrap().fitness < 1e-2).count();
        assert!(hits >= 8, "{hits}/10");
    }

    #[test]
    fn reproducible_and_monotone() {
        let space = SearchSpace::uniform(3, -5.0, 5.0).unwrap();
        let cfg = PsoConfig { max_iterations: 40, ..Default::default() };
        let a = pso_optimize(&space, sphere, &cfg, 10, 4).unwrap();
        let b = pso_optimize(&space, sphere, &cfg, 10, 4).unwrap();
        assert_eq!(a, b);
        assert!(a.trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn rejects_single_particle() {
        let space = SearchSpace::uniform(1, 0.0, 1.0).unwrap();
        assert!(pso_optimize(&space, sphere, &PsoConfig::default(), 1, 0).is_err());
    }
}
