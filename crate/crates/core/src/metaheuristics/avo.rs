//! African Vulture Optimization.
//!
//! Each generation, every vulture picks a reference leader (best or second
//! best), draws a starvation rate `S` and moves by one of three stages
//! selected on `|S|`:
//!
//! | `|S|`          | stage                                   |
//! |----------------|-----------------------------------------|
//! | `>= 1`         | exploration (random-distance / random-box) |
//! | `[0.5, 1)`     | siege-fight or spiral flight            |
//! | `< 0.5`        | leader aggregation or Lévy attack       |
//!
//! Proposals for the whole generation are computed first, in vulture order,
//! from one random stream; only then is the objective evaluated (possibly in
//! parallel). Results therefore never depend on evaluation scheduling.
//!
//! The two leaders are an all-time archive, so the best fitness never gets
//! worse from one generation to the next.

use std::f64::consts::{FRAC_PI_2, PI};

use super::levy::levy_flight;
use super::{check_population_size, evaluate_all, OptimError, Optimum, Result, SearchSpace};
use crate::rng::{stream, Draws};

const AVO_STREAM: u64 = 0xA7_0001;
const DENOMINATOR_FLOOR: f64 = 1e-12;

/// Tunable constants of the vulture search.
#[derive(Debug, Clone, PartialEq)]
pub struct AvoConfig {
    /// Probability of the random-distance exploration move.
    pub p1: f64,
    /// Probability of the siege-fight move in the first development stage.
    pub p2: f64,
    /// Probability of leader aggregation in the final stage.
    pub p3: f64,
    /// Probability of following the best vulture.
    pub l1: f64,
    /// Probability of following the second-best vulture; `l1 + l2 = 1`.
    pub l2: f64,
    /// Exponent of the starvation disturbance term.
    pub omega: f64,
    pub levy_beta: f64,
    pub max_iterations: usize,
}

impl Default for AvoConfig {
    fn default() -> Self {
        Self { p1: 0.6, p2: 0.4, p3: 0.6, l1: 0.8, l2: 0.2, omega: 2.5, levy_beta: 1.5, max_iterations: 100 }
    }
}

impl AvoConfig {
    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(OptimError::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
            }
        };
        unit("p1", self.p1)?;
        unit("p2", self.p2)?;
        unit("p3", self.p3)?;
        unit("l1", self.l1)?;
        unit("l2", self.l2)?;
        if (self.l1 + self.l2 - 1.0).abs() > 1e-9 {
            return Err(OptimError::InvalidConfig(format!("l1 + l2 must equal 1, got {}", self.l1 + self.l2)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(OptimError::InvalidConfig(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.levy_beta > 1.0 && self.levy_beta <= 2.0) {
            return Err(OptimError::InvalidConfig(format!("levy_beta must lie in (1, 2], got {}", self.levy_beta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vulture {
    pub position: Vec<f64>,
    /// Objective at `position`; `+inf` marks a vulture whose initial
    /// evaluation failed.
    pub fitness: f64,
}

/// Vultures plus the archived best and second-best positions seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    vultures: Vec<Vulture>,
    best1: Vulture,
    best2: Vulture,
}

impl Population {
    pub fn new(vultures: Vec<Vulture>) -> Result<Self> {
        match vultures.len() {
            0 => return Err(OptimError::EmptyPopulation),
            1 => return Err(OptimError::NeedTwoLeaders),
            _ => {}
        }
        if vultures.iter().any(|v| v.fitness.is_nan()) {
            return Err(OptimError::NonFiniteFitness);
        }
        let (i, j) = two_smallest(vultures.iter().map(|v| v.fitness));
        let best1 = vultures[i].clone();
        let best2 = vultures[j].clone();
        Ok(Self { vultures, best1, best2 })
    }

    pub fn vultures(&self) -> &[Vulture] {
        &self.vultures
    }

    pub fn len(&self) -> usize {
        self.vultures.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vultures.is_empty()
    }

    pub fn best1(&self) -> &Vulture {
        &self.best1
    }

    pub fn best2(&self) -> &Vulture {
        &self.best2
    }

    /// Roulette probabilities of the current vultures.
    pub fn selection_probabilities(&self) -> Result<Vec<f64>> {
        let f: Vec<f64> = self.vultures.iter().map(|v| v.fitness).collect();
        selection_probabilities(&f)
    }

    fn refresh_leaders(&mut self) {
        let mut candidates: Vec<&Vulture> =
            [&self.best1, &self.best2].into_iter().chain(self.vultures.iter()).collect();
        candidates.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        let best1 = candidates[0].clone();
        // The archive and the population can hold copies of the same point.
        let best2 = candidates[1..].iter().find(|v| ***v != best1).map_or_else(|| best1.clone(), |v| (*v).clone());
        self.best1 = best1;
        self.best2 = best2;
    }
}

/// Indices of the lowest and second-lowest values; earlier index wins ties.
fn two_smallest(values: impl Iterator<Item = f64>) -> (usize, usize) {
    let mut order: Vec<(usize, f64)> = values.enumerate().collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    (order[0].0, order[1].0)
}

/// Which movement rule a starvation rate selects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Exploration,
    SiegeOrSpiral,
    Final,
}

impl Stage {
    pub fn from_starvation(s: f64) -> Self {
        let a = s.abs();
        if a >= 1.0 {
            Stage::Exploration
        } else if a >= 0.5 {
            Stage::SiegeOrSpiral
        } else {
            Stage::Final
        }
    }
}

/// Roulette-wheel probabilities for a minimization problem.
///
/// `u_i = 1 / (1 + f_i - min f)`, normalized to sum to one.
pub fn selection_probabilities(fitnesses: &[f64]) -> Result<Vec<f64>> {
    if fitnesses.is_empty() {
        return Err(OptimError::EmptyPopulation);
    }
    if fitnesses.iter().any(|f| !f.is_finite()) {
        return Err(OptimError::NonFiniteFitness);
    }
    let min = fitnesses.iter().copied().fold(f64::INFINITY, f64::min);
    let u: Vec<f64> = fitnesses.iter().map(|f| 1.0 / (1.0 + (f - min))).collect();
    let total: f64 = u.iter().sum();
    Ok(u.into_iter().map(|x| x / total).collect())
}

/// Picks the best vulture with probability `l1`, else the second best.
/// Consumes one uniform draw.
pub fn select_reference_vulture<D: Draws + ?Sized>(pop: &Population, cfg: &AvoConfig, rng: &mut D) -> Result<Vec<f64>> {
    if pop.len() < 2 {
        return Err(OptimError::NeedTwoLeaders);
    }
    let leader = if rng.uniform() < cfg.l1 { &pop.best1 } else { &pop.best2 };
    Ok(leader.position.clone())
}

/// Starvation rate of one vulture.
///
/// Draws, in order: `rand_i` in `[0,1)`, `h` in `[-1,1)`, `z` in `[-2,2)`.
/// Returns `(2 rand_i + 1) h (1 - it/max) + t` with
/// `t = z (sin^ω(π/2 · it/max) + cos^ω(π/2 · it/max) - 1)`.
pub fn starvation_rate<D: Draws + ?Sized>(iteration: usize, cfg: &AvoConfig, rng: &mut D) -> Result<f64> {
    if cfg.max_iterations == 0 {
        return Err(OptimError::InvalidConfig("max_iterations must be at least 1".into()));
    }
    if iteration > cfg.max_iterations {
        return Err(OptimError::IterationOutOfRange { iteration, max_iterations: cfg.max_iterations });
    }
    let rand_i = rng.uniform();
    let h = 2.0 * rng.uniform() - 1.0;
    let z = 4.0 * rng.uniform() - 2.0;
    let frac = iteration as f64 / cfg.max_iterations as f64;
    // cos(π/2 · x) evaluated as sin(π/2 · (1 - x)) so both endpoints are exact.
    let sin_part = (FRAC_PI_2 * frac).sin().powf(cfg.omega);
    let cos_part = (FRAC_PI_2 * (1.0 - frac)).sin().powf(cfg.omega);
    let t = z * (sin_part + cos_part - 1.0);
    Ok((2.0 * rand_i + 1.0) * h * (1.0 - frac) + t)
}

fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(OptimError::DimensionMismatch { expected: a.len(), found: b.len() });
    }
    Ok(())
}

/// Exploration move for `|S| >= 1`.
///
/// Draws `rand_p1`; when `p1 >= rand_p1` each component draws `X = 2·rand`
/// and moves to `R - |X·R - P|·S`, otherwise each component draws `rand2`,
/// `rand3` and moves to `R - S + rand2·((ub - lb)·rand3 + lb)`.
pub fn exploration_step<D: Draws + ?Sized>(
    position: &[f64],
    ref_pos: &[f64],
    s: f64,
    space: &SearchSpace,
    cfg: &AvoConfig,
    rng: &mut D,
) -> Result<Vec<f64>> {
    space.check_dims(position)?;
    check_same_len(position, ref_pos)?;
    let rand_p1 = rng.uniform();
    let mut out: Vec<f64> = if cfg.p1 >= rand_p1 {
        position
            .iter()
            .zip(ref_pos)
            .map(|(&p, &r)| {
                let x = 2.0 * rng.uniform();
                r - (x * r - p).abs() * s
            })
            .collect()
    } else {
        ref_pos
            .iter()
            .zip(space.lower().iter().zip(space.upper()))
            .map(|(&r, (&lb, &ub))| {
                let rand2 = rng.uniform();
                let rand3 = rng.uniform();
                r - s + rand2 * ((ub - lb) * rand3 + lb)
            })
            .collect()
    };
    space.clamp(&mut out);
    Ok(out)
}

/// First development stage, `0.5 <= |S| < 1`.
///
/// Draws `rand_p2`; when `p2 >= rand_p2` it draws a scalar `rand4`, then
/// `X = 2·rand` per component, and moves to `D·(S + rand4) - (R - P)` with
/// `D = |X·R - P|`. Otherwise it draws scalars `rand5`, `rand6` and spirals
/// to `R - (Q1 + Q2)`.
pub fn develop_stage1_step<D: Draws + ?Sized>(
    position: &[f64],
    ref_pos: &[f64],
    s: f64,
    cfg: &AvoConfig,
    rng: &mut D,
    space: &SearchSpace,
) -> Result<Vec<f64>> {
    space.check_dims(position)?;
    check_same_len(position, ref_pos)?;
    let rand_p2 = rng.uniform();
    let mut out: Vec<f64> = if cfg.p2 >= rand_p2 {
        let rand4 = rng.uniform();
        position
            .iter()
            .zip(ref_pos)
            .map(|(&p, &r)| {
                let x = 2.0 * rng.uniform();
                let d = (x * r - p).abs();
                d * (s + rand4) - (r - p)
            })
            .collect()
    } else {
        let rand5 = rng.uniform();
        let rand6 = rng.uniform();
        position
            .iter()
            .zip(ref_pos)
            .map(|(&p, &r)| {
                let q1 = r * (rand5 * p / (2.0 * PI)) * p.cos();
                let q2 = r * (rand6 * p / (2.0 * PI)) * p.sin();
                r - (q1 + q2)
            })
            .collect()
    };
    space.clamp(&mut out);
    Ok(out)
}

fn floored(d: f64) -> f64 {
    if d.abs() < DENOMINATOR_FLOOR {
        DENOMINATOR_FLOOR.copysign(d)
    } else {
        d
    }
}

/// Final stage, `|S| < 0.5`.
///
/// Draws `rand_p3`; when `p3 >= rand_p3` it moves to the midpoint of the two
/// leader-attraction points `A1`, `A2` (no further draws). Otherwise it draws
/// a Lévy step and moves to `R - |R - P|·S·Levy`.
pub fn develop_stage2_step<D: Draws + ?Sized>(
    position: &[f64],
    ref_pos: &[f64],
    pop: &Population,
    s: f64,
    cfg: &AvoConfig,
    rng: &mut D,
    space: &SearchSpace,
) -> Result<Vec<f64>> {
    space.check_dims(position)?;
    check_same_len(position, ref_pos)?;
    check_same_len(position, &pop.best1.position)?;
    let rand_p3 = rng.uniform();
    let mut out: Vec<f64> = if cfg.p3 >= rand_p3 {
        let b1 = &pop.best1.position;
        let b2 = &pop.best2.position;
        position
            .iter()
            .zip(b1.iter().zip(b2))
            .map(|(&p, (&b1, &b2))| {
                let a1 = b1 - (b1 * p) / floored(b1 - p * p) * s;
                let a2 = b2 - (b2 * p) / floored(b2 - p * p) * s;
                (a1 + a2) / 2.0
            })
            .collect()
    } else {
        let levy = levy_flight(position.len(), cfg.levy_beta, rng)?;
        position.iter().zip(ref_pos).zip(&levy).map(|((&p, &r), &l)| r - (r - p).abs() * s * l).collect()
    };
    space.clamp(&mut out);
    Ok(out)
}

/// Counters from one generation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenerationOutcome {
    pub evaluations: usize,
    pub rejected: usize,
}

/// Advances every vulture by one move, then re-evaluates and refreshes the
/// leader archive. A move whose objective value is not finite is rejected
/// and the vulture keeps its previous position and fitness.
pub fn avo_generation<F, D>(
    pop: &mut Population,
    objective: &F,
    iteration: usize,
    cfg: &AvoConfig,
    space: &SearchSpace,
    rng: &mut D,
) -> Result<GenerationOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
    D: Draws + ?Sized,
{
    if iteration >= cfg.max_iterations {
        return Err(OptimError::IterationOutOfRange { iteration, max_iterations: cfg.max_iterations });
    }
    let mut proposals = Vec::with_capacity(pop.len());
    for v in &pop.vultures {
        let r = select_reference_vulture(pop, cfg, rng)?;
        let s = starvation_rate(iteration, cfg, rng)?;
        let next = match Stage::from_starvation(s) {
            Stage::Exploration => exploration_step(&v.position, &r, s, space, cfg, rng)?,
            Stage::SiegeOrSpiral => develop_stage1_step(&v.position, &r, s, cfg, rng, space)?,
            Stage::Final => develop_stage2_step(&v.position, &r, pop, s, cfg, rng, space)?,
        };
        proposals.push(next);
    }

    let mut outcome = GenerationOutcome::default();
    let finite: Vec<bool> = proposals.iter().map(|p| p.iter().all(|x| x.is_finite())).collect();
    let to_eval: Vec<Vec<f64>> = proposals.iter().zip(&finite).filter(|(_, ok)| **ok).map(|(p, _)| p.clone()).collect();
    outcome.evaluations = to_eval.len();
    let mut fits = evaluate_all(space, &to_eval, objective).into_iter();

    for ((v, pos), ok) in pop.vultures.iter_mut().zip(proposals).zip(finite) {
        let fitness = if ok { fits.next().flatten() } else { None };
        match fitness {
            Some(f) => {
                v.position = pos;
                v.fitness = f;
            }
            None => outcome.rejected += 1,
        }
    }
    pop.refresh_leaders();
    Ok(outcome)
}

/// Runs the vulture search from a uniformly random population.
pub fn avo_optimize<F>(
    space: &SearchSpace,
    objective: F,
    cfg: &AvoConfig,
    population_size: usize,
    seed: u64,
) -> Result<Optimum>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cfg.validate()?;
    check_population_size(population_size)?;
    let mut rng = stream(seed, &[AVO_STREAM]);
    let positions: Vec<Vec<f64>> = (0..population_size).map(|_| space.sample(&mut rng)).collect();
    let fits = evaluate_all(space, &positions, &objective);
    let mut evaluations = positions.len();
    let mut rejected = fits.iter().filter(|f| f.is_none()).count();
    let vultures = positions
        .into_iter()
        .zip(fits)
        .map(|(position, f)| Vulture { position, fitness: f.unwrap_or(f64::INFINITY) })
        .collect();
    let mut pop = Population::new(vultures)?;

    let mut trace = Vec::with_capacity(cfg.max_iterations + 1);
    trace.push(pop.best1.fitness);
    for iteration in 0..cfg.max_iterations {
        let outcome = avo_generation(&mut pop, &objective, iteration, cfg, space, &mut rng)?;
        evaluations += outcome.evaluations;
        rejected += outcome.rejected;
        trace.push(pop.best1.fitness);
    }

    Ok(Optimum { position: space.snap(&pop.best1.position), fitness: pop.best1.fitness, trace, evaluations, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Replays a fixed list of uniforms.
    struct Replay(std::collections::VecDeque<f64>);

    impl Replay {
        fn new(v: &[f64]) -> Self {
            Self(v.iter().copied().collect())
        }
    }

    impl Draws for Replay {
        fn uniform(&mut self) -> f64 {
            self.0.pop_front().expect("transcript exhausted")
        }
        fn standard_normal(&mut self) -> f64 {
            self.0.pop_front().expect("transcript exhausted")
        }
    }

    fn sphere(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }

    fn pop_of(points: &[(&[f64], f64)]) -> Population {
        Population::new(points.iter().map(|(p, f)| Vulture { position: p.to_vec(), fitness: *f }).collect()).unwrap()
    }

    #[test]
    fn probabilities_examples() {
        assert_eq!(selection_probabilities(&[1.0; 4]).unwrap(), vec![0.25; 4]);
        assert_eq!(selection_probabilities(&[0.0]).unwrap(), vec![1.0]);
        let p = selection_probabilities(&[0.0, 1.0]).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-15 && (p[1] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(selection_probabilities(&[]), Err(OptimError::EmptyPopulation));
        assert_eq!(selection_probabilities(&[0.0, f64::NAN]), Err(OptimError::NonFiniteFitness));
    }

    #[test]
    fn reference_follows_l1() {
        let pop = pop_of(&[(&[1.0], 1.0), (&[2.0], 2.0), (&[3.0], 3.0)]);
        let mut rng = stream(3, &[]);
        let always_best = AvoConfig { l1: 1.0, l2: 0.0, ..Default::default() };
        let never_best = AvoConfig { l1: 0.0, l2: 1.0, ..Default::default() };
        for _ in 0..200 {
            assert_eq!(select_reference_vulture(&pop, &always_best, &mut rng).unwrap(), vec![1.0]);
            assert_eq!(select_reference_vulture(&pop, &never_best, &mut rng).unwrap(), vec![2.0]);
        }
        let cfg = AvoConfig::default();
        let hits = (0..10_000).filter(|_| select_reference_vulture(&pop, &cfg, &mut rng).unwrap() == vec![1.0]).count();
        let rate = hits as f64 / 10_000.0;
        assert!((0.78..=0.82).contains(&rate), "rate {rate}");
    }

    #[test]
    fn population_needs_two() {
        assert_eq!(Population::new(vec![]).unwrap_err(), OptimError::EmptyPopulation);
        let one = vec![Vulture { position: vec![0.0], fitness: 0.0 }];
        assert_eq!(Population::new(one).unwrap_err(), OptimError::NeedTwoLeaders);
    }

    #[test]
    fn starvation_examples() {
        let cfg = AvoConfig { max_iterations: 10, ..Default::default() };
        let mut rng = stream(9, &[]);
        for _ in 0..100 {
            assert_eq!(starvation_rate(10, &cfg, &mut rng).unwrap(), 0.0);
        }
        // rand_i = 0.5, h = 2u - 1 = 1, z = 4u - 2 = 0
        let mut r = Replay::new(&[0.5, 1.0, 0.5]);
        assert_eq!(starvation_rate(0, &cfg, &mut r).unwrap(), 2.0);
        assert!(matches!(starvation_rate(11, &cfg, &mut rng), Err(OptimError::IterationOutOfRange { .. })));
    }

    #[test]
    fn starvation_midpoint_matches_direct_formula() {
        let cfg = AvoConfig { max_iterations: 10, omega: 2.5, ..Default::default() };
        let (u1, u2, u3) = (0.3, 0.9, 0.2);
        let mut r = Replay::new(&[u1, u2, u3]);
        let s = starvation_rate(5, &cfg, &mut r).unwrap();
        let (rand_i, h, z) = (u1, 2.0 * u2 - 1.0, 4.0 * u3 - 2.0);
        let a = std::f64::consts::PI / 4.0;
        let t = z * (a.sin().powf(2.5) + a.cos().powf(2.5) - 1.0);
        let expected = (2.0 * rand_i + 1.0) * h * 0.5 + t;
        assert!((s - expected).abs() < 1e-12);
    }

    #[test]
    fn exploration_zero_distance_returns_reference() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { p1: 1.0, ..Default::default() };
        let r = [1.0, 2.0];
        // X = 2·0.5 = 1, so position = X∘R gives D = 0.
        let mut d = Replay::new(&[0.0, 0.5, 0.5]);
        assert_eq!(exploration_step(&r, &r, 1.0, &space, &cfg, &mut d).unwrap(), r.to_vec());
    }

    #[test]
    fn exploration_box_move_with_zero_scale() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { p1: 0.0, ..Default::default() };
        let mut d = Replay::new(&[0.5, 0.0, 0.7, 0.0, 0.1]);
        let out = exploration_step(&[3.0, 3.0], &[1.0, 2.0], 1.5, &space, &cfg, &mut d).unwrap();
        assert_eq!(out, vec![-0.5, 0.5]);
    }

    #[test]
    fn spiral_vanishes_at_origin() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { p2: 0.0, ..Default::default() };
        let mut d = Replay::new(&[0.5, 0.3, 0.8]);
        let out = develop_stage1_step(&[0.0, 0.0], &[1.0, -2.0], 0.7, &cfg, &mut d, &space).unwrap();
        assert_eq!(out, vec![1.0, -2.0]);
    }

    #[test]
    fn siege_with_zero_distance() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { p2: 1.0, ..Default::default() };
        let r = [1.0, -2.0];
        // rand_p2, rand4, then X = 1 on both components.
        let mut d = Replay::new(&[0.5, 0.4, 0.5, 0.5]);
        let out = develop_stage1_step(&r, &r, 0.7, &cfg, &mut d, &space).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
    }

    #[test]
    fn aggregation_of_equal_leaders_is_their_attraction_point() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { p3: 1.0, ..Default::default() };
        let pop = pop_of(&[(&[1.0, 2.0], 0.0), (&[1.0, 2.0], 0.0)]);
        let p = [0.5, -0.5];
        let s = 0.25;
        let a: Vec<f64> = [1.0, 2.0].iter().zip(&p).map(|(b, p)| b - (b * p) / (b - p * p) * s).collect();
        let mut d = Replay::new(&[0.3]);
        let out = develop_stage2_step(&p, &[1.0, 2.0], &pop, s, &cfg, &mut d, &space).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn levy_attack_at_reference_stays_put() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { p3: 0.0, ..Default::default() };
        let pop = pop_of(&[(&[1.0, 2.0], 0.0), (&[0.0, 0.0], 1.0)]);
        let r = [1.0, 2.0];
        let mut rng = stream(5, &[]);
        let out = develop_stage2_step(&r, &r, &pop, 0.3, &cfg, &mut rng, &space).unwrap();
        assert_eq!(out, r.to_vec());
    }

    #[test]
    fn vanishing_denominator_is_floored() {
        let space = SearchSpace::uniform(1, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { p3: 1.0, ..Default::default() };
        // best = p² exactly
        let pop = pop_of(&[(&[4.0], 0.0), (&[4.0], 0.0)]);
        let mut d = Replay::new(&[0.0]);
        let out = develop_stage2_step(&[2.0], &[4.0], &pop, 0.1, &cfg, &mut d, &space).unwrap();
        assert!(out[0].is_finite());
        assert_eq!(out, vec![-5.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig::default();
        let mut rng = stream(0, &[]);
        assert!(exploration_step(&[0.0], &[0.0, 0.0], 1.0, &space, &cfg, &mut rng).is_err());
        assert!(develop_stage1_step(&[0.0, 0.0], &[0.0], 0.7, &cfg, &mut rng, &space).is_err());
    }

    #[test]
    fn identical_vultures_at_optimum_keep_best() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { max_iterations: 5, ..Default::default() };
        let mut pop =
            Population::new((0..6).map(|_| Vulture { position: vec![0.0, 0.0], fitness: 0.0 }).collect()).unwrap();
        let mut rng = stream(1, &[]);
        for it in 0..5 {
            avo_generation(&mut pop, &sphere, it, &cfg, &space, &mut rng).unwrap();
            assert_eq!(pop.best1().fitness, 0.0);
        }
    }

    #[test]
    fn nan_objective_rejects_moves() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { max_iterations: 3, ..Default::default() };
        let before = Population::new(vec![
            Vulture { position: vec![1.0, 1.0], fitness: 2.0 },
            Vulture { position: vec![-1.0, 2.0], fitness: 5.0 },
        ])
        .unwrap();
        let mut pop = before.clone();
        let mut rng = stream(2, &[]);
        let out = avo_generation(&mut pop, &|_: &[f64]| f64::NAN, 0, &cfg, &space, &mut rng).unwrap();
        assert_eq!(out.rejected, 2);
        assert_eq!(pop, before);
    }

    #[test]
    fn constant_objective() {
        let space = SearchSpace::uniform(3, -1.0, 1.0).unwrap();
        let cfg = AvoConfig { max_iterations: 20, ..Default::default() };
        let opt = avo_optimize(&space, |_: &[f64]| 4.5, &cfg, 10, 7).unwrap();
        assert_eq!(opt.fitness, 4.5);
        assert_eq!(opt.evaluations, 10 + 20 * 10);
    }

    #[test]
    fn zero_iterations_returns_initial_best() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { max_iterations: 0, ..Default::default() };
        let opt = avo_optimize(&space, sphere, &cfg, 8, 3).unwrap();
        assert_eq!(opt.trace.len(), 1);
        assert_eq!(opt.evaluations, 8);
        assert_eq!(opt.fitness, opt.trace[0]);
    }

    #[test]
    fn integer_dimension_is_rounded() {
        let space = SearchSpace::new(vec![-1.0; 4], vec![1.0, 1.0, 1.0, 5.0], vec![3]).unwrap();
        let cfg = AvoConfig { max_iterations: 10, ..Default::default() };
        let opt = avo_optimize(&space, |x: &[f64]| (x[3] - 3.2).powi(2) + x[0] * x[0], &cfg, 10, 11).unwrap();
        assert_eq!(opt.position[3].fract(), 0.0);
        assert!((1.0..=5.0).contains(&opt.position[3]));
    }

    #[test]
    fn sphere_2d_converges() {
        let space = SearchSpace::uniform(2, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { max_iterations: 200, ..Default::default() };
        let hits = (0..10).filter(|&seed| avo_optimize(&space, sphere, &cfg, 50, seed).unwrap().fitness < 1e-3).count();
        assert!(hits >= 8, "{hits}/10 seeds converged");
    }

    #[test]
    fn generation_is_reproducible() {
        let space = SearchSpace::uniform(3, -5.0, 5.0).unwrap();
        let cfg = AvoConfig { max_iterations: 30, ..Default::default() };
        let a = avo_optimize(&space, sphere, &cfg, 12, 99).unwrap();
        let b = avo_optimize(&space, sphere, &cfg, 12, 99).unwrap();
        assert_eq!(
            a.trace.iter().map(|f| f.to_bits()).collect::<Vec<_>>(),
            b.trace.iter().map(|f| f.to_bits()).collect::<Vec<_>>()
        );
        assert_eq!(a.position, b.position);
    }

    proptest! {
        #[test]
        fn stage_partition_is_total(s in -10.0f64..10.0) {
            let preds = [s.abs() >= 1.0, (0.5..1.0).contains(&s.abs()), s.abs() < 0.5];
            prop_assert_eq!(preds.iter().filter(|b| **b).count(), 1);
            let expected = match preds.iter().position(|b| *b).unwrap() {
                0 => Stage::Exploration,
                1 => Stage::SiegeOrSpiral,
                _ => Stage::Final,
            };
            prop_assert_eq!(Stage::from_starvation(s), expected);
        }

        #[test]
        fn probabilities_sum_to_one(f in proptest::collection::vec(-1e3f64..1e3, 1..40)) {
            let p = selection_probabilities(&f).unwrap();
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|x| *x > 0.0));
        }

        #[test]
        fn positions_stay_in_bounds(seed in 0u64..500, dims in 1usize..5) {
            let space = SearchSpace::uniform(dims, -2.0, 3.0).unwrap();
            let cfg = AvoConfig { max_iterations: 8, ..Default::default() };
            let mut rng = stream(seed, &[]);
            let vultures = (0..6)
                .map(|_| {
                    let position = space.sample(&mut rng);
                    let fitness = sphere(&position);
                    Vulture { position, fitness }
                })
                .collect();
            let mut pop = Population::new(vultures).unwrap();
            for it in 0..8 {
                avo_generation(&mut pop, &sphere, it, &cfg, &space, &mut rng).unwrap();
                for v in pop.vultures() {
                    prop_assert!(space.contains(&v.position));
                }
                let mut f: Vec<f64> = pop.vultures().iter().map(|v| v.fitness).collect();
                f.sort_by(f64::total_cmp);
                prop_assert!(pop.best1().fitness <= pop.best2().fitness);
                prop_assert!(pop.best1().fitness <= f[0]);
                prop_assert!(pop.best2().fitness <= f[1]);
            }
        }
    }
}
