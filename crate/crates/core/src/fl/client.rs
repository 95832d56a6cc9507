use super::{ClientShard, FlConfig, Result, EPOCHS_DIM, MAX_EPOCHS};
use crate::metaheuristics::{AvoConfig, Tuner};
use crate::nn::{evaluate, train_local, HyperParams, ModelParams, ModelSpec, UpdateMode};
use crate::rng::derive_seed;

const TRAIN_STREAM: u64 = 0x7A11;
const FITNESS_STREAM: u64 = 0xF171;
const TUNE_STREAM: u64 = 0x7E7E;

/// What a client sends back after its local update.
#[derive(Debug, Clone, PartialEq)]
pub struct ClientOutcome {
    pub client_id: usize,
    pub params: ModelParams,
    /// Local sample count, the aggregation weight.
    pub n_k: usize,
    pub hyperparams: HyperParams,
    /// Objective calls spent tuning (zero for FedAvg).
    pub tuning_evaluations: usize,
    /// Tuning found no usable candidate and the fixed settings were used.
    pub fell_back: bool,
}

pub(crate) fn training_seed(seed: u64, round: usize, client_id: usize) -> u64 {
    derive_seed(seed, &[TRAIN_STREAM, round as u64, client_id as u64])
}

/// Plain local SGD on the whole shard.
#[allow(clippy::too_many_arguments)]
pub fn client_update_fedavg(
    spec: &ModelSpec,
    global: &ModelParams,
    shard: &ClientShard,
    hp: &HyperParams,
    batch_size: usize,
    mode: UpdateMode,
    seed: u64,
) -> Result<ClientOutcome> {
    let trained = train_local(spec, global, &shard.data.view(), hp, batch_size, mode, seed)?;
    Ok(ClientOutcome {
        client_id: shard.client_id,
        params: trained.params,
        n_k: shard.len(),
        hyperparams: *hp,
        tuning_evaluations: 0,
        fell_back: false,
    })
}

/// Maps a `(η, β, λ, E)` position to settings; `E` is rounded half-up and
/// clamped to `[1, 5]`. `None` if the position is malformed.
pub fn decode_hyperparams(position: &[f64]) -> Option<HyperParams> {
    if position.len() != EPOCHS_DIM + 1 || !position[EPOCHS_DIM].is_finite() {
        return None;
    }
    let epochs = (position[EPOCHS_DIM] + 0.5).floor().clamp(1.0, MAX_EPOCHS as f64) as usize;
    HyperParams::new(position[0], position[1], position[2], epochs).ok()
}

/// Tunes this client's settings with `tuner`, then trains on the whole shard.
///
/// Each candidate trains a copy of `global` on the training split (with one
/// common shuffle seed, so candidates differ only in their settings) and is
/// scored by validation cross-entropy. Failed or non-finite trainings score
/// NaN and are rejected by the optimizer.
pub fn client_update_tuned(
    spec: &ModelSpec,
    global: &ModelParams,
    shard: &ClientShard,
    cfg: &FlConfig,
    tuner: &Tuner,
    round: usize,
) -> Result<ClientOutcome> {
    let client = shard.client_id;
    let train = shard.train_set();
    let val = shard.val_set();
    let fitness_seed = derive_seed(cfg.seed, &[FITNESS_STREAM, round as u64, client as u64]);
    let objective = |position: &[f64]| -> f64 {
        let Some(hp) = decode_hyperparams(position) else {
            return f64::NAN;
        };
        train_local(spec, global, &train.view(), &hp, cfg.batch_size, cfg.update_mode, fitness_seed)
            .and_then(|t| evaluate(spec, &t.params, &val.view()))
            .map_or(f64::NAN, |e| e.loss)
    };
    let tune_seed = derive_seed(cfg.seed, &[TUNE_STREAM, round as u64, client as u64]);
    let best = tuner.optimize(&cfg.search_space, objective, cfg.population_size, cfg.tuning_epochs, tune_seed)?;

    let (hp, fell_back) = match best.found_finite().then(|| decode_hyperparams(&best.position)).flatten() {
        Some(hp) => (hp, false),
        None => {
            log::warn!("round {round}, client {client}: every tuning candidate failed, using fixed settings");
            (cfg.fixed_hp, true)
        }
    };
    log::debug!("round {round}, client {client}: {} chose {hp:?} (val loss {})", tuner.name(), best.fitness);

    let seed = training_seed(cfg.seed, round, client);
    let mut out = client_update_fedavg(spec, global, shard, &hp, cfg.batch_size, cfg.update_mode, seed)?;
    out.tuning_evaluations = best.evaluations;
    out.fell_back = fell_back;
    Ok(out)
}

/// [`client_update_tuned`] with the vulture optimizer.
pub fn client_update_fedavo(
    spec: &ModelSpec,
    global: &ModelParams,
    shard: &ClientShard,
    cfg: &FlConfig,
    round: usize,
) -> Result<ClientOutcome> {
    client_update_tuned(spec, global, shard, cfg, &Tuner::Avo(AvoConfig::default()), round)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthetic_classification, SyntheticParams};
    use crate::fl::{noniid_search_space, Algorithm};
    use crate::metaheuristics::SearchSpace;

    fn setup() -> (ModelSpec, ModelParams, ClientShard) {
        let ds = synthetic_classification(&SyntheticParams::new(60, 3, 4, 0.5, 2)).unwrap();
        let spec = ModelSpec::mlp(4, &[], 3).unwrap();
        let shard = ClientShard::new(4, ds, 9).unwrap();
        (spec.clone(), ModelParams::zeros(&spec), shard)
    }

    fn small_cfg() -> FlConfig {
        FlConfig {
            population_size: 4,
            tuning_epochs: 2,
            search_space: noniid_search_space(),
            seed: 17,
            ..FlConfig::default()
        }
    }

    #[test]
    fn decode_rounds_epochs_half_up() {
        let hp = decode_hyperparams(&[0.05, 0.0, 0.0, 2.5]).unwrap();
        assert_eq!(hp.epochs, 3);
        assert_eq!(decode_hyperparams(&[0.05, 0.0, 0.0, 2.49]).unwrap().epochs, 2);
        assert_eq!(decode_hyperparams(&[0.05, 0.0, 0.0, 9.0]).unwrap().epochs, 5);
        assert_eq!(decode_hyperparams(&[0.05, 0.0, 0.0, 0.0]).unwrap().epochs, 1);
        assert!(decode_hyperparams(&[-1.0, 0.0, 0.0, 1.0]).is_none());
        assert!(decode_hyperparams(&[0.1, 0.0, 0.0]).is_none());
    }

    #[test]
    fn fedavg_zero_step_and_wrapper() {
        let (spec, global, shard) = setup();
        let hp = HyperParams::new(0.0, 0.0, 0.0, 1).unwrap();
        let out = client_update_fedavg(&spec, &global, &shard, &hp, 16, UpdateMode::Velocity, 1).unwrap();
        assert_eq!(out.params, global);
        assert_eq!(out.n_k, 60);

        let hp = HyperParams::new(0.1, 0.0, 0.0, 2).unwrap();
        let out = client_update_fedavg(&spec, &global, &shard, &hp, 16, UpdateMode::Velocity, 5).unwrap();
        let direct = train_local(&spec, &global, &shard.data.view(), &hp, 16, UpdateMode::Velocity, 5).unwrap();
        assert_eq!(out.params, direct.params);
    }

    #[test]
    fn tuned_update_is_contained_counted_and_reproducible() {
        let (spec, global, shard) = setup();
        let cfg = small_cfg();
        for algorithm in [Algorithm::FedAvo, Algorithm::FedPso, Algorithm::FedGwo] {
            let tuner = algorithm.tuner().unwrap();
            let a = client_update_tuned(&spec, &global, &shard, &cfg, &tuner, 3).unwrap();
            let b = client_update_tuned(&spec, &global, &shard, &cfg, &tuner, 3).unwrap();
            assert_eq!(a, b);
            assert!(!a.fell_back);
            assert_eq!(a.tuning_evaluations, 4 + 2 * 4);
            let hp = a.hyperparams;
            let pos = [hp.eta, hp.beta, hp.lambda, hp.epochs as f64];
            assert!(cfg.search_space.contains(&pos), "{algorithm}: {hp:?}");
            assert!((1..=5).contains(&hp.epochs));
        }
    }

    #[test]
    fn falls_back_when_every_candidate_fails() {
        let (spec, global, shard) = setup();
        // Momentum this large blows up within one epoch of single-row steps.
        let cfg = FlConfig {
            batch_size: 1,
            search_space: SearchSpace::new(vec![0.01, 1e8, 0.0, 1.0], vec![0.1, 1e9, 1e-9, 5.0], vec![3]).unwrap(),
            ..small_cfg()
        };
        let tuner = Tuner::Avo(AvoConfig::default());
        let out = client_update_tuned(&spec, &global, &shard, &cfg, &tuner, 1).unwrap();
        assert!(out.fell_back);
        assert_eq!(out.hyperparams, cfg.fixed_hp);
        assert_eq!(out.tuning_evaluations, 12);
    }
}
