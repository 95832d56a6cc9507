use rand::seq::index;
use rayon::prelude::*;

use super::client::{client_update_fedavg, client_update_tuned, training_seed, ClientOutcome};
use super::{aggregate, ClientShard, FlConfig, FlError, Result};
use crate::data::Dataset;
use crate::nn::{evaluate, HyperParams, ModelParams, ModelSpec};
use crate::rng::stream;

const INIT_STREAM: u64 = 0x1A17;
const SELECT_STREAM: u64 = 0x5E1E;
const INIT_SCALE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ClientReport {
    pub client_id: usize,
    /// Local model evaluated on the client's own shard.
    pub local_accuracy: f64,
    pub local_loss: f64,
    pub hyperparams: HyperParams,
    pub tuning_evaluations: usize,
    pub fell_back: bool,
}

/// State after one round. Round 0 describes the initial model and has no
/// client reports.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundMetrics {
    pub round: usize,
    pub global_accuracy: f64,
    pub global_loss: f64,
    pub selected_clients: Vec<usize>,
    pub per_client: Vec<ClientReport>,
    /// Model bytes moved this round (download plus upload, 8 bytes per weight).
    pub bytes_transferred: usize,
}

/// Initial global model, uniform in `[-0.05, 0.05]`.
pub fn initial_params(spec: &ModelSpec, seed: u64) -> ModelParams {
    ModelParams::uniform(spec, INIT_SCALE, &mut stream(seed, &[INIT_STREAM]))
}

/// `max(⌊K·p⌋, 1)` distinct clients, sorted ascending.
pub fn select_clients(num_clients: usize, fraction: f64, round: usize, seed: u64) -> Result<Vec<usize>> {
    if num_clients == 0 || !(fraction > 0.0 && fraction <= 1.0) {
        return Err(FlError::InvalidConfig(format!(
            "need at least one client and a fraction in (0, 1], got {num_clients} and {fraction}"
        )));
    }
    let q = ((num_clients as f64 * fraction).floor() as usize).clamp(1, num_clients);
    let mut rng = stream(seed, &[SELECT_STREAM, round as u64]);
    let mut ids = index::sample(&mut rng, num_clients, q).into_vec();
    ids.sort_unstable();
    Ok(ids)
}

fn client_step(
    spec: &ModelSpec,
    global: &ModelParams,
    shard: &ClientShard,
    cfg: &FlConfig,
    round: usize,
) -> Result<(ClientOutcome, ClientReport)> {
    let outcome = match cfg.algorithm.tuner() {
        None => client_update_fedavg(
            spec,
            global,
            shard,
            &cfg.fixed_hp,
            cfg.batch_size,
            cfg.update_mode,
            training_seed(cfg.seed, round, shard.client_id),
        )?,
        Some(tuner) => client_update_tuned(spec, global, shard, cfg, &tuner, round)?,
    };
    let local = evaluate(spec, &outcome.params, &shard.data.view())?;
    let report = ClientReport {
        client_id: shard.client_id,
        local_accuracy: local.accuracy,
        local_loss: local.loss,
        hyperparams: outcome.hyperparams,
        tuning_evaluations: outcome.tuning_evaluations,
        fell_back: outcome.fell_back,
    };
    Ok((outcome, report))
}

/// Runs `cfg.rounds` communication rounds over pre-partitioned shards
/// (`shards[k]` must belong to client `k`) and evaluates the global model
/// on `test` after each. Selected clients train concurrently; aggregation
/// follows ascending client id.
pub fn run_federated(
    spec: &ModelSpec,
    shards: &[ClientShard],
    test: &Dataset,
    cfg: &FlConfig,
) -> Result<Vec<RoundMetrics>> {
    cfg.validate()?;
    if shards.len() != cfg.num_clients {
        return Err(FlError::InvalidConfig(format!("{} shards for {} clients", shards.len(), cfg.num_clients)));
    }
    if let Some(k) = shards.iter().enumerate().position(|(k, s)| s.client_id != k) {
        return Err(FlError::InvalidConfig(format!("shard {k} has client id {}", shards[k].client_id)));
    }

    let mut global = initial_params(spec, cfg.seed);
    let initial = evaluate(spec, &global, &test.view())?;
    let mut history = vec![RoundMetrics {
        round: 0,
        global_accuracy: initial.accuracy,
        global_loss: initial.loss,
        selected_clients: Vec::new(),
        per_client: Vec::new(),
        bytes_transferred: 0,
    }];
    let reached = |m: &RoundMetrics| cfg.stop_at_accuracy.is_some_and(|a| m.global_accuracy >= a);

    for round in 1..=cfg.rounds {
        let selected = select_clients(cfg.num_clients, cfg.client_fraction, round, cfg.seed)?;
        let results: Vec<(ClientOutcome, ClientReport)> = selected
            .par_iter()
            .map(|&k| {
                client_step(spec, &global, &shards[k], cfg, round).map_err(|e| FlError::Client {
                    round,
                    client: k,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;

        let (outcomes, per_client): (Vec<_>, Vec<_>) = results.into_iter().unzip();
        let updates: Vec<(ModelParams, usize)> = outcomes.into_iter().map(|o| (o.params, o.n_k)).collect();
        global = aggregate(&updates)?;
        let eval = evaluate(spec, &global, &test.view())?;
        log::info!("{} round {round}: accuracy {:.4}, loss {:.4}", cfg.algorithm, eval.accuracy, eval.loss);
        history.push(RoundMetrics {
            round,
            global_accuracy: eval.accuracy,
            global_loss: eval.loss,
            bytes_transferred: 2 * selected.len() * global.len() * std::mem::size_of::<f64>(),
            selected_clients: selected,
            per_client,
        });
        if reached(&history[history.len() - 1]) {
            break;
        }
    }
    Ok(history)
}
