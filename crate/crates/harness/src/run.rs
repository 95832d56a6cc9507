use std::fs;
use std::path::{Path, PathBuf};

use fedavo_core::data::{load_idx, subsample, synthetic_classification, Dataset, SyntheticParams};
use fedavo_core::fl::{partition_iid, partition_noniid, run_federated, ClientShard, RoundMetrics};
use fedavo_core::nn::ModelSpec;
use rayon::prelude::*;

use crate::config::{DatasetSource, Distribution, ExperimentConfig};
use crate::report::rounds_to_threshold;
use crate::{HarnessError, Result};

/// Model, client shards and held-out test set for one seed.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub spec: ModelSpec,
    pub shards: Vec<ClientShard>,
    pub test: Dataset,
}

#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub metrics: Vec<RoundMetrics>,
    pub final_accuracy: f64,
    pub rounds_to_threshold: Option<usize>,
    pub csv_path: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub algorithm: String,
    pub threshold: f64,
    pub runs: Vec<SeedResult>,
    pub mean_final_accuracy: f64,
    /// Sample standard deviation; `None` for a single seed.
    pub std_final_accuracy: Option<f64>,
    pub summary_path: PathBuf,
}

/// Loads or generates the data for `seed` and partitions it. Data depends
/// only on the config and the seed, never on the algorithm, so algorithms
/// run with the same seed see identical shards.
pub fn prepare_data(cfg: &ExperimentConfig, seed: u64) -> Result<Prepared> {
    let (train, test) = match &cfg.dataset {
        DatasetSource::Synthetic(s) => {
            let params = SyntheticParams {
                n: s.train_samples + s.test_samples,
                classes: s.classes,
                dims: s.dims,
                spread: s.spread,
                scale: s.scale,
                seed,
            };
            synthetic_classification(&params)?.split_at(s.train_samples)
        }
        DatasetSource::MnistIdx(src) => {
            let train = load_idx(&src.train_images, &src.train_labels)?;
            let test = load_idx(&src.test_images, &src.test_labels)?;
            let classes = train.num_classes().max(test.num_classes());
            let (train, test) = (train.with_num_classes(classes)?, test.with_num_classes(classes)?);
            let train = match src.train_subsample {
                Some(n) => subsample(&train, n, true, seed)?,
                None => train,
            };
            let test = match src.test_subsample {
                Some(n) => subsample(&test, n, true, seed)?,
                None => test,
            };
            (train, test)
        }
    };
    let k = cfg.fl.num_clients;
    let shards = match cfg.distribution {
        Distribution::Iid => partition_iid(&train, k, cfg.shard_size, seed)?,
        Distribution::NonIid => partition_noniid(&train, k, cfg.classes_per_client, cfg.shard_size, seed)?,
    };
    let spec = ModelSpec::mlp(train.dim(), &cfg.hidden_layers, train.num_classes())?;
    Ok(Prepared { spec, shards, test })
}

/// One federated run with `seed` driving data, initialization and training.
pub fn run_seed(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<RoundMetrics>> {
    let data = prepare_data(cfg, seed)?;
    let fl = fedavo_core::FlConfig {
        seed,
        stop_at_accuracy: cfg.stop_at_threshold.then_some(cfg.threshold),
        ..cfg.fl.clone()
    };
    Ok(run_federated(&data.spec, &data.shards, &data.test, &fl)?)
}

/// Renders per-round metrics: `round, global_accuracy, global_loss`, then
/// for each selected-client slot `client_id, local_accuracy, local_loss,
/// eta, beta, lambda, epochs, tuning_evaluations`. Round 0 leaves the
/// client slots empty.
pub fn metrics_csv(metrics: &[RoundMetrics]) -> Result<Vec<u8>> {
    const SLOT: [&str; 8] =
        ["client_id", "local_accuracy", "local_loss", "eta", "beta", "lambda", "epochs", "tuning_evaluations"];
    let slots = metrics.iter().map(|m| m.per_client.len()).max().unwrap_or(0);
    let mut header = vec!["round".to_string(), "global_accuracy".into(), "global_loss".into()];
    for s in 0..slots {
        header.extend(SLOT.iter().map(|name| format!("{name}_{s}")));
    }

    let to_err = |source| HarnessError::Csv { path: PathBuf::from("<memory>"), source };
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    out.write_record(&header).map_err(to_err)?;
    for m in metrics {
        let mut row = vec![m.round.to_string(), m.global_accuracy.to_string(), m.global_loss.to_string()];
        for c in &m.per_client {
            let hp = &c.hyperparams;
            row.extend([
                c.client_id.to_string(),
                c.local_accuracy.to_string(),
                c.local_loss.to_string(),
                hp.eta.to_string(),
                hp.beta.to_string(),
                hp.lambda.to_string(),
                hp.epochs.to_string(),
                c.tuning_evaluations.to_string(),
            ]);
        }
        row.resize(header.len(), String::new());
        out.write_record(&row).map_err(to_err)?;
    }
    out.into_inner().map_err(|e| HarnessError::MalformedCsv { path: "<memory>".into(), msg: e.to_string() })
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

fn mean_std(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.len() > 1).then(|| (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Runs every seed (concurrently), writes `<algorithm>_seed<N>.csv` per
/// seed and `<algorithm>_summary.csv` into the output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    let dir = &cfg.output_path;
    fs::create_dir_all(dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
    let algorithm = cfg.fl.algorithm.name().to_string();

    let runs = cfg
        .seeds
        .par_iter()
        .map(|&seed| {
            let attempt = || -> Result<SeedResult> {
                let metrics = run_seed(cfg, seed)?;
                let csv_path = dir.join(format!("{algorithm}_seed{seed}.csv"));
                write(&csv_path, &metrics_csv(&metrics)?)?;
                let series: Vec<(usize, f64)> =
                    metrics.iter().filter(|m| m.round > 0).map(|m| (m.round, m.global_accuracy)).collect();
                let rounds = if series.is_empty() { None } else { rounds_to_threshold(&series, cfg.threshold)? };
                let final_accuracy = metrics.last().map_or(f64::NAN, |m| m.global_accuracy);
                Ok(SeedResult { seed, metrics, final_accuracy, rounds_to_threshold: rounds, csv_path })
            };
            attempt().map_err(|e| HarnessError::Run { seed, source: Box::new(e) })
        })
        .collect::<Result<Vec<_>>>()?;

    let finals: Vec<f64> = runs.iter().map(|r| r.final_accuracy).collect();
    let (mean, std) = mean_std(&finals);
    let crossed: Vec<f64> = runs.iter().filter_map(|r| r.rounds_to_threshold.map(|n| n as f64)).collect();
    let mean_rounds = (!crossed.is_empty()).then(|| crossed.iter().sum::<f64>() / crossed.len() as f64);

    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let mut text = String::from(
        "algorithm,seeds,final_accuracy_mean,final_accuracy_std,threshold,seeds_crossed,rounds_to_threshold_mean\n",
    );
    text.push_str(&format!(
        "{algorithm},{},{mean},{},{},{},{}\n",
        runs.len(),
        opt(std),
        cfg.threshold,
        crossed.len(),
        opt(mean_rounds)
    ));
    let summary_path = dir.join(format!("{algorithm}_summary.csv"));
    write(&summary_path, text.as_bytes())?;
    for r in &runs {
        log::info!(
            "{algorithm} seed {}: final accuracy {:.4}, rounds to threshold {:?}",
            r.seed,
            r.final_accuracy,
            r.rounds_to_threshold
        );
    }

    Ok(Summary {
        algorithm,
        threshold: cfg.threshold,
        runs,
        mean_final_accuracy: mean,
        std_final_accuracy: std,
        summary_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_standard_deviation() {
        let (mean, std) = mean_std(&[0.8, 0.9, 1.0]);
        assert!((mean - 0.9).abs() < 1e-15);
        assert!((std.unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(mean_std(&[0.5]), (0.5, None));
    }
}
