//! Experiment configuration: a flat JSON object, strictly parsed.

use std::path::PathBuf;

use fedavo_core::fl::{iid_search_space, noniid_search_space, Algorithm, FlConfig, EPOCHS_DIM};
use fedavo_core::nn::{HyperParams, UpdateMode};
use fedavo_core::SearchSpace;
use serde::Deserialize;
use serde_json::{Map, Value};

use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Distribution {
    Iid,
    NonIid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSource {
    pub train_samples: usize,
    pub test_samples: usize,
    pub classes: usize,
    pub dims: usize,
    pub spread: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdxSource {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    /// Stratified subsample sizes; `None` keeps the full split.
    pub train_subsample: Option<usize>,
    pub test_subsample: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    Synthetic(SyntheticSource),
    MnistIdx(IdxSource),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Federated settings; `fl.seed` is replaced by each entry of `seeds`.
    pub fl: FlConfig,
    pub dataset: DatasetSource,
    pub distribution: Distribution,
    pub classes_per_client: usize,
    pub shard_size: usize,
    pub hidden_layers: Vec<usize>,
    pub threshold: f64,
    /// Stop each run once the threshold is crossed.
    pub stop_at_threshold: bool,
    pub output_path: PathBuf,
    pub seeds: Vec<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    num_clients: Option<usize>,
    client_fraction: Option<f64>,
    batch_size: Option<usize>,
    rounds: Option<usize>,
    algorithm: Option<String>,
    tuning_epochs: Option<usize>,
    population_size: Option<usize>,
    eta_bounds: Option<[f64; 2]>,
    beta_bounds: Option<[f64; 2]>,
    lambda_bounds: Option<[f64; 2]>,
    epochs_bounds: Option<[f64; 2]>,
    eta: Option<f64>,
    beta: Option<f64>,
    lambda: Option<f64>,
    epochs: Option<usize>,
    update_mode: Option<String>,
    dataset: Option<String>,
    distribution: Option<String>,
    classes_per_client: Option<usize>,
    shard_size: Option<usize>,
    hidden_layers: Option<Vec<usize>>,
    threshold: Option<f64>,
    stop_at_threshold: Option<bool>,
    output_path: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
    synthetic_train: Option<usize>,
    synthetic_test: Option<usize>,
    synthetic_classes: Option<usize>,
    synthetic_dims: Option<usize>,
    synthetic_spread: Option<f64>,
    synthetic_scale: Option<f64>,
    train_images: Option<PathBuf>,
    train_labels: Option<PathBuf>,
    test_images: Option<PathBuf>,
    test_labels: Option<PathBuf>,
    train_subsample: Option<usize>,
    test_subsample: Option<usize>,
}

fn invalid(key: &str, msg: impl Into<String>) -> HarnessError {
    HarnessError::Config { key: key.to_string(), msg: msg.into() }
}

/// Decodes one key at a time so a type error can name its key.
fn decode(map: Map<String, Value>) -> Result<RawConfig, HarnessError> {
    for (key, value) in &map {
        let single = Value::Object(Map::from_iter([(key.clone(), value.clone())]));
        RawConfig::deserialize(single).map_err(|e| {
            let msg = e.to_string();
            if msg.starts_with("unknown field") {
                invalid(key, "unknown key")
            } else {
                invalid(key, msg)
            }
        })?;
    }
    RawConfig::deserialize(Value::Object(map)).map_err(|e| invalid("<config>", e.to_string()))
}

fn bounds(space: &SearchSpace, overrides: [(&str, Option<[f64; 2]>); 4]) -> Result<SearchSpace, HarnessError> {
    let mut lower = space.lower().to_vec();
    let mut upper = space.upper().to_vec();
    for (dim, (key, value)) in overrides.into_iter().enumerate() {
        if let Some([lo, hi]) = value {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo >= 0.0) {
                return Err(invalid(key, format!("{key} must be a nonnegative [low, high] pair")));
            }
            lower[dim] = lo;
            upper[dim] = hi;
        }
    }
    SearchSpace::new(lower, upper, vec![EPOCHS_DIM]).map_err(|e| invalid("search space", e.to_string()))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, HarnessError> {
    let value: Value = serde_json::from_str(text).map_err(|e| invalid("<config>", e.to_string()))?;
    let Value::Object(map) = value else {
        return Err(invalid("<config>", "config must be a JSON object"));
    };
    let raw = decode(map)?;

    let algorithm = match raw.algorithm.as_deref() {
        None => Algorithm::FedAvo,
        Some(s) => s.parse().map_err(|_| invalid("algorithm", format!("unknown algorithm {s:?}")))?,
    };
    let distribution = match raw.distribution.as_deref() {
        None | Some("iid") => Distribution::Iid,
        Some("noniid") => Distribution::NonIid,
        Some(s) => return Err(invalid("distribution", format!("unknown distribution {s:?}"))),
    };
    let update_mode = match raw.update_mode.as_deref() {
        None | Some("velocity") => UpdateMode::Velocity,
        Some("literal") => UpdateMode::Literal,
        Some(s) => return Err(invalid("update_mode", format!("unknown update mode {s:?}"))),
    };

    let default_space = match distribution {
        Distribution::Iid => iid_search_space(),
        Distribution::NonIid => noniid_search_space(),
    };
    let search_space = bounds(
        &default_space,
        [
            ("eta_bounds", raw.eta_bounds),
            ("beta_bounds", raw.beta_bounds),
            ("lambda_bounds", raw.lambda_bounds),
            ("epochs_bounds", raw.epochs_bounds),
        ],
    )?;

    let fixed_hp = HyperParams::new(
        raw.eta.unwrap_or(0.01),
        raw.beta.unwrap_or(0.0),
        raw.lambda.unwrap_or(0.0),
        raw.epochs.unwrap_or(5),
    )
    .map_err(|e| invalid("eta/beta/lambda/epochs", e.to_string()))?;

    let defaults = FlConfig::default();
    let fl = FlConfig {
        num_clients: raw.num_clients.unwrap_or(defaults.num_clients),
        client_fraction: raw.client_fraction.unwrap_or(defaults.client_fraction),
        batch_size: raw.batch_size.unwrap_or(defaults.batch_size),
        rounds: raw.rounds.unwrap_or(20),
        algorithm,
        tuning_epochs: raw.tuning_epochs.unwrap_or(defaults.tuning_epochs),
        population_size: raw.population_size.unwrap_or(defaults.population_size),
        search_space,
        fixed_hp,
        seed: 0,
        update_mode,
        stop_at_accuracy: None,
    };
    for (key, bad) in [
        ("num_clients", fl.num_clients == 0),
        ("client_fraction", !(fl.client_fraction > 0.0 && fl.client_fraction <= 1.0)),
        ("batch_size", fl.batch_size == 0),
        ("tuning_epochs", fl.tuning_epochs == 0),
        ("population_size", fl.population_size < 2),
    ] {
        if bad {
            return Err(invalid(key, format!("{key} out of range")));
        }
    }
    fl.validate().map_err(|e| invalid("search space", e.to_string()))?;

    let dataset = match raw.dataset.as_deref() {
        None | Some("synthetic") => DatasetSource::Synthetic(SyntheticSource {
            train_samples: raw.synthetic_train.unwrap_or(5000),
            test_samples: raw.synthetic_test.unwrap_or(1000),
            classes: raw.synthetic_classes.unwrap_or(10),
            dims: raw.synthetic_dims.unwrap_or(10),
            spread: raw.synthetic_spread.unwrap_or(1.0),
            scale: raw.synthetic_scale.unwrap_or(fedavo_core::data::SyntheticParams::DEFAULT_SCALE),
        }),
        Some("mnist_idx") => {
            let path = |key: &str, v: Option<PathBuf>| {
                v.ok_or_else(|| invalid(key, format!("{key} is required for mnist_idx")))
            };
            DatasetSource::MnistIdx(IdxSource {
                train_images: path("train_images", raw.train_images)?,
                train_labels: path("train_labels", raw.train_labels)?,
                test_images: path("test_images", raw.test_images)?,
                test_labels: path("test_labels", raw.test_labels)?,
                train_subsample: raw.train_subsample,
                test_subsample: raw.test_subsample,
            })
        }
        Some(s) => return Err(invalid("dataset", format!("unknown dataset {s:?}"))),
    };
    if let DatasetSource::Synthetic(s) = &dataset {
        if s.test_samples == 0 {
            return Err(invalid("synthetic_test", "synthetic_test out of range"));
        }
        if s.classes < 2 || s.dims < 2 || s.train_samples + s.test_samples < s.classes {
            return Err(invalid("synthetic_classes", "need at least 2 classes, 2 dims and one sample per class"));
        }
        if !(s.spread >= 0.0 && s.spread.is_finite()) || !(s.scale > 0.0 && s.scale.is_finite()) {
            return Err(invalid("synthetic_spread", "spread must be >= 0 and scale > 0"));
        }
    }

    let hidden_layers = raw.hidden_layers.unwrap_or_else(|| match dataset {
        DatasetSource::Synthetic(_) => Vec::new(),
        DatasetSource::MnistIdx(_) => vec![32],
    });
    if hidden_layers.contains(&0) {
        return Err(invalid("hidden_layers", "hidden layers must be nonempty"));
    }

    let threshold = raw.threshold.unwrap_or(0.9);
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(invalid("threshold", "threshold out of range"));
    }
    let seeds = raw.seeds.unwrap_or_else(|| vec![1]);
    if seeds.is_empty() {
        return Err(invalid("seeds", "seeds must be nonempty"));
    }
    let classes_per_client = raw.classes_per_client.unwrap_or(3);
    if classes_per_client == 0 {
        return Err(invalid("classes_per_client", "classes_per_client out of range"));
    }
    let shard_size = raw.shard_size.unwrap_or(500);
    if shard_size < 2 {
        return Err(invalid("shard_size", "shard_size out of range"));
    }

    Ok(ExperimentConfig {
        fl,
        dataset,
        distribution,
        classes_per_client,
        shard_size,
        hidden_layers,
        threshold,
        stop_at_threshold: raw.stop_at_threshold.unwrap_or(false),
        output_path: raw.output_path.unwrap_or_else(|| PathBuf::from("results")),
        seeds,
    })
}
