//! Labelled datasets: IDX loading, synthetic blobs and subsampling.

mod idx;
mod synthetic;

pub use idx::{encode_idx, load_idx, parse_idx};
pub use synthetic::{synthetic_classification, SyntheticParams};

use rand::seq::{index, SliceRandom};
use thiserror::Error;

use crate::nn::Batch;
use crate::rng::stream;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("not an IDX file")]
    NotIdx,
    #[error("images/labels disagree: {images} images, {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("unexpected end of data")]
    Truncated,
    #[error("invalid dataset: {0}")]
    Invalid(String),
    #[error("requested {requested} samples but only {available} available")]
    NotEnoughSamples { requested: usize, available: usize },
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

/// Row-major `N × D` inputs in `[0, 1]` with labels in `[0, M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    inputs: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn new(inputs: Vec<f64>, labels: Vec<usize>, dim: usize, num_classes: usize) -> Result<Self> {
        if dim == 0 {
            return Err(DataError::Invalid("input dimension must be positive".into()));
        }
        if inputs.len() != labels.len() * dim {
            return Err(DataError::Invalid(format!(
                "{} input values do not fill {} rows of {dim}",
                inputs.len(),
                labels.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(DataError::Invalid(format!("label {l} out of range for {num_classes} classes")));
        }
        if inputs.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(DataError::Invalid("inputs must be finite and within [0, 1]".into()));
        }
        Ok(Self { inputs, labels, dim, num_classes })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn view(&self) -> Batch<'_> {
        Batch { inputs: &self.inputs, labels: &self.labels, dim: self.dim }
    }

    /// Copies the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        let mut inputs = Vec::with_capacity(rows.len() * self.dim);
        for &r in rows {
            inputs.extend_from_slice(self.row(r));
        }
        Dataset {
            inputs,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            dim: self.dim,
            num_classes: self.num_classes,
        }
    }

    /// Same rows, reporting `num_classes` classes (must not shrink).
    pub fn with_num_classes(mut self, num_classes: usize) -> Result<Self> {
        if num_classes < self.num_classes && self.labels.iter().any(|&l| l >= num_classes) {
            return Err(DataError::Invalid(format!("labels exceed {num_classes} classes")));
        }
        self.num_classes = num_classes;
        Ok(self)
    }

    /// Row indices grouped by class.
    pub fn class_indices(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.num_classes];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        by_class
    }

    /// Splits into the first `n` rows and the rest.
    pub fn split_at(&self, n: usize) -> (Dataset, Dataset) {
        let n = n.min(self.len());
        let head: Vec<usize> = (0..n).collect();
        let tail: Vec<usize> = (n..self.len()).collect();
        (self.select(&head), self.select(&tail))
    }
}

/// Draws `n` rows without replacement.
///
/// In stratified mode each class gets its largest-remainder share of `n`,
/// so per-class counts stay within one of the exact proportion; the drawn
/// rows are then shuffled together.
pub fn subsample(ds: &Dataset, n: usize, stratified: bool, seed: u64) -> Result<Dataset> {
    if n > ds.len() {
        return Err(DataError::NotEnoughSamples { requested: n, available: ds.len() });
    }
    let mut rng = stream(seed, &[0x5AB5]);
    if !stratified {
        let rows = index::sample(&mut rng, ds.len(), n).into_vec();
        return Ok(ds.select(&rows));
    }

    let by_class = ds.class_indices();
    let total = ds.len() as u128;
    let mut quota: Vec<usize> = by_class.iter().map(|c| (n as u128 * c.len() as u128 / total) as usize).collect();
    let mut remainders: Vec<(u128, usize)> =
        by_class.iter().enumerate().map(|(k, c)| ((n as u128 * c.len() as u128) % total, k)).collect();
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = n - quota.iter().sum::<usize>();
    for &(_, k) in remainders.iter().take(short) {
        quota[k] += 1;
    }

    let mut rows = Vec::with_capacity(n);
    for (members, q) in by_class.iter().zip(quota) {
        let picks = index::sample(&mut rng, members.len(), q);
        rows.extend(picks.iter().map(|i| members[i]));
    }
    rows.shuffle(&mut rng);
    Ok(ds.select(&rows))
}
