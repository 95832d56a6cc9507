use std::cmp::Ordering;

use super::{Batch, NnError, Result};
use crate::rng::Draws;

/// Layer widths from input to class count. Hidden layers use ReLU, the
/// output layer a softmax.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    layer_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Layer {
    pub n_in: usize,
    pub n_out: usize,
    /// Offset of the `n_out × n_in` row-major weight block.
    pub w: usize,
    /// Offset of the `n_out` bias block.
    pub b: usize,
}

impl ModelSpec {
    pub fn new(layer_sizes: Vec<usize>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(NnError::InvalidSpec("need at least an input and an output layer".into()));
        }
        if layer_sizes.contains(&0) {
            return Err(NnError::InvalidSpec("layer sizes must be positive".into()));
        }
        if *layer_sizes.last().unwrap() < 2 {
            return Err(NnError::InvalidSpec("need at least two classes".into()));
        }
        Ok(Self { layer_sizes })
    }

    pub fn mlp(input_dim: usize, hidden: &[usize], classes: usize) -> Result<Self> {
        let mut sizes = Vec::with_capacity(hidden.len() + 2);
        sizes.push(input_dim);
        sizes.extend_from_slice(hidden);
        sizes.push(classes);
        Self::new(sizes)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_dim(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn num_classes(&self) -> usize {
        *self.layer_sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    pub(crate) fn layers(&self) -> impl Iterator<Item = Layer> + '_ {
        let mut offset = 0;
        self.layer_sizes.windows(2).map(move |w| {
            let (n_in, n_out) = (w[0], w[1]);
            let layer = Layer { n_in, n_out, w: offset, b: offset + n_in * n_out };
            offset += n_in * n_out + n_out;
            layer
        })
    }

    pub(crate) fn check_batch(&self, batch: &Batch) -> Result<()> {
        if batch.dim != self.input_dim() {
            return Err(NnError::DimensionMismatch { expected: self.input_dim(), found: batch.dim });
        }
        let m = self.num_classes();
        if let Some(&label) = batch.labels.iter().find(|&&l| l >= m) {
            return Err(NnError::LabelOutOfRange { label, classes: m });
        }
        Ok(())
    }

    pub(crate) fn check_params(&self, params: &ModelParams) -> Result<()> {
        if params.values.len() != self.num_params() {
            return Err(NnError::DimensionMismatch { expected: self.num_params(), found: params.values.len() });
        }
        Ok(())
    }
}

/// Flat parameter vector laid out layer by layer as weights then biases.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    values: Vec<f64>,
}

impl ModelParams {
    pub fn zeros(spec: &ModelSpec) -> Self {
        Self { values: vec![0.0; spec.num_params()] }
    }

    pub fn from_vec(spec: &ModelSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.num_params() {
            return Err(NnError::DimensionMismatch { expected: spec.num_params(), found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(NnError::Diverged);
        }
        Ok(Self { values })
    }

    /// Wraps a raw vector without checking it against a spec.
    pub fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Every entry uniform in `[-scale, scale]`.
    pub fn uniform<D: Draws + ?Sized>(spec: &ModelSpec, scale: f64, rng: &mut D) -> Self {
        let values = (0..spec.num_params()).map(|_| scale * (2.0 * rng.uniform() - 1.0)).collect();
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Per-row activation buffers reused across calls.
pub(crate) struct Workspace {
    acts: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new(spec: &ModelSpec) -> Self {
        let acts = spec.layer_sizes().iter().map(|&n| vec![0.0; n]).collect();
        let deltas = spec.layer_sizes().iter().map(|&n| vec![0.0; n]).collect();
        Self { acts, deltas }
    }

    /// Runs one row forward and returns the class probabilities.
    pub fn forward_row(&mut self, spec: &ModelSpec, params: &[f64], x: &[f64]) -> &[f64] {
        self.acts[0].copy_from_slice(x);
        let n_layers = spec.layer_sizes().len() - 1;
        for (l, layer) in spec.layers().enumerate() {
            let (before, after) = self.acts.split_at_mut(l + 1);
            let input = &before[l];
            let out = &mut after[0];
            let w = &params[layer.w..layer.b];
            let b = &params[layer.b..layer.b + layer.n_out];
            for (o, z) in out.iter_mut().enumerate() {
                let row = &w[o * layer.n_in..(o + 1) * layer.n_in];
                *z = b[o] + row.iter().zip(input.iter()).map(|(a, b)| a * b).sum::<f64>();
            }
            if l + 1 < n_layers {
                for z in out.iter_mut() {
                    *z = z.max(0.0);
                }
            } else {
                softmax_in_place(out);
            }
        }
        &self.acts[n_layers]
    }

    /// Adds the cross-entropy gradient of the row last passed to
    /// [`forward_row`](Self::forward_row) into `grad`.
    pub fn backward_row(&mut self, spec: &ModelSpec, params: &[f64], label: usize, grad: &mut [f64]) {
        let n_layers = spec.layer_sizes().len() - 1;
        {
            let (probs, delta) = (&self.acts[n_layers], &mut self.deltas[n_layers]);
            delta.copy_from_slice(probs);
            delta[label] -= 1.0;
        }
        let layers: Vec<_> = spec.layers().collect();
        for l in (0..n_layers).rev() {
            let layer = layers[l];
            let (lower, upper) = self.deltas.split_at_mut(l + 1);
            let delta = &upper[0];
            let input = &self.acts[l];
            for (o, &d) in delta.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let g = &mut grad[layer.w + o * layer.n_in..layer.w + (o + 1) * layer.n_in];
                for (gi, xi) in g.iter_mut().zip(input) {
                    *gi += d * xi;
                }
                grad[layer.b + o] += d;
            }
            if l > 0 {
                let prev = &mut lower[l];
                prev.iter_mut().for_each(|p| *p = 0.0);
                let w = &params[layer.w..layer.b];
                for (o, &d) in delta.iter().enumerate() {
                    if d == 0.0 {
                        continue;
                    }
                    let row = &w[o * layer.n_in..(o + 1) * layer.n_in];
                    for (p, wi) in prev.iter_mut().zip(row) {
                        *p += d * wi;
                    }
                }
                for (p, a) in prev.iter_mut().zip(&self.acts[l]) {
                    if *a <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
        }
    }
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Orders rows by label, then input values, so accumulation does not depend
/// on how the rows arrived.
pub(crate) fn canonical_order(batch: &Batch, rows: &mut [usize]) {
    rows.sort_by(|&a, &b| {
        batch.labels[a].cmp(&batch.labels[b]).then_with(|| {
            batch
                .row(a)
                .iter()
                .zip(batch.row(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        })
    });
}

/// Mean gradient over `rows` of `batch`, written into `grad`.
pub(crate) fn batch_gradient(
    spec: &ModelSpec,
    params: &[f64],
    batch: &Batch,
    rows: &mut [usize],
    grad: &mut [f64],
    ws: &mut Workspace,
) {
    canonical_order(batch, rows);
    grad.iter_mut().for_each(|g| *g = 0.0);
    for &r in rows.iter() {
        ws.forward_row(spec, params, batch.row(r));
        ws.backward_row(spec, params, batch.labels[r], grad);
    }
    let scale = 1.0 / rows.len() as f64;
    grad.iter_mut().for_each(|g| *g *= scale);
}

/// Class probabilities, one row per sample.
pub fn forward(spec: &ModelSpec, params: &ModelParams, batch: &Batch) -> Result<Vec<Vec<f64>>> {
    spec.check_params(params)?;
    spec.check_batch(batch)?;
    let mut ws = Workspace::new(spec);
    Ok((0..batch.len()).map(|i| ws.forward_row(spec, &params.values, batch.row(i)).to_vec()).collect())
}

/// Gradient of the mean cross-entropy with respect to every parameter.
pub fn gradient(spec: &ModelSpec, params: &ModelParams, batch: &Batch) -> Result<Vec<f64>> {
    spec.check_params(params)?;
    spec.check_batch(batch)?;
    if batch.is_empty() {
        return Err(NnError::EmptyBatch);
    }
    let mut rows: Vec<usize> = (0..batch.len()).collect();
    let mut grad = vec![0.0; spec.num_params()];
    let mut ws = Workspace::new(spec);
    batch_gradient(spec, &params.values, batch, &mut rows, &mut grad, &mut ws);
    Ok(grad)
}
