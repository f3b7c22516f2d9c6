//! Batch normalization with centering and variance scaling only; there are no
//! learnable scale or shift parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const DEFAULT_EPSILON: f64 = 1e-5;
pub const DEFAULT_MOMENTUM: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchNormState {
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    /// Weight kept by the running statistics on each update.
    pub momentum: f64,
    pub epsilon: f64,
}

/// Values retained from a forward pass for the backward pass.
#[derive(Clone, Debug)]
pub struct BatchNormCache {
    pub mode: Mode,
    pub inv_std: Vec<f64>,
}

/// Per-feature statistics of one training batch.
#[derive(Clone, Debug)]
pub struct BatchStats {
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
}

impl BatchNormState {
    pub fn new(features: usize) -> Self {
        Self {
            running_mean: vec![0.0; features],
            running_var: vec![1.0; features],
            momentum: DEFAULT_MOMENTUM,
            epsilon: DEFAULT_EPSILON,
        }
    }

    pub fn features(&self) -> usize {
        self.running_mean.len()
    }

    /// Normalizes `input` without touching the running statistics.
    ///
    /// In train mode the returned [`BatchStats`] should be folded in with
    /// [`BatchNormState::update_running`].
    pub fn normalize(
        &self,
        input: &Matrix,
        mode: Mode,
    ) -> Result<(Matrix, BatchNormCache, Option<BatchStats>)> {
        let (n, d) = input.shape();
        if d != self.features() {
            return Err(Error::shape(
                "batchnorm_forward",
                format!("{d} features, expected {}", self.features()),
            ));
        }
        let (mean, var, stats) = match mode {
            Mode::Train => {
                if n < 2 {
                    return Err(Error::InvalidArgument(
                        "batchnorm in train mode needs a batch of at least 2".into(),
                    ));
                }
                let mut mean = vec![0.0; d];
                for row in input.iter_rows() {
                    for (m, &v) in mean.iter_mut().zip(row) {
                        *m += v;
                    }
                }
                mean.iter_mut().for_each(|m| *m /= n as f64);
                let mut var = vec![0.0; d];
                for row in input.iter_rows() {
                    for ((s, &v), &m) in var.iter_mut().zip(row).zip(&mean) {
                        *s += (v - m) * (v - m);
                    }
                }
                var.iter_mut().for_each(|s| *s /= n as f64);
                let stats = BatchStats {
                    mean: mean.clone(),
                    var: var.clone(),
                };
                (mean, var, Some(stats))
            }
            Mode::Eval => (self.running_mean.clone(), self.running_var.clone(), None),
        };
        let inv_std: Vec<f64> = var
            .iter()
            .map(|v| 1.0 / (v + self.epsilon).sqrt())
            .collect();
        let mut out = input.clone();
        for r in 0..n {
            for ((x, &m), &s) in out.row_mut(r).iter_mut().zip(&mean).zip(&inv_std) {
                *x = (*x - m) * s;
            }
        }
        Ok((out, BatchNormCache { mode, inv_std }, stats))
    }

    pub fn update_running(&mut self, stats: &BatchStats) {
        let keep = self.momentum;
        for (r, &m) in self.running_mean.iter_mut().zip(&stats.mean) {
            *r = keep * *r + (1.0 - keep) * m;
        }
        for (r, &v) in self.running_var.iter_mut().zip(&stats.var) {
            *r = (keep * *r + (1.0 - keep) * v).max(0.0);
        }
    }

    /// Normalizes and, in train mode, updates the running statistics.
    pub fn forward(&mut self, input: &Matrix, mode: Mode) -> Result<(Matrix, BatchNormCache)> {
        let (out, cache, stats) = self.normalize(input, mode)?;
        if let Some(stats) = stats {
            self.update_running(&stats);
        }
        Ok((out, cache))
    }
}

/// Gradient of the normalization map given its output `normalized`.
///
/// Train mode: `dx = inv_std / n · (n·dy − Σdy − x̂·Σ(dy·x̂))` per feature.
pub fn batchnorm_backward(
    cache: &BatchNormCache,
    normalized: &Matrix,
    upstream: &Matrix,
) -> Result<Matrix> {
    if normalized.shape() != upstream.shape() {
        return Err(Error::shape(
            "batchnorm_backward",
            format!("{:?} vs {:?}", normalized.shape(), upstream.shape()),
        ));
    }
    let (n, d) = upstream.shape();
    let mut out = upstream.clone();
    match cache.mode {
        Mode::Eval => {
            for r in 0..n {
                for (g, &s) in out.row_mut(r).iter_mut().zip(&cache.inv_std) {
                    *g *= s;
                }
            }
        }
        Mode::Train => {
            let mut sum_dy = vec![0.0; d];
            let mut sum_dy_xhat = vec![0.0; d];
            for (dy, xh) in upstream.iter_rows().zip(normalized.iter_rows()) {
                for j in 0..d {
                    sum_dy[j] += dy[j];
                    sum_dy_xhat[j] += dy[j] * xh[j];
                }
            }
            let nf = n as f64;
            for r in 0..n {
                let xh = normalized.row(r);
                let row = out.row_mut(r);
                for j in 0..d {
                    row[j] =
                        cache.inv_std[j] / nf * (nf * row[j] - sum_dy[j] - xh[j] * sum_dy_xhat[j]);
                }
            }
        }
    }
    Ok(out)
}
