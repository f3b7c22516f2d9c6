//! Per-epoch gradient statistics over the concatenated weight-gradient vector.
//!
//! For batch gradients `g_1..g_B` with mean `ḡ`:
//! `mean_norm = ‖ḡ‖₂` and `std_norm = √(1/B · Σ‖g_b − ḡ‖₂²)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormPair {
    pub mean_norm: f64,
    pub std_norm: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradientStats {
    pub mean_norm: f64,
    pub std_norm: f64,
    pub batches: usize,
    /// Same statistics restricted to each weight matrix, hidden layers first.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_layer: Vec<NormPair>,
}

/// Streaming (Welford) accumulator, so an epoch's batch gradients never need
/// to be held at once.
#[derive(Clone, Debug, Default)]
pub struct GradientAccumulator {
    count: usize,
    mean: Vec<Vec<f64>>,
    m2: Vec<f64>,
}

impl GradientAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, layers: &[&[f64]]) -> Result<()> {
        if self.count == 0 {
            self.mean = layers.iter().map(|l| vec![0.0; l.len()]).collect();
            self.m2 = vec![0.0; layers.len()];
        } else if layers.len() != self.mean.len()
            || layers
                .iter()
                .zip(&self.mean)
                .any(|(l, m)| l.len() != m.len())
        {
            return Err(Error::shape(
                "gradient_stats",
                "gradient layout changed between batches",
            ));
        }
        self.count += 1;
        let n = self.count as f64;
        for ((g, mean), m2) in layers.iter().zip(&mut self.mean).zip(&mut self.m2) {
            for (&x, mu) in g.iter().zip(mean.iter_mut()) {
                let delta = x - *mu;
                *mu += delta / n;
                *m2 += delta * (x - *mu);
            }
        }
        Ok(())
    }

    pub fn push_matrices(&mut self, grads: &[Matrix]) -> Result<()> {
        let slices: Vec<&[f64]> = grads.iter().map(Matrix::as_slice).collect();
        self.push(&slices)
    }

    pub fn finish(&self) -> Result<GradientStats> {
        if self.count == 0 {
            return Err(Error::InvalidArgument(
                "gradient statistics of zero batches".into(),
            ));
        }
        let n = self.count as f64;
        let per_layer: Vec<NormPair> = self
            .mean
            .iter()
            .zip(&self.m2)
            .map(|(mean, &m2)| NormPair {
                mean_norm: mean.iter().map(|v| v * v).sum::<f64>().sqrt(),
                std_norm: (m2.max(0.0) / n).sqrt(),
            })
            .collect();
        let mean_sq: f64 = self.mean.iter().flatten().map(|v| v * v).sum();
        let m2: f64 = self.m2.iter().sum();
        Ok(GradientStats {
            mean_norm: mean_sq.sqrt(),
            std_norm: (m2.max(0.0) / n).sqrt(),
            batches: self.count,
            per_layer,
        })
    }
}

/// Statistics of a list of flattened whole-network gradient vectors.
pub fn gradient_stats(batch_grads: &[Vec<f64>]) -> Result<GradientStats> {
    let mut acc = GradientAccumulator::new();
    for g in batch_grads {
        acc.push(&[g.as_slice()])?;
    }
    let mut stats = acc.finish()?;
    stats.per_layer.clear();
    Ok(stats)
}
