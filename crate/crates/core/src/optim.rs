//! Bias-corrected Adam over latent weights.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Network;
use crate::numerics::Matrix;

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamState {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(len: usize, lr: f64) -> Result<Self> {
        if !(lr.is_finite() && lr > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive, got {lr}"
            )));
        }
        Ok(Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            lr,
            beta1: BETA1,
            beta2: BETA2,
            eps: EPSILON,
        })
    }

    /// One Adam update of `weights` in place; afterwards every weight is
    /// clipped to [−1, +1] when `clip` is set.
    pub fn step(&mut self, weights: &mut [f64], grads: &[f64], clip: bool) -> Result<()> {
        if weights.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::shape(
                "adam_step",
                format!(
                    "state {} weights {} grads {}",
                    self.m.len(),
                    weights.len(),
                    grads.len()
                ),
            ));
        }
        self.t += 1;
        let t = self.t as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..weights.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / c1;
            let v_hat = self.v[i] / c2;
            let mut w = weights[i] - self.lr * m_hat / (v_hat.sqrt() + self.eps);
            if clip {
                w = w.clamp(-1.0, 1.0);
            }
            weights[i] = w;
        }
        Ok(())
    }
}

/// Adam states for every weight matrix of a network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkOptimizer {
    states: Vec<AdamState>,
}

impl NetworkOptimizer {
    pub fn new(net: &Network, lr: f64) -> Result<Self> {
        let states = net
            .weight_layers()
            .map(|l| AdamState::new(l.latent_weights.as_slice().len(), lr))
            .collect::<Result<_>>()?;
        Ok(Self { states })
    }

    /// Applies per-layer gradients; binarized layers are clipped.
    pub fn step(&mut self, net: &mut Network, grads: &[Matrix]) -> Result<()> {
        if grads.len() != self.states.len() {
            return Err(Error::shape(
                "adam_step",
                format!("{} gradients for {} layers", grads.len(), self.states.len()),
            ));
        }
        for ((layer, state), grad) in net.weight_layers_mut().zip(&mut self.states).zip(grads) {
            if grad.shape() != layer.latent_weights.shape() {
                return Err(Error::shape(
                    "adam_step",
                    format!("{:?} vs {:?}", grad.shape(), layer.latent_weights.shape()),
                ));
            }
            let clip = layer.binarize_weights;
            state.step(layer.latent_weights.as_mut_slice(), grad.as_slice(), clip)?;
        }
        Ok(())
    }

    pub fn steps_taken(&self) -> u64 {
        self.states.first().map_or(0, |s| s.t)
    }
}
