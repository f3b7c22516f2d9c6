use serde::{Deserialize, Serialize};

use super::activation::{sign_forward, ActivationKind};
use super::batchnorm::{batchnorm_backward, BatchNormCache, BatchNormState, BatchStats, Mode};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Element-wise sign of the latent weights, with 0 mapped to −1.
pub fn binarize_weights(latent: &Matrix) -> Matrix {
    latent.map(sign_forward)
}

/// A bias-free dense layer followed by optional batchnorm and an activation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    /// `fan_in × fan_out` full-precision weights seen by the optimizer.
    pub latent_weights: Matrix,
    pub binarize_weights: bool,
    pub activation: ActivationKind,
    pub batchnorm: Option<BatchNormState>,
}

/// Everything a layer's backward pass needs from its forward pass.
#[derive(Clone, Debug)]
pub struct LayerTape {
    pub input: Matrix,
    /// Activation input: post-batchnorm values when batchnorm is present,
    /// otherwise the linear output.
    pub pre_activation: Matrix,
    pub post_activation: Matrix,
    pub batchnorm: Option<BatchNormCache>,
}

impl DenseLayer {
    pub fn fan_in(&self) -> usize {
        self.latent_weights.rows()
    }

    pub fn fan_out(&self) -> usize {
        self.latent_weights.cols()
    }

    /// Weights used by the forward pass.
    pub fn effective_weights(&self) -> Matrix {
        if self.binarize_weights {
            binarize_weights(&self.latent_weights)
        } else {
            self.latent_weights.clone()
        }
    }

    /// The linear map `input × W_eff`.
    pub fn dense_forward(&self, input: &Matrix) -> Result<Matrix> {
        self.dense_forward_with(input, &self.effective_weights())
    }

    fn dense_forward_with(&self, input: &Matrix, weights: &Matrix) -> Result<Matrix> {
        if input.cols() != self.fan_in() {
            return Err(Error::shape(
                "dense_forward",
                format!("input width {} but fan_in {}", input.cols(), self.fan_in()),
            ));
        }
        input.matmul(weights)
    }

    /// Gradients of the linear map: `(upstream × W_effᵀ, inputᵀ × upstream)`.
    ///
    /// The weight gradient is taken with respect to the effective weights and
    /// applied unchanged to the latent weights. The input gradient is skipped
    /// when `need_input_grad` is false.
    pub fn dense_backward(
        &self,
        input: &Matrix,
        upstream: &Matrix,
        need_input_grad: bool,
    ) -> Result<(Option<Matrix>, Matrix)> {
        if upstream.cols() != self.fan_out() || upstream.rows() != input.rows() {
            return Err(Error::shape(
                "dense_backward",
                format!(
                    "upstream {:?} for input {:?} and fan_out {}",
                    upstream.shape(),
                    input.shape(),
                    self.fan_out()
                ),
            ));
        }
        let weight_grad = input.t_matmul(upstream)?;
        let input_grad = if need_input_grad {
            Some(upstream.matmul_t(&self.effective_weights())?)
        } else {
            None
        };
        Ok((input_grad, weight_grad))
    }

    /// dense → batchnorm (if any) → activation, without mutating the layer.
    pub fn forward(&self, input: &Matrix, mode: Mode) -> Result<(LayerTape, Option<BatchStats>)> {
        let linear = self.dense_forward(input)?;
        let (pre_activation, batchnorm, stats) = match &self.batchnorm {
            Some(bn) => {
                let (y, cache, stats) = bn.normalize(&linear, mode)?;
                (y, Some(cache), stats)
            }
            None => (linear, None, None),
        };
        let act = self.activation;
        let post_activation = pre_activation.map(|v| act.forward(v));
        Ok((
            LayerTape {
                input: input.clone(),
                pre_activation,
                post_activation,
                batchnorm,
            },
            stats,
        ))
    }

    /// Output only, in eval mode; no tape is kept.
    pub fn infer(&self, input: &Matrix) -> Result<Matrix> {
        let mut out = self.dense_forward(input)?;
        if let Some(bn) = &self.batchnorm {
            out = bn.normalize(&out, Mode::Eval)?.0;
        }
        let act = self.activation;
        Ok(out.map(|v| act.forward(v)))
    }

    /// Backpropagates `upstream` (gradient w.r.t. this layer's output).
    pub fn backward(
        &self,
        tape: &LayerTape,
        upstream: &Matrix,
        need_input_grad: bool,
    ) -> Result<(Option<Matrix>, Matrix)> {
        let act = self.activation;
        let mut grad = upstream.zip_map(&tape.pre_activation, |g, x| g * act.backward(x))?;
        if let Some(cache) = &tape.batchnorm {
            grad = batchnorm_backward(cache, &tape.pre_activation, &grad)?;
        }
        self.dense_backward(&tape.input, &grad, need_input_grad)
    }
}
