//! Feed-forward networks with manual backpropagation.

pub mod activation;
pub mod batchnorm;
pub mod dense;
pub mod network;

pub use activation::{
    approx_sign_backward, hard_tanh_backward, hard_tanh_forward, sign_forward, sign_swish_extrema,
    sign_swish_forward, ste_backward, swish_sign_backward, tanh_backward, tanh_forward,
    ActivationKind, DEFAULT_BETA,
};
pub use batchnorm::{batchnorm_backward, BatchNormState, Mode};
pub use dense::{binarize_weights, DenseLayer, LayerTape};
pub use network::{loss_and_accuracy, softmax, Architecture, Network, TapId, TapKind, Tape};
