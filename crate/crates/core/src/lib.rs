//! Binary and full-precision feed-forward networks trained with surrogate
//! gradients, instrumented with information-plane analytics.
//!
//! - [`numerics`]: dense matrices and seeded random streams
//! - [`nn`]: layers, activations, batchnorm, manual backpropagation
//! - [`optim`]: Adam over latent weights with clipping
//! - [`infoplane`]: binning estimates of I(T;X) and I(T;Y)
//! - [`datasets`]: synthetic, MNIST and Tic-Tac-Toe data
//! - [`experiment`]: configured, instrumented, multi-seed training runs
//! - [`report`]: deterministic SVG figures

pub mod datasets;
pub mod error;
pub mod experiment;
pub mod infoplane;
pub mod nn;
pub mod numerics;
pub mod optim;
pub mod report;

pub use datasets::Dataset;
pub use error::{Error, Result};
pub use experiment::{ExperimentConfig, GradientStats, RunLog};
pub use infoplane::{BinningSpec, MISnapshot, Split};
pub use nn::{ActivationKind, Architecture, Mode, Network, TapId, TapKind};
pub use numerics::{Matrix, RngStream};
