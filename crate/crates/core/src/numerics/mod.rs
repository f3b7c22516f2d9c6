//! Dense matrices and seeded random streams shared by every other module.

mod gemm;
mod matrix;
mod rng;

pub use matrix::{matmul, Matrix};
pub use rng::{glorot_init, streams, RngStream};
