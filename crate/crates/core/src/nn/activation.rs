//! Scalar activations and their (surrogate) derivatives.
//!
//! The binary kinds all share the `sign` forward pass and differ only in the
//! gradient used during backpropagation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BETA: f64 = 5.0;

fn default_beta() -> f64 {
    DEFAULT_BETA
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ActivationKind {
    SteSign,
    ApproxSign,
    SwishSign {
        #[serde(default = "default_beta")]
        beta: f64,
    },
    Tanh,
    HardTanh,
    SignSwish {
        #[serde(default = "default_beta")]
        beta: f64,
    },
    Identity,
}

impl ActivationKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ActivationKind::SwishSign { beta } | ActivationKind::SignSwish { beta }
                if !(beta.is_finite() && beta > 0.0) =>
            {
                Err(Error::InvalidArgument(format!(
                    "{self}: beta must be positive and finite, got {beta}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Whether the forward pass emits values in {−1, +1} only.
    pub fn is_binary(&self) -> bool {
        matches!(
            self,
            ActivationKind::SteSign | ActivationKind::ApproxSign | ActivationKind::SwishSign { .. }
        )
    }

    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::SteSign
            | ActivationKind::ApproxSign
            | ActivationKind::SwishSign { .. } => sign_forward(x),
            ActivationKind::Tanh => tanh_forward(x),
            ActivationKind::HardTanh => hard_tanh_forward(x),
            ActivationKind::SignSwish { beta } => sign_swish_forward(x, beta),
            ActivationKind::Identity => x,
        }
    }

    /// Derivative used by backpropagation, evaluated at the activation input.
    pub fn backward(&self, x: f64) -> f64 {
        match *self {
            ActivationKind::SteSign => ste_backward(x),
            ActivationKind::ApproxSign => approx_sign_backward(x),
            ActivationKind::SwishSign { beta } | ActivationKind::SignSwish { beta } => {
                swish_sign_backward(x, beta)
            }
            ActivationKind::Tanh => tanh_backward(x),
            ActivationKind::HardTanh => hard_tanh_backward(x),
            ActivationKind::Identity => 1.0,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ActivationKind::SteSign => "ste_sign",
            ActivationKind::ApproxSign => "approx_sign",
            ActivationKind::SwishSign { .. } => "swish_sign",
            ActivationKind::Tanh => "tanh",
            ActivationKind::HardTanh => "hard_tanh",
            ActivationKind::SignSwish { .. } => "sign_swish",
            ActivationKind::Identity => "identity",
        }
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActivationKind::SwishSign { beta } | ActivationKind::SignSwish { beta } => {
                write!(f, "{}(beta={beta})", self.name())
            }
            _ => f.write_str(self.name()),
        }
    }
}

/// −1 for `x ≤ 0`, +1 otherwise.
#[inline]
pub fn sign_forward(x: f64) -> f64 {
    if x <= 0.0 {
        -1.0
    } else {
        1.0
    }
}

#[inline]
pub fn ste_backward(x: f64) -> f64 {
    if (-1.0..=1.0).contains(&x) {
        1.0
    } else {
        0.0
    }
}

#[inline]
pub fn approx_sign_backward(x: f64) -> f64 {
    if (-1.0..=1.0).contains(&x) {
        2.0 - 2.0 * x.abs()
    } else {
        0.0
    }
}

/// Derivative of [`sign_swish_forward`]; goes negative past the overshoot.
#[inline]
pub fn swish_sign_backward(x: f64, beta: f64) -> f64 {
    let bx = beta * x;
    let denom = 1.0 + bx.cosh();
    if !denom.is_finite() {
        return 0.0;
    }
    beta * (2.0 - bx * (bx / 2.0).tanh()) / denom
}

#[inline]
pub fn tanh_forward(x: f64) -> f64 {
    x.tanh()
}

/// sech²(x)
#[inline]
pub fn tanh_backward(x: f64) -> f64 {
    let c = x.cosh();
    if !c.is_finite() {
        return 0.0;
    }
    1.0 / (c * c)
}

#[inline]
pub fn hard_tanh_forward(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

#[inline]
pub fn hard_tanh_backward(x: f64) -> f64 {
    if x > -1.0 && x < 1.0 {
        1.0
    } else {
        0.0
    }
}

#[inline]
fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn sign_swish_forward(x: f64, beta: f64) -> f64 {
    let bx = beta * x;
    let s = logistic(bx);
    let one_minus_s = logistic(-bx);
    2.0 * s * (1.0 + bx * one_minus_s) - 1.0
}

/// Codomain extrema of [`sign_swish_forward`], located by a dense grid search.
pub fn sign_swish_extrema(beta: f64) -> (f64, f64) {
    // The extrema sit at |x| ≈ 2.4/β; scanning ±10/β at 1e-5/β resolution is plenty.
    let steps = 2_000_000;
    let span = 10.0 / beta;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..=steps {
        let x = span * i as f64 / steps as f64;
        hi = hi.max(sign_swish_forward(x, beta));
    }
    // The forward map is odd.
    (-hi, hi)
}
