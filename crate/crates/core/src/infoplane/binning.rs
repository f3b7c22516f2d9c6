use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{sign_swish_extrema, ActivationKind, Network, TapId, TapKind};
use crate::numerics::Matrix;

pub const DEFAULT_BINS: usize = 30;

/// Closed value range mapped onto the bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinRange {
    pub lo: f64,
    pub hi: f64,
}

impl BinRange {
    pub const UNIT_SYMMETRIC: BinRange = BinRange { lo: -1.0, hi: 1.0 };
    pub const PROBABILITY: BinRange = BinRange { lo: 0.0, hi: 1.0 };

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidArgument(format!(
                "bin range [{}, {}] is empty or not finite",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

fn default_post_bn_range() -> BinRange {
    BinRange { lo: -4.0, hi: 4.0 }
}

/// Equal-width binning with a fixed range per tap.
///
/// Post-activation taps use the activation's codomain, softmax taps use
/// [0, 1], and post-batchnorm taps (unbounded) use `post_bn_range`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinningSpec {
    pub bins: usize,
    #[serde(default = "default_post_bn_range")]
    pub post_bn_range: BinRange,
}

impl Default for BinningSpec {
    fn default() -> Self {
        Self {
            bins: DEFAULT_BINS,
            post_bn_range: default_post_bn_range(),
        }
    }
}

impl BinningSpec {
    pub fn with_bins(bins: usize) -> Self {
        Self {
            bins,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 2 || self.bins > u16::MAX as usize + 1 {
            return Err(Error::InvalidArgument(format!(
                "bins must be in [2, 65536], got {}",
                self.bins
            )));
        }
        self.post_bn_range.validate()
    }

    /// Codomain of a post-activation tap.
    pub fn activation_range(activation: ActivationKind) -> BinRange {
        match activation {
            ActivationKind::SignSwish { beta } => {
                let (lo, hi) = sign_swish_extrema(beta);
                BinRange { lo, hi }
            }
            _ => BinRange::UNIT_SYMMETRIC,
        }
    }

    pub fn range_for(&self, kind: TapKind, activation: ActivationKind) -> BinRange {
        match kind {
            TapKind::PostBn => self.post_bn_range,
            TapKind::PostAct => Self::activation_range(activation),
            TapKind::Softmax => BinRange::PROBABILITY,
        }
    }

    /// The range of every tap of `net`, in tap order.
    pub fn ranges(&self, net: &Network) -> Vec<(TapId, BinRange)> {
        let act_range = Self::activation_range(net.architecture.activation);
        net.taps()
            .into_iter()
            .map(|id| {
                let r = match id.kind {
                    TapKind::PostAct => act_range,
                    kind => self.range_for(kind, net.architecture.activation),
                };
                (id, r)
            })
            .collect()
    }
}

#[inline]
pub fn bin_index(v: f64, range: BinRange, bins: usize) -> usize {
    let v = v.clamp(range.lo, range.hi);
    let idx = ((v - range.lo) / (range.hi - range.lo) * bins as f64).floor() as usize;
    idx.min(bins - 1)
}

/// Maps each row to a discrete symbol: rows with equal bin-index tuples get
/// equal ids. Ids are assigned in order of first appearance.
pub fn discretize(values: &Matrix, range: BinRange, bins: usize) -> Result<Vec<usize>> {
    range.validate()?;
    if bins < 2 || bins > u16::MAX as usize + 1 {
        return Err(Error::InvalidArgument(format!("bad bin count {bins}")));
    }
    let mut ids: HashMap<Vec<u16>, usize> = HashMap::new();
    let mut out = Vec::with_capacity(values.rows());
    let mut key = Vec::with_capacity(values.cols());
    for row in values.iter_rows() {
        key.clear();
        key.extend(row.iter().map(|&v| bin_index(v, range, bins) as u16));
        let next = ids.len();
        let id = *ids.entry(key.clone()).or_insert(next);
        out.push(id);
    }
    Ok(out)
}
