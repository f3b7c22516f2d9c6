use std::fmt;

use serde::{Deserialize, Serialize};

use super::binning::{discretize, BinningSpec};
use super::entropy::{mi_with_input, mi_with_labels};
use crate::error::{Error, Result};
use crate::nn::{Network, TapId, Tape};
use crate::numerics::Matrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Test => "test",
        })
    }
}

/// Materialized rows of one dataset split.
#[derive(Clone, Debug)]
pub struct SplitView {
    pub split: Split,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub sample_ids: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MISnapshot {
    pub epoch: usize,
    pub tap: TapId,
    pub split: Split,
    pub i_tx_bits: f64,
    pub i_ty_bits: f64,
}

/// MI at every tap of an eval-mode tape over `view`.
pub fn snapshots_from_tape(
    net: &Network,
    tape: &Tape,
    view: &SplitView,
    spec: &BinningSpec,
    epoch: usize,
) -> Result<Vec<MISnapshot>> {
    spec.validate()?;
    if view.labels.len() != tape.probs.rows() || view.sample_ids.len() != tape.probs.rows() {
        return Err(Error::shape(
            "layer_mi_snapshot",
            format!(
                "tape has {} rows, split has {} labels and {} ids",
                tape.probs.rows(),
                view.labels.len(),
                view.sample_ids.len()
            ),
        ));
    }
    spec.ranges(net)
        .into_iter()
        .map(|(tap, range)| {
            let values = tape
                .tap(tap)
                .ok_or_else(|| Error::State(format!("tape has no values for tap {tap}")))?;
            let symbols = discretize(values, range, spec.bins)?;
            Ok(MISnapshot {
                epoch,
                tap,
                split: view.split,
                i_tx_bits: mi_with_input(&symbols, &view.sample_ids)?,
                i_ty_bits: mi_with_labels(&symbols, &view.labels)?,
            })
        })
        .collect()
}

/// One eval-mode pass over `view`, then MI at every tap.
pub fn layer_mi_snapshot(
    net: &Network,
    view: &SplitView,
    spec: &BinningSpec,
    epoch: usize,
) -> Result<Vec<MISnapshot>> {
    if view.labels.is_empty() {
        return Err(Error::InvalidArgument(
            "MI snapshot of an empty split".into(),
        ));
    }
    let tape = net.infer(&view.features)?;
    snapshots_from_tape(net, &tape, view, spec, epoch)
}
