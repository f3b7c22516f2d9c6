//! Binning estimates of I(T;X) and I(T;Y) at every network tap.

mod binning;
mod entropy;
mod snapshot;

pub use binning::{bin_index, discretize, BinRange, BinningSpec, DEFAULT_BINS};
pub use entropy::{entropy_bits, mi_with_input, mi_with_labels};
pub use snapshot::{layer_mi_snapshot, snapshots_from_tape, MISnapshot, Split, SplitView};
