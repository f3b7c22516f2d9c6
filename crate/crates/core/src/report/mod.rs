//! Deterministic SVG figures: information planes, loss, accuracy and
//! gradient-evolution curves.

pub mod plots;
pub mod svg;

pub use plots::{
    plot_information_plane, plot_layerwise_panels, plot_scalar_series, render, PlotKind,
    PlotRequest, TapSelector,
};
