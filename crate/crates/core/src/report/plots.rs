//! Information-plane, scalar-series and layerwise figures from averaged runs.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::svg::{viridis, Anchor, Axis, Frame, Svg, PALETTE};
use crate::error::{Error, Result};
use crate::experiment::{AveragedLog, AveragedSnapshot, Stat};
use crate::infoplane::Split;
use crate::nn::{TapId, TapKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    InfoPlane,
    Loss,
    Accuracy,
    GradEvolution,
    LayerwisePanels,
}

impl PlotKind {
    pub const ALL: [PlotKind; 5] = [
        PlotKind::InfoPlane,
        PlotKind::Loss,
        PlotKind::Accuracy,
        PlotKind::GradEvolution,
        PlotKind::LayerwisePanels,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::InfoPlane => "info_plane",
            PlotKind::Loss => "loss",
            PlotKind::Accuracy => "accuracy",
            PlotKind::GradEvolution => "grad_evolution",
            PlotKind::LayerwisePanels => "layerwise_panels",
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown plot kind {s:?}")))
    }
}

/// Which taps to draw in information-plane figures.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum TapSelector {
    /// Post-activation taps and the softmax output.
    #[default]
    Activations,
    All,
    Only(Vec<TapId>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlotRequest {
    pub kind: PlotKind,
    pub split: Split,
    pub taps: TapSelector,
}

impl PlotRequest {
    pub fn new(kind: PlotKind) -> Self {
        Self {
            kind,
            split: Split::Train,
            taps: TapSelector::default(),
        }
    }
}

pub fn render(avg: &AveragedLog, req: &PlotRequest) -> Result<String> {
    match req.kind {
        PlotKind::InfoPlane => plot_information_plane(avg, req.split, &req.taps),
        PlotKind::LayerwisePanels => plot_layerwise_panels(avg, req.split, &req.taps),
        kind => plot_scalar_series(avg, kind),
    }
}

/// Selected taps ordered output layer first.
fn select_taps(avg: &AveragedLog, sel: &TapSelector) -> Result<Vec<TapId>> {
    let available = &avg.meta.taps;
    let mut taps: Vec<TapId> = match sel {
        TapSelector::Activations => available
            .iter()
            .copied()
            .filter(|t| t.kind != TapKind::PostBn)
            .collect(),
        TapSelector::All => available.clone(),
        TapSelector::Only(list) => {
            let mut out = Vec::new();
            for t in list {
                let resolved = if t.kind == TapKind::Softmax {
                    available
                        .iter()
                        .copied()
                        .find(|a| a.kind == TapKind::Softmax)
                } else {
                    available.iter().copied().find(|a| a == t)
                };
                out.push(
                    resolved
                        .ok_or_else(|| Error::InvalidArgument(format!("run has no tap {t}")))?,
                );
            }
            out
        }
    };
    taps.sort_by(|a, b| b.layer.cmp(&a.layer).then(b.kind.cmp(&a.kind)));
    taps.dedup();
    if taps.is_empty() {
        return Err(Error::InvalidArgument("no taps selected".into()));
    }
    Ok(taps)
}

/// Snapshot trajectories per tap, checked against the schedule.
fn trajectories<'a>(
    avg: &'a AveragedLog,
    split: Split,
    taps: &[TapId],
) -> Result<Vec<(TapId, Vec<&'a AveragedSnapshot>)>> {
    if avg.seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds in averaged log".into()));
    }
    let mut by_tap: BTreeMap<TapId, Vec<&AveragedSnapshot>> = BTreeMap::new();
    for s in avg.snapshots.iter().filter(|s| s.split == split) {
        by_tap.entry(s.tap).or_default().push(s);
    }
    let mut missing = Vec::new();
    let mut out = Vec::new();
    for &tap in taps {
        let mut series = by_tap.remove(&tap).unwrap_or_default();
        series.sort_by_key(|s| s.epoch);
        let have: BTreeSet<usize> = series.iter().map(|s| s.epoch).collect();
        let absent: Vec<usize> = avg
            .meta
            .schedule
            .iter()
            .copied()
            .filter(|e| !have.contains(e))
            .collect();
        if !absent.is_empty() {
            missing.push(format!("{tap}: {absent:?}"));
        }
        out.push((tap, series));
    }
    if !missing.is_empty() {
        return Err(Error::Missing(format!(
            "{split} snapshots absent at epochs {}",
            missing.join("; ")
        )));
    }
    Ok(out)
}

fn last_epoch(avg: &AveragedLog) -> usize {
    avg.epochs.last().map_or(0, |e| e.epoch)
}

fn epoch_color(epoch: usize, last: usize) -> String {
    viridis((epoch as f64).ln_1p() / (last.max(1) as f64).ln_1p())
}

fn title(avg: &AveragedLog, what: &str) -> String {
    format!(
        "{} · {what} · {} seed{}",
        avg.config.name,
        avg.seeds.len(),
        if avg.seeds.len() == 1 { "" } else { "s" }
    )
}

fn draw_colorbar(svg: &mut Svg, x: f64, y: f64, h: f64, last: usize) {
    let steps = 64;
    let axis = Axis::log1p(0.0, last.max(1) as f64, "epoch");
    for i in 0..steps {
        let t0 = i as f64 / steps as f64;
        svg.rect(
            x,
            y + h - (t0 + 1.0 / steps as f64) * h,
            12.0,
            h / steps as f64 + 0.5,
            &viridis(t0 + 0.5 / steps as f64),
            None,
        );
    }
    svg.rect(x, y, 12.0, h, "none", Some("#333333"));
    for t in axis.ticks() {
        let ty = y + h - axis.fraction(t) * h;
        svg.line((x + 12.0, ty), (x + 16.0, ty), "#333333", 1.0);
        svg.text(
            (x + 18.0, ty + 4.0),
            10.0,
            Anchor::Start,
            &super::svg::tick_label(t),
        );
    }
    svg.text((x + 6.0, y - 8.0), 11.0, Anchor::Middle, "epoch");
}

fn draw_trajectory(svg: &mut Svg, frame: &Frame, series: &[&AveragedSnapshot], last: usize) {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .map(|s| frame.point(s.i_tx_bits.mean, s.i_ty_bits.mean))
        .collect();
    svg.polyline(&pts, "#bbbbbb", 0.6, false);
    for (s, &p) in series.iter().zip(&pts) {
        svg.circle(p, 2.5, &epoch_color(s.epoch, last));
    }
}

/// Scatter of (I(T;X), I(T;Y)) per tap, colored by log-scaled epoch.
pub fn plot_information_plane(
    avg: &AveragedLog,
    split: Split,
    sel: &TapSelector,
) -> Result<String> {
    let taps = select_taps(avg, sel)?;
    let traces = trajectories(avg, split, &taps)?;
    let last = last_epoch(avg);
    let (w, h) = (720.0, 520.0);
    let mut svg = Svg::new(w, h);
    let frame = Frame {
        x: 70.0,
        y: 40.0,
        w: 520.0,
        h: 410.0,
        xaxis: Axis::linear(0.0, avg.meta.mi_ceiling_x_bits, "I(T;X) [bits]"),
        yaxis: Axis::linear(0.0, avg.meta.mi_ceiling_y_bits, "I(T;Y) [bits]"),
    };
    svg.text(
        (w / 2.0, 22.0),
        14.0,
        Anchor::Middle,
        &title(avg, &format!("information plane ({split})")),
    );
    frame.draw(&mut svg, 11.0);
    for (_, series) in &traces {
        draw_trajectory(&mut svg, &frame, series, last);
    }
    // Trace labels at the final snapshot, in output-first order.
    for (tap, series) in &traces {
        if let Some(s) = series.last() {
            let (x, y) = frame.point(s.i_tx_bits.mean, s.i_ty_bits.mean);
            svg.text((x + 5.0, y - 5.0), 9.0, Anchor::Start, &tap.to_string());
        }
    }
    draw_colorbar(&mut svg, 630.0, 60.0, 370.0, last);
    Ok(svg.finish())
}

/// One small information plane per tap, hidden layers first.
pub fn plot_layerwise_panels(avg: &AveragedLog, split: Split, sel: &TapSelector) -> Result<String> {
    let mut taps = select_taps(avg, sel)?;
    taps.reverse();
    let traces = trajectories(avg, split, &taps)?;
    let last = last_epoch(avg);
    let cols = traces.len().min(3);
    let rows = traces.len().div_ceil(cols);
    let (pw, ph) = (260.0, 220.0);
    let w = cols as f64 * pw + 90.0;
    let h = rows as f64 * ph + 50.0;
    let mut svg = Svg::new(w, h);
    svg.text(
        (w / 2.0, 22.0),
        14.0,
        Anchor::Middle,
        &title(avg, &format!("layerwise ({split})")),
    );
    for (i, (tap, series)) in traces.iter().enumerate() {
        let (cx, cy) = ((i % cols) as f64 * pw, (i / cols) as f64 * ph + 40.0);
        let frame = Frame {
            x: cx + 55.0,
            y: cy + 20.0,
            w: pw - 75.0,
            h: ph - 75.0,
            xaxis: Axis::linear(0.0, avg.meta.mi_ceiling_x_bits, "I(T;X)"),
            yaxis: Axis::linear(0.0, avg.meta.mi_ceiling_y_bits, "I(T;Y)"),
        };
        svg.text(
            (frame.x + frame.w / 2.0, cy + 14.0),
            11.0,
            Anchor::Middle,
            &tap.to_string(),
        );
        frame.draw(&mut svg, 9.0);
        draw_trajectory(&mut svg, &frame, series, last);
    }
    draw_colorbar(&mut svg, w - 70.0, 60.0, h - 110.0, last);
    Ok(svg.finish())
}

struct Series {
    label: &'static str,
    points: Vec<(usize, Stat)>,
}

/// Mean as a solid line and across-seed variance as a dashed line, per series.
pub fn plot_scalar_series(avg: &AveragedLog, kind: PlotKind) -> Result<String> {
    if avg.seeds.is_empty() {
        return Err(Error::InvalidArgument("no seeds in averaged log".into()));
    }
    if avg.epochs.is_empty() {
        return Err(Error::Missing("averaged log has no epoch records".into()));
    }
    let pick = |label, f: &dyn Fn(&crate::experiment::AveragedEpoch) -> Option<Stat>| Series {
        label,
        points: avg
            .epochs
            .iter()
            .filter_map(|e| f(e).map(|s| (e.epoch, s)))
            .collect(),
    };
    let (series, ylabel, log_x) = match kind {
        PlotKind::Loss => (
            vec![
                pick("train", &|e| Some(e.train_loss)),
                pick("validation", &|e| Some(e.validation_loss)),
            ],
            "cross-entropy [nats]",
            false,
        ),
        PlotKind::Accuracy => (
            vec![
                pick("train", &|e| Some(e.train_accuracy)),
                pick("validation", &|e| Some(e.validation_accuracy)),
            ],
            "accuracy",
            false,
        ),
        PlotKind::GradEvolution => (
            vec![
                pick("mean norm", &|e| e.grad_mean_norm),
                pick("std norm", &|e| e.grad_std_norm),
            ],
            "gradient norm",
            true,
        ),
        other => {
            return Err(Error::InvalidArgument(format!(
                "{other} is not a scalar series"
            )))
        }
    };
    if series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::Missing(format!("no {kind} values recorded")));
    }
    let values = series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|(_, st)| [st.mean, st.variance]));
    let (lo, hi) = values.fold((0.0f64, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let hi = if kind == PlotKind::Accuracy {
        hi.max(1.0)
    } else {
        hi * 1.05
    };
    let first = series
        .iter()
        .flat_map(|s| s.points.first())
        .map(|p| p.0)
        .min()
        .unwrap_or(0);
    let last = last_epoch(avg);
    let xaxis = if log_x {
        Axis::log1p(first as f64, last as f64, "epoch")
    } else {
        Axis::linear(first as f64, last as f64, "epoch")
    };
    let (w, h) = (760.0, 440.0);
    let mut svg = Svg::new(w, h);
    let frame = Frame {
        x: 80.0,
        y: 40.0,
        w: 480.0,
        h: 330.0,
        xaxis,
        yaxis: Axis::linear(lo, hi, ylabel),
    };
    svg.text(
        (w / 2.0, 22.0),
        14.0,
        Anchor::Middle,
        &title(avg, kind.name()),
    );
    frame.draw(&mut svg, 11.0);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mean: Vec<_> = s
            .points
            .iter()
            .map(|(e, st)| frame.point(*e as f64, st.mean))
            .collect();
        let var: Vec<_> = s
            .points
            .iter()
            .map(|(e, st)| frame.point(*e as f64, st.variance))
            .collect();
        svg.polyline(&mean, color, 1.5, false);
        svg.polyline(&var, color, 1.0, true);
        let ly = 60.0 + i as f64 * 36.0;
        svg.line((580.0, ly), (605.0, ly), color, 1.5);
        svg.text(
            (610.0, ly + 4.0),
            11.0,
            Anchor::Start,
            &format!("{} mean", s.label),
        );
        svg.polyline(&[(580.0, ly + 16.0), (605.0, ly + 16.0)], color, 1.0, true);
        svg.text(
            (610.0, ly + 20.0),
            11.0,
            Anchor::Start,
            &format!("{} variance", s.label),
        );
    }
    Ok(svg.finish())
}
