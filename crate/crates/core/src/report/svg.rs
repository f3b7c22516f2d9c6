//! Minimal SVG 1.1 writer with deterministic number formatting.

use std::fmt::Write;

pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Two decimals, and never "-0.00".
pub fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Anchor {
    Start,
    Middle,
    End,
}

impl Anchor {
    fn as_str(self) -> &'static str {
        match self {
            Anchor::Start => "start",
            Anchor::Middle => "middle",
            Anchor::End => "end",
        }
    }
}

pub struct Svg {
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(width: f64, height: f64) -> Self {
        Self {
            width,
            height,
            body: String::new(),
        }
    }

    pub fn line(&mut self, from: (f64, f64), to: (f64, f64), stroke: &str, width: f64) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{stroke}" stroke-width="{}"/>"#,
            num(from.0),
            num(from.1),
            num(to.0),
            num(to.1),
            num(width)
        );
    }

    pub fn polyline(&mut self, points: &[(f64, f64)], stroke: &str, width: f64, dashed: bool) {
        if points.is_empty() {
            return;
        }
        let pts: Vec<String> = points
            .iter()
            .map(|&(x, y)| format!("{},{}", num(x), num(y)))
            .collect();
        let dash = if dashed {
            r#" stroke-dasharray="5,3" stroke-opacity="0.6""#
        } else {
            ""
        };
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"{dash}/>"#,
            pts.join(" "),
            num(width)
        );
    }

    pub fn circle(&mut self, center: (f64, f64), r: f64, fill: &str) {
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            num(center.0),
            num(center.1),
            num(r)
        );
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str, stroke: Option<&str>) {
        let stroke = stroke
            .map(|s| format!(r#" stroke="{s}" stroke-width="1""#))
            .unwrap_or_default();
        let _ = writeln!(
            self.body,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="{fill}"{stroke}/>"#,
            num(x),
            num(y),
            num(w),
            num(h)
        );
    }

    pub fn text(&mut self, at: (f64, f64), size: f64, anchor: Anchor, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-size="{}" text-anchor="{}">{}</text>"#,
            num(at.0),
            num(at.1),
            num(size),
            anchor.as_str(),
            escape(content)
        );
    }

    /// Text rotated a quarter turn counter-clockwise about its anchor.
    pub fn vertical_text(&mut self, at: (f64, f64), size: f64, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x}" y="{y}" font-size="{}" text-anchor="middle" transform="rotate(-90 {x} {y})">{}</text>"#,
            num(size),
            escape(content),
            x = num(at.0),
            y = num(at.1),
        );
    }

    pub fn finish(self) -> String {
        format!(
            concat!(
                "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n",
                "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" ",
                "width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n",
                "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"white\"/>\n",
                "{body}</svg>\n"
            ),
            w = num(self.width),
            h = num(self.height),
            body = self.body
        )
    }
}

/// Viridis sampled at five stops, interpolated linearly; `t` in [0, 1].
pub fn viridis(t: f64) -> String {
    const STOPS: [(f64, f64, f64); 5] = [
        (68.0, 1.0, 84.0),
        (59.0, 82.0, 139.0),
        (33.0, 145.0, 140.0),
        (94.0, 201.0, 98.0),
        (253.0, 231.0, 37.0),
    ];
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let pos = t * (STOPS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(STOPS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (STOPS[i], STOPS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisScale {
    Linear,
    /// Position by log₁₀(1 + v), so zero stays on the axis.
    Log1p,
}

#[derive(Clone, Debug)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub scale: AxisScale,
    pub label: String,
}

impl Axis {
    pub fn linear(lo: f64, hi: f64, label: &str) -> Self {
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Self {
            lo,
            hi,
            scale: AxisScale::Linear,
            label: label.to_string(),
        }
    }

    pub fn log1p(lo: f64, hi: f64, label: &str) -> Self {
        Self {
            scale: AxisScale::Log1p,
            ..Self::linear(lo.max(0.0), hi, label)
        }
    }

    fn transform(&self, v: f64) -> f64 {
        match self.scale {
            AxisScale::Linear => v,
            AxisScale::Log1p => v.max(0.0).ln_1p(),
        }
    }

    /// Position of `v` as a fraction of the axis length.
    pub fn fraction(&self, v: f64) -> f64 {
        let (lo, hi) = (self.transform(self.lo), self.transform(self.hi));
        (self.transform(v) - lo) / (hi - lo)
    }

    pub fn ticks(&self) -> Vec<f64> {
        match self.scale {
            AxisScale::Linear => {
                let span = self.hi - self.lo;
                let raw = span / 5.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .into_iter()
                    .map(|m| m * mag)
                    .find(|s| span / s <= 6.0)
                    .unwrap_or(10.0 * mag);
                let first = (self.lo / step).ceil() as i64;
                let last = (self.hi / step + 1e-9).floor() as i64;
                (first..=last).map(|i| i as f64 * step).collect()
            }
            AxisScale::Log1p => {
                let mut ticks = vec![self.lo];
                let mut p = 1.0;
                while p <= self.hi {
                    if p > self.lo {
                        ticks.push(p);
                    }
                    p *= 10.0;
                }
                ticks
            }
        }
    }
}

pub fn tick_label(v: f64) -> String {
    if v == v.round() && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// A plotting rectangle with an x and y axis.
pub struct Frame {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub xaxis: Axis,
    pub yaxis: Axis,
}

impl Frame {
    pub fn px(&self, v: f64) -> f64 {
        self.x + self.xaxis.fraction(v) * self.w
    }

    pub fn py(&self, v: f64) -> f64 {
        self.y + self.h - self.yaxis.fraction(v) * self.h
    }

    pub fn point(&self, x: f64, y: f64) -> (f64, f64) {
        (self.px(x), self.py(y))
    }

    pub fn draw(&self, svg: &mut Svg, font: f64) {
        svg.rect(self.x, self.y, self.w, self.h, "none", Some("#333333"));
        for t in self.xaxis.ticks() {
            let x = self.px(t);
            svg.line(
                (x, self.y + self.h),
                (x, self.y + self.h + 4.0),
                "#333333",
                1.0,
            );
            svg.line((x, self.y), (x, self.y + self.h), "#e5e5e5", 0.5);
            svg.text(
                (x, self.y + self.h + 4.0 + font),
                font,
                Anchor::Middle,
                &tick_label(t),
            );
        }
        for t in self.yaxis.ticks() {
            let y = self.py(t);
            svg.line((self.x - 4.0, y), (self.x, y), "#333333", 1.0);
            svg.line((self.x, y), (self.x + self.w, y), "#e5e5e5", 0.5);
            svg.text(
                (self.x - 6.0, y + font * 0.35),
                font,
                Anchor::End,
                &tick_label(t),
            );
        }
        svg.text(
            (self.x + self.w / 2.0, self.y + self.h + 2.6 * font + 4.0),
            font,
            Anchor::Middle,
            &self.xaxis.label,
        );
        svg.vertical_text(
            (self.x - 3.4 * font, self.y + self.h / 2.0),
            font,
            &self.yaxis.label,
        );
    }
}
