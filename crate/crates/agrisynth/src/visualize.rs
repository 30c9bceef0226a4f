//! Standalone SVG 1.1 charts: histograms, real-vs-synthetic comparison,
//! time series and grid heatmaps. Output is byte-stable for equal inputs.

use std::fmt::Write;

use agrisynth_core::validate::histogram;
use agrisynth_core::{Column, Table, TableError};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VizError {
    #[error("sample is empty")]
    EmptySample,
    #[error("x column `{0}` is not sorted ascending")]
    UnsortedX(String),
    #[error("duplicate cell at ({0}, {1})")]
    DuplicateCell(f64, f64),
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("invalid chart spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Table(#[from] TableError),
}

pub const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];
const PAD: f64 = 0.05;
const MARGIN_LEFT: f64 = 64.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChartSpec {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub width: u32,
    pub height: u32,
    pub bins: usize,
    /// Low and high colour of the heatmap ramp, `#rrggbb`.
    pub ramp: (String, String),
}

impl Default for ChartSpec {
    fn default() -> Self {
        ChartSpec {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            width: 640,
            height: 400,
            bins: 20,
            ramp: ("#f7fbff".into(), "#08306b".into()),
        }
    }
}

impl ChartSpec {
    pub fn titled(title: &str) -> Self {
        ChartSpec { title: title.into(), ..ChartSpec::default() }
    }

    fn validate(&self) -> Result<(), VizError> {
        let min_w = (MARGIN_LEFT + MARGIN_RIGHT) as u32 + 10;
        let min_h = (MARGIN_TOP + MARGIN_BOTTOM) as u32 + 10;
        if self.width < min_w || self.height < min_h {
            return Err(VizError::InvalidSpec(format!("chart must be at least {min_w}x{min_h} px")));
        }
        if self.bins == 0 {
            return Err(VizError::InvalidSpec("bins must be >= 1".into()));
        }
        parse_hex(&self.ramp.0)?;
        parse_hex(&self.ramp.1)?;
        Ok(())
    }
}

fn parse_hex(c: &str) -> Result<[u8; 3], VizError> {
    let bad = || VizError::InvalidSpec(format!("colour {c:?} is not #rrggbb"));
    let hex = c.strip_prefix('#').filter(|h| h.len() == 6).ok_or_else(bad)?;
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).map_err(|_| bad());
    Ok([byte(0)?, byte(2)?, byte(4)?])
}

/// Linear blend of the two ramp stops at `t` in [0, 1].
pub fn ramp_color(lo: &str, hi: &str, t: f64) -> Result<String, VizError> {
    let (a, b) = (parse_hex(lo)?, parse_hex(hi)?);
    let t = t.clamp(0.0, 1.0);
    let mix = |i: usize| (a[i] as f64 + (b[i] as f64 - a[i] as f64) * t).round() as u8;
    Ok(format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2)))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn num(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    // Avoid "-0".
    format!("{}", if r == 0.0 { 0.0 } else { r })
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a >= 1000.0 {
        format!("{v:.0}")
    } else if a >= 10.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.2}")
    }
}

/// Data range widened by 5% on each side; a zero-width range is centred.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span > 0.0 {
        (lo - PAD * span, hi + PAD * span)
    } else {
        let half = if lo == 0.0 { 1.0 } else { lo.abs() * PAD * 2.0 };
        (lo - half, hi + half)
    }
}

struct Canvas {
    svg: String,
    width: f64,
    height: f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Canvas {
    fn new(spec: &ChartSpec) -> Self {
        let (w, h) = (spec.width as f64, spec.height as f64);
        let mut svg = String::new();
        svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\">",
            spec.width, spec.height
        );
        let _ = writeln!(svg, "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>", spec.width, spec.height);
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>",
            num(w / 2.0),
            escape(&spec.title)
        );
        Canvas { svg, width: w, height: h, x0: MARGIN_LEFT, x1: w - MARGIN_RIGHT, y0: MARGIN_TOP, y1: h - MARGIN_BOTTOM }
    }

    fn sx(&self, v: f64, (lo, hi): (f64, f64)) -> f64 {
        (self.x0 + (v - lo) / (hi - lo) * (self.x1 - self.x0)).clamp(0.0, self.width)
    }

    fn sy(&self, v: f64, (lo, hi): (f64, f64)) -> f64 {
        (self.y1 - (v - lo) / (hi - lo) * (self.y1 - self.y0)).clamp(0.0, self.height)
    }

    fn axes(&mut self, spec: &ChartSpec, xr: (f64, f64), yr: (f64, f64), x_fmt: &dyn Fn(f64) -> String) {
        let (x0, x1, y0, y1) = (self.x0, self.x1, self.y0, self.y1);
        let _ = writeln!(
            self.svg,
            "<g stroke=\"#333333\" stroke-width=\"1\"><line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\"/><line x1=\"{0}\" y1=\"{3}\" x2=\"{0}\" y2=\"{2}\"/></g>",
            num(x0), num(x1), num(y1), num(y0)
        );
        let mut ticks = String::new();
        for i in 0..=4 {
            let f = i as f64 / 4.0;
            let xv = xr.0 + f * (xr.1 - xr.0);
            let yv = yr.0 + f * (yr.1 - yr.0);
            let (px, py) = (self.sx(xv, xr), self.sy(yv, yr));
            let _ = write!(
                ticks,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>",
                num(px), num(y1 + 14.0), escape(&x_fmt(xv)), num(x0 - 4.0), num(py + 4.0), escape(&tick_label(yv))
            );
        }
        let _ = writeln!(self.svg, "<g font-size=\"10\" fill=\"#333333\">{ticks}</g>");
        let _ = writeln!(
            self.svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{}</text>",
            num((x0 + x1) / 2.0),
            num(self.height - 10.0),
            escape(&spec.x_label)
        );
        let ly = (y0 + y1) / 2.0;
        let _ = writeln!(
            self.svg,
            "<text x=\"14\" y=\"{0}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 {0})\">{1}</text>",
            num(ly),
            escape(&spec.y_label)
        );
    }

    fn legend(&mut self, entries: &[(&str, &str)]) {
        let x = (self.x1 - 120.0).max(self.x0);
        for (i, (label, color)) in entries.iter().enumerate() {
            let y = self.y0 + 6.0 + 16.0 * i as f64;
            let _ = writeln!(
                self.svg,
                "<g class=\"legend\"><rect x=\"{}\" y=\"{}\" width=\"10\" height=\"10\" fill=\"{color}\"/><text x=\"{}\" y=\"{}\" font-size=\"11\">{}</text></g>",
                num(x), num(y), num(x + 14.0), num(y + 9.0), escape(label)
            );
        }
    }

    fn finish(mut self) -> String {
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn finite(name: &str, xs: &[f64]) -> Result<(), VizError> {
    if xs.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(VizError::NonFinite(name.into()))
    }
}

fn extent(xs: impl Iterator<Item = f64>) -> (f64, f64) {
    xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn bars(spec: &ChartSpec, samples: &[(&str, &[f64])]) -> Result<String, VizError> {
    spec.validate()?;
    for (name, s) in samples {
        if s.is_empty() {
            return Err(VizError::EmptySample);
        }
        finite(name, s)?;
    }
    let (mut lo, mut hi) = extent(samples.iter().flat_map(|(_, s)| s.iter().copied()));
    if lo == hi {
        lo -= 0.5;
        hi += 0.5;
    }
    let hists: Vec<Vec<f64>> = samples.iter().map(|(_, s)| histogram(s, lo, hi, spec.bins)).collect();
    let top = hists.iter().flatten().copied().fold(0.0, f64::max);
    let xr = padded(lo, hi);
    let yr = (0.0, top);
    let mut c = Canvas::new(spec);
    c.axes(spec, xr, yr, &tick_label);
    let width = (hi - lo) / spec.bins as f64;
    let opacity = if samples.len() > 1 { "0.5" } else { "0.85" };
    for (k, h) in hists.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(c.svg, "<g class=\"bars\" data-series=\"{}\" fill=\"{color}\" fill-opacity=\"{opacity}\">", escape(samples[k].0));
        for (i, v) in h.iter().enumerate() {
            let xa = c.sx(lo + width * i as f64, xr);
            let xb = c.sx(lo + width * (i + 1) as f64, xr);
            let y = c.sy(*v, yr);
            let _ = writeln!(
                c.svg,
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/>",
                num(xa), num(y), num(xb - xa), num(c.y1 - y)
            );
        }
        c.svg.push_str("</g>\n");
    }
    if samples.len() > 1 {
        let entries: Vec<(&str, &str)> = samples.iter().enumerate().map(|(k, (n, _))| (*n, PALETTE[k % PALETTE.len()])).collect();
        c.legend(&entries);
    }
    Ok(c.finish())
}

/// Histogram of one sample, bar heights relative to the tallest bin.
pub fn render_histogram(sample: &[f64], spec: &ChartSpec) -> Result<String, VizError> {
    bars(spec, &[("sample", sample)])
}

/// Overlaid semi-transparent histograms of `real` and `synth` on shared bins.
pub fn render_compare(real: &[f64], synth: &[f64], spec: &ChartSpec) -> Result<String, VizError> {
    bars(spec, &[("real", real), ("synthetic", synth)])
}

/// One polyline per `y_cols` entry against a date or numeric `x_col`.
pub fn render_timeseries(table: &Table, x_col: &str, y_cols: &[&str], spec: &ChartSpec) -> Result<String, VizError> {
    spec.validate()?;
    let (xs, is_date): (Vec<f64>, bool) = match table.column(x_col)? {
        Column::Date(d) => (d.iter().map(|d| d.days() as f64).collect(), true),
        _ => (table.numeric(x_col)?, false),
    };
    if xs.is_empty() {
        return Err(VizError::EmptySample);
    }
    finite(x_col, &xs)?;
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(VizError::UnsortedX(x_col.into()));
    }
    let ys: Vec<Vec<f64>> = y_cols.iter().map(|c| table.numeric(c)).collect::<Result<_, _>>()?;
    for (c, y) in y_cols.iter().zip(&ys) {
        finite(c, y)?;
    }
    let xe = extent(xs.iter().copied());
    let ye = extent(ys.iter().flatten().copied());
    let (xr, yr) = (padded(xe.0, xe.1), if ys.is_empty() { (0.0, 1.0) } else { padded(ye.0, ye.1) });
    let mut c = Canvas::new(spec);
    let x_fmt = |v: f64| {
        if is_date {
            agrisynth_core::Date::from_days(v.round() as i32).to_string()
        } else {
            tick_label(v)
        }
    };
    c.axes(spec, xr, yr, &x_fmt);
    for (k, y) in ys.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if y.len() == 1 {
            let _ = writeln!(
                c.svg,
                "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"{color}\"/>",
                num(c.sx(xs[0], xr)),
                num(c.sy(y[0], yr))
            );
            continue;
        }
        let pts: Vec<String> = xs
            .iter()
            .zip(y)
            .map(|(xv, yv)| format!("{},{}", num(c.sx(*xv, xr)), num(c.sy(*yv, yr))))
            .collect();
        let _ = writeln!(
            c.svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" data-series=\"{}\" points=\"{}\"/>",
            escape(y_cols[k]),
            pts.join(" ")
        );
    }
    let entries: Vec<(&str, &str)> = y_cols.iter().enumerate().map(|(k, n)| (*n, PALETTE[k % PALETTE.len()])).collect();
    c.legend(&entries);
    Ok(c.finish())
}

/// One rect per (x, y) cell, coloured on the linear ramp over [min, max].
pub fn render_heatmap(table: &Table, x_col: &str, y_col: &str, value_col: &str, spec: &ChartSpec) -> Result<String, VizError> {
    spec.validate()?;
    let xs = table.numeric(x_col)?;
    let ys = table.numeric(y_col)?;
    let vs = table.numeric(value_col)?;
    if vs.is_empty() {
        return Err(VizError::EmptySample);
    }
    for (n, v) in [(x_col, &xs), (y_col, &ys), (value_col, &vs)] {
        finite(n, v)?;
    }
    let distinct = |v: &[f64]| {
        let mut d = v.to_vec();
        d.sort_by(f64::total_cmp);
        d.dedup();
        d
    };
    let (ux, uy) = (distinct(&xs), distinct(&ys));
    let mut seen = std::collections::HashSet::new();
    for (x, y) in xs.iter().zip(&ys) {
        if !seen.insert((x.to_bits(), y.to_bits())) {
            return Err(VizError::DuplicateCell(*x, *y));
        }
    }
    let (lo, hi) = extent(vs.iter().copied());
    let mut c = Canvas::new(spec);
    let cw = (c.x1 - c.x0) / ux.len() as f64;
    let ch = (c.y1 - c.y0) / uy.len() as f64;
    let xr = (ux[0] - 0.5, ux[ux.len() - 1] + 0.5);
    let yr = (uy[0] - 0.5, uy[uy.len() - 1] + 0.5);
    c.axes(spec, xr, yr, &tick_label);
    c.svg.push_str("<g class=\"cells\">\n");
    for i in 0..vs.len() {
        let xi = ux.binary_search_by(|v| v.total_cmp(&xs[i])).expect("present");
        let yi = uy.binary_search_by(|v| v.total_cmp(&ys[i])).expect("present");
        let t = if hi > lo { (vs[i] - lo) / (hi - lo) } else { 0.0 };
        let fill = ramp_color(&spec.ramp.0, &spec.ramp.1, t)?;
        let _ = writeln!(
            c.svg,
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"/>",
            num(c.x0 + cw * xi as f64),
            num(c.y1 - ch * (yi + 1) as f64),
            num(cw),
            num(ch)
        );
    }
    c.svg.push_str("</g>\n");
    Ok(c.finish())
}
