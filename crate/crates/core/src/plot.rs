//! Static rank-frequency plots from [`AnalysisReport`]s: SVG 1.1, or a
//! self-contained gnuplot script with inline data blocks.
//!
//! Each distribution with a series becomes a scatter of `(rank, frequency)`;
//! fits become dashed overlay lines over their window; divergence ranks
//! become vertical rules. Output depends only on the report and options.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::report::AnalysisReport;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotOptions {
    /// Linear axes instead of log10 axes.
    pub linear: bool,
    pub width: u32,
    pub height: u32,
    pub title: Option<String>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions { linear: false, width: 720, height: 540, title: None }
    }
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
struct Curve {
    label: String,
    color: usize,
    points: Vec<(f64, f64)>,
}

/// What gets drawn, in data coordinates.
#[derive(Debug, Clone, PartialEq)]
struct Scene {
    series: Vec<Curve>,
    overlays: Vec<Curve>,
    rules: Vec<(usize, String)>,
}

fn overlay_ranks(r_min: usize, r_max: usize, linear: bool) -> Vec<f64> {
    if !linear {
        return vec![r_min as f64, r_max as f64];
    }
    let (a, b) = ((r_min as f64).ln(), (r_max as f64).ln());
    (0..=64).map(|i| (a + (b - a) * i as f64 / 64.0).exp()).collect()
}

fn scene(report: &AnalysisReport, linear: bool) -> Result<Scene> {
    if report.distributions.is_empty() {
        return Err(Error::Domain("nothing to plot: no distributions in input".into()));
    }
    let mut s = Scene { series: Vec::new(), overlays: Vec::new(), rules: Vec::new() };
    for (i, d) in report.distributions.iter().enumerate() {
        let color = i % PALETTE.len();
        if let Some(pts) = &d.series {
            let points = pts
                .iter()
                .filter(|(r, f)| *r > 0 && f.is_finite() && *f > 0.0)
                .map(|&(r, f)| (r as f64, f))
                .collect();
            s.series.push(Curve { label: d.label.clone(), color, points });
        }
        let line = |label: String, r_min: usize, r_max: usize, intercept: f64, alpha: f64| Curve {
            label,
            color,
            points: overlay_ranks(r_min, r_max, linear)
                .into_iter()
                .map(|r| (r, 10f64.powf(intercept - alpha * r.log10())))
                .collect(),
        };
        if let Some(f) = &d.fit {
            let hi = f.window.r_max.min(d.vocabulary.max(f.window.r_min + 1));
            s.overlays.push(line(format!("{} α={:.3}", d.label, f.alpha), f.window.r_min, hi, f.intercept, f.alpha));
        }
        if let Some(p) = &d.piecewise {
            let hi = p.window.r_max.min(d.vocabulary.max(p.breakpoint_rank + 1));
            s.overlays.push(line(
                format!("{} α₁={:.3}", d.label, p.alpha_low),
                p.window.r_min,
                p.breakpoint_rank,
                p.intercept_low,
                p.alpha_low,
            ));
            s.overlays.push(line(
                format!("{} α₂={:.3}", d.label, p.alpha_high),
                p.breakpoint_rank,
                hi,
                p.intercept_high,
                p.alpha_high,
            ));
        }
    }
    for dv in &report.divergences {
        if let Some(r) = dv.divergence_rank {
            s.rules.push((r, format!("{} vs {}: r={r}", dv.label_a, dv.label_b)));
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool) -> Axis {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            let v = if log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if log {
            lo = lo.floor();
            hi = hi.ceil();
        } else {
            lo = lo.min(0.0);
        }
        if hi - lo < 1e-12 {
            hi = lo + 1.0;
        }
        Axis { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    /// Tick positions in data units.
    fn ticks(&self) -> Vec<f64> {
        if self.log {
            let n = (self.hi - self.lo).round() as i64;
            let step = (n / 8 + 1).max(1);
            (0..=n).step_by(step as usize).map(|k| 10f64.powi((self.lo as i64 + k) as i32)).collect()
        } else {
            let raw = (self.hi - self.lo) / 5.0;
            let mag = 10f64.powf(raw.log10().floor());
            let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
            let first = (self.lo / step).ceil() as i64;
            let last = (self.hi / step).floor() as i64;
            (first..=last).map(|k| k as f64 * step).collect()
        }
    }
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        let e = v.log10().round() as i64;
        format!("10<tspan dy=\"-6\" font-size=\"9\">{e}</tspan>")
    } else if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
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

const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;

/// Renders the report as an SVG 1.1 document.
pub fn render_svg(report: &AnalysisReport, opts: &PlotOptions) -> Result<String> {
    let sc = scene(report, opts.linear)?;
    let log = !opts.linear;
    let all = || sc.series.iter().chain(&sc.overlays).flat_map(|c| c.points.iter().copied());
    let xa = Axis::fit(all().map(|p| p.0).chain(sc.rules.iter().map(|r| r.0 as f64)), log);
    let ya = Axis::fit(all().map(|p| p.1), log);
    let (w, h) = (opts.width as f64, opts.height as f64);
    let (pw, ph) = (w - MARGIN_L - MARGIN_R, h - MARGIN_T - MARGIN_B);
    let px = |x: f64| MARGIN_L + xa.unit(x) * pw;
    let py = |y: f64| MARGIN_T + (1.0 - ya.unit(y)) * ph;

    let mut o = String::new();
    let _ = writeln!(o, r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#);
    let _ = writeln!(
        o,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{}" height="{}" viewBox="0 0 {} {}" font-family="sans-serif" font-size="12">"#,
        opts.width, opts.height, opts.width, opts.height
    );
    let _ = writeln!(o, r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#);
    if let Some(t) = &opts.title {
        let _ = writeln!(o, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="14">{}</text>"#, w / 2.0, xml_escape(t));
    }

    let _ = writeln!(o, r##"<g class="axes" stroke="#000" fill="none">"##);
    let _ = writeln!(o, r#"<rect x="{MARGIN_L:.2}" y="{MARGIN_T:.2}" width="{pw:.2}" height="{ph:.2}"/>"#);
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(o, r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}"/>"#, MARGIN_T + ph, MARGIN_T + ph + 5.0);
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(o, r#"<line x1="{:.2}" y1="{y:.2}" x2="{MARGIN_L:.2}" y2="{y:.2}"/>"#, MARGIN_L - 5.0);
    }
    let _ = writeln!(o, "</g>");
    let _ = writeln!(o, r##"<g class="tick-labels" fill="#000">"##);
    for t in xa.ticks() {
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            px(t),
            MARGIN_T + ph + 20.0,
            tick_label(t, log)
        );
    }
    for t in ya.ticks() {
        let _ = writeln!(
            o,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            MARGIN_L - 8.0,
            py(t) + 4.0,
            tick_label(t, log)
        );
    }
    let _ = writeln!(o, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">rank</text>"#, MARGIN_L + pw / 2.0, h - 10.0);
    let _ = writeln!(
        o,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">frequency</text>"#,
        MARGIN_T + ph / 2.0,
        MARGIN_T + ph / 2.0
    );
    let _ = writeln!(o, "</g>");

    for c in &sc.series {
        let _ = writeln!(
            o,
            r#"<g class="series" fill="{}" fill-opacity="0.6" stroke="none"><title>{}</title>"#,
            PALETTE[c.color],
            xml_escape(&c.label)
        );
        let mut seen = HashSet::new();
        for &(x, y) in &c.points {
            let (sx, sy) = ((px(x) * 2.0).round(), (py(y) * 2.0).round());
            if seen.insert((sx as i64, sy as i64)) {
                let _ = writeln!(o, r#"<circle cx="{:.1}" cy="{:.1}" r="2"/>"#, sx / 2.0, sy / 2.0);
            }
        }
        let _ = writeln!(o, "</g>");
    }
    for c in &sc.overlays {
        let pts: Vec<String> = c.points.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
        let _ = writeln!(
            o,
            r#"<polyline class="overlay" points="{}" fill="none" stroke="{}" stroke-width="1.5" stroke-dasharray="6,4"><title>{}</title></polyline>"#,
            pts.join(" "),
            PALETTE[c.color],
            xml_escape(&c.label)
        );
    }
    for (r, label) in &sc.rules {
        let x = px(*r as f64);
        let _ = writeln!(
            o,
            r##"<line class="divergence" x1="{x:.2}" y1="{MARGIN_T:.2}" x2="{x:.2}" y2="{:.2}" stroke="#555" stroke-dasharray="2,3"><title>{}</title></line>"##,
            MARGIN_T + ph,
            xml_escape(label)
        );
    }

    let _ = writeln!(o, r#"<g class="legend">"#);
    let mut y = MARGIN_T + 16.0;
    let x = MARGIN_L + pw - 10.0;
    for c in sc.series.iter().chain(&sc.overlays) {
        let _ = writeln!(
            o,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="end" fill="{}">{}</text>"#,
            PALETTE[c.color],
            xml_escape(&c.label)
        );
        y += 15.0;
    }
    let _ = writeln!(o, "</g>");
    let _ = writeln!(o, "</svg>");
    Ok(o)
}

fn gnuplot_quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' | '\\' => {
                out.push('\\');
                out.push(c);
            }
            '\n' | '\r' | '\t' => out.push(' '),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Renders a gnuplot script with the data inline. The script writes SVG to
/// `output` when given and otherwise to gnuplot's standard output.
pub fn render_gnuplot(report: &AnalysisReport, opts: &PlotOptions, output: Option<&str>) -> Result<String> {
    let sc = scene(report, opts.linear)?;
    let mut o = String::new();
    let _ = writeln!(o, "set terminal svg size {},{} dynamic", opts.width, opts.height);
    if let Some(path) = output {
        let _ = writeln!(o, "set output {}", gnuplot_quote(path));
    }
    let _ = writeln!(o, "set encoding utf8");
    if !opts.linear {
        let _ = writeln!(o, "set logscale xy");
        let _ = writeln!(o, "set format x \"10^{{%L}}\"");
        let _ = writeln!(o, "set format y \"10^{{%L}}\"");
    }
    let _ = writeln!(o, "set xlabel \"rank\"");
    let _ = writeln!(o, "set ylabel \"frequency\"");
    if let Some(t) = &opts.title {
        let _ = writeln!(o, "set title {}", gnuplot_quote(t));
    }
    let _ = writeln!(o, "set key top right noenhanced");
    for (i, (r, _)) in sc.rules.iter().enumerate() {
        let _ = writeln!(o, "set arrow {} from {r},graph 0 to {r},graph 1 nohead dashtype 3 lc rgb \"#555555\"", i + 1);
    }

    let mut blocks = Vec::new();
    for (kind, curves) in [("series", &sc.series), ("overlay", &sc.overlays)] {
        for (i, c) in curves.iter().enumerate() {
            let name = format!("${kind}{i}");
            let _ = writeln!(o, "{name} << EOD");
            for (x, y) in &c.points {
                let _ = writeln!(o, "{x:e} {y:e}");
            }
            let _ = writeln!(o, "EOD");
            blocks.push((name, kind, c));
        }
    }
    let items: Vec<String> = blocks
        .iter()
        .map(|(name, kind, c)| {
            let style = if *kind == "series" {
                "with points pt 7 ps 0.4".to_owned()
            } else {
                "with lines dashtype 2 lw 1.5".to_owned()
            };
            format!("{name} using 1:2 {style} lc rgb \"{}\" title {}", PALETTE[c.color], gnuplot_quote(&c.label))
        })
        .collect();
    let _ = writeln!(o, "plot {}", items.join(", \\\n     "));
    Ok(o)
}
