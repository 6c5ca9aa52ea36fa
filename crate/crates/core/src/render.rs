//! SVG documents and tabular sidecars.
//!
//! Output is a pure function of the inputs: coordinates are printed with a
//! fixed number of decimals and nothing depends on time or locale.

use std::fmt::Write as _;

use crate::cumulative::CumulativeSeries;
use crate::error::{Error, Result};
use crate::reliability::{Bin, ReliabilityDiagram};
use crate::summary::{SignificanceTriangle, SummaryStats};

pub const TITLE_UNIFORM: &str = "subpopulation deviation is the slope as a function of k/n";
pub const TITLE_WEIGHTED: &str = "subpopulation deviation is the slope as a function of A_k";

/// Number of labeled index positions on the upper and lower axes.
pub const AXIS_TICKS: usize = 6;

const FIRST_COLOR: &str = "black";
const SECOND_COLOR: &str = "gray";
const TRIANGLE_WIDTH: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    Cumulative,
    Reliability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub kind: PlotKind,
    pub title: String,
    pub width: u32,
    pub height: u32,
    pub show_triangle: bool,
    pub show_ground_truth: bool,
}

impl PlotSpec {
    /// Cumulative plot titled according to whether the abscissae are `k/n`.
    pub fn cumulative(series: &CumulativeSeries) -> Self {
        Self {
            kind: PlotKind::Cumulative,
            title: cumulative_title(series).to_string(),
            width: 640,
            height: 480,
            show_triangle: true,
            show_ground_truth: false,
        }
    }

    pub fn reliability(diagram: &ReliabilityDiagram) -> Self {
        Self {
            kind: PlotKind::Reliability,
            title: diagram.spec.strategy.title().to_string(),
            width: 640,
            height: 480,
            show_triangle: false,
            show_ground_truth: false,
        }
    }
}

pub fn cumulative_title(series: &CumulativeSeries) -> &'static str {
    if series.uniform {
        TITLE_UNIFORM
    } else {
        TITLE_WEIGHTED
    }
}

/// Formats to four significant figures, keeping trailing zeros, switching to
/// exponent notation outside `1e-4 ..= 9999.5`.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.3e}");
    let exp: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("exponent in {:e} output");
    if (-4..4).contains(&exp) {
        format!("{:.*}", (3 - exp) as usize, x)
    } else {
        sci
    }
}

fn px(v: f64) -> String {
    // `+ 0.0` folds negative zero
    format!("{:.3}", v + 0.0)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Frame {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
    x_range: (f64, f64),
    y_range: (f64, f64),
}

impl Frame {
    fn new(spec: &PlotSpec, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        let (left, right, top, bottom) = (80.0, 30.0, 80.0, 60.0);
        Self {
            left,
            top,
            width: (spec.width as f64 - left - right).max(1.0),
            height: (spec.height as f64 - top - bottom).max(1.0),
            x_range,
            y_range,
        }
    }

    fn x(&self, v: f64) -> f64 {
        let (lo, hi) = self.x_range;
        self.left + (v - lo) / (hi - lo) * self.width
    }

    fn y(&self, v: f64) -> f64 {
        let (lo, hi) = self.y_range;
        self.top + (hi - v) / (hi - lo) * self.height
    }

    fn bottom(&self) -> f64 {
        self.top + self.height
    }
}

fn open_document(out: &mut String, spec: &PlotSpec) {
    let (w, h) = (spec.width, spec.height);
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<text class="title" x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        px(w as f64 / 2.0),
        escape(&spec.title)
    )
    .unwrap();
}

fn draw_frame(out: &mut String, f: &Frame) {
    writeln!(
        out,
        r#"<rect class="frame" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        px(f.left),
        px(f.top),
        px(f.width),
        px(f.height)
    )
    .unwrap();
}

fn y_ticks(out: &mut String, f: &Frame, count: usize) {
    let (lo, hi) = f.y_range;
    for i in 0..count {
        let v = lo + (hi - lo) * i as f64 / (count - 1) as f64;
        let y = f.y(v);
        writeln!(
            out,
            r#"<line x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="black"/><text x="{}" y="{}" text-anchor="end">{}</text>"#,
            px(f.left - 5.0),
            px(f.left),
            px(f.left - 8.0),
            px(f.y(v) + 4.0),
            fmt_sig(v),
            y = px(y),
        )
        .unwrap();
    }
}

fn polyline(out: &mut String, class: &str, points: impl Iterator<Item = (f64, f64)>, style: &str) {
    let mut coords = String::new();
    for (i, (x, y)) in points.enumerate() {
        if i > 0 {
            coords.push(' ');
        }
        write!(coords, "{},{}", px(x), px(y)).unwrap();
    }
    writeln!(
        out,
        r#"<polyline class="{class}" points="{coords}" fill="none" {style}/>"#
    )
    .unwrap();
}

/// Indices `k` labeled on the axes: evenly spaced over `0..=n`.
pub fn tick_indices(n: usize) -> Vec<usize> {
    let mut ks: Vec<usize> = (0..AXIS_TICKS)
        .map(|i| ((i * n) as f64 / (AXIS_TICKS - 1) as f64).round() as usize)
        .collect();
    ks.dedup();
    ks
}

pub fn render_cumulative(
    series: &CumulativeSeries,
    tri: &SignificanceTriangle,
    spec: &PlotSpec,
) -> String {
    render_cumulative_with_truth(series, None, tri, spec)
}

/// Cumulative plot, optionally overlaying a noiseless expected series in
/// gray when `spec.show_ground_truth` is set.
pub fn render_cumulative_with_truth(
    series: &CumulativeSeries,
    truth: Option<&CumulativeSeries>,
    tri: &SignificanceTriangle,
    spec: &PlotSpec,
) -> String {
    let truth = truth.filter(|_| spec.show_ground_truth);
    let hh = tri.half_height;
    let (mut lo, mut hi) = series
        .c
        .iter()
        .chain(truth.iter().flat_map(|t| t.c.iter()))
        .fold((0.0f64, 0.0f64), |(lo, hi), &c| (lo.min(c), hi.max(c)));
    lo -= hh;
    hi += hh;
    if hi <= lo {
        hi = lo + 1.0;
    }
    let f = Frame::new(spec, (0.0, 1.0), (lo, hi));

    let mut out = String::new();
    open_document(&mut out, spec);
    draw_frame(&mut out, &f);
    writeln!(
        out,
        r##"<line class="zero" x1="{}" y1="{y}" x2="{}" y2="{y}" stroke="#bbbbbb" stroke-dasharray="4 3"/>"##,
        px(f.x(0.0)),
        px(f.x(1.0)),
        y = px(f.y(0.0)),
    )
    .unwrap();

    let n = series.n();
    for k in tick_indices(n) {
        let x = px(f.x(series.a[k]));
        let frac = k as f64 / n as f64;
        writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text class="upper-tick" x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            px(f.top - 5.0),
            px(f.top),
            px(f.top - 9.0),
            fmt_sig(frac),
        )
        .unwrap();
        if let Some(score) = series.score_at_k.get(k) {
            writeln!(
                out,
                r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text class="lower-tick" x="{x}" y="{}" text-anchor="middle">{}</text>"#,
                px(f.bottom()),
                px(f.bottom() + 5.0),
                px(f.bottom() + 18.0),
                fmt_sig(*score),
            )
            .unwrap();
        }
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">k/n</text>"#,
        px(f.left + f.width / 2.0),
        px(f.top - 26.0)
    )
    .unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">score</text>"#,
        px(f.left + f.width / 2.0),
        px(f.bottom() + 40.0)
    )
    .unwrap();
    y_ticks(&mut out, &f, 5);

    if spec.show_triangle {
        writeln!(
            out,
            r#"<polygon class="triangle" points="{},{} {},{} {},{}" fill="none" stroke="black"/>"#,
            px(f.x(0.0)),
            px(f.y(hh)),
            px(f.x(TRIANGLE_WIDTH)),
            px(f.y(0.0)),
            px(f.x(0.0)),
            px(f.y(-hh)),
        )
        .unwrap();
    }
    if let Some(t) = truth {
        polyline(
            &mut out,
            "expected",
            t.a.iter().zip(&t.c).map(|(&a, &c)| (f.x(a), f.y(c))),
            r#"stroke="gray" stroke-dasharray="6 3""#,
        );
    }
    polyline(
        &mut out,
        "series",
        series
            .a
            .iter()
            .zip(&series.c)
            .map(|(&a, &c)| (f.x(a), f.y(c))),
        r#"stroke="black""#,
    );
    out.push_str("</svg>\n");
    out
}

pub fn render_reliability(diagram: &ReliabilityDiagram, spec: &PlotSpec) -> String {
    let all = diagram.first.iter().chain(&diagram.second);
    let (mut xlo, mut xhi, mut ylo, mut yhi) = all.fold(
        (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        ),
        |(a, b, c, d), bin| {
            (
                a.min(bin.avg_score),
                b.max(bin.avg_score),
                c.min(bin.avg_response),
                d.max(bin.avg_response),
            )
        },
    );
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = if *hi > *lo { *hi - *lo } else { 1.0 };
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    };
    pad(&mut xlo, &mut xhi);
    pad(&mut ylo, &mut yhi);
    let f = Frame::new(spec, (xlo, xhi), (ylo, yhi));

    let mut out = String::new();
    open_document(&mut out, spec);
    writeln!(
        out,
        r#"<text class="subtitle" x="{}" y="42" text-anchor="middle">{} bins per subpopulation</text>"#,
        px(spec.width as f64 / 2.0),
        diagram.spec.bin_count
    )
    .unwrap();
    draw_frame(&mut out, &f);
    for i in 0..5 {
        let v = xlo + (xhi - xlo) * i as f64 / 4.0;
        let x = px(f.x(v));
        writeln!(
            out,
            r#"<line x1="{x}" y1="{}" x2="{x}" y2="{}" stroke="black"/><text x="{x}" y="{}" text-anchor="middle">{}</text>"#,
            px(f.bottom()),
            px(f.bottom() + 5.0),
            px(f.bottom() + 18.0),
            fmt_sig(v)
        )
        .unwrap();
    }
    y_ticks(&mut out, &f, 5);
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">score</text>"#,
        px(f.left + f.width / 2.0),
        px(f.bottom() + 40.0)
    )
    .unwrap();

    let mut draw = |bins: &[Bin], class: &str, color: &str| {
        polyline(
            &mut out,
            class,
            bins.iter().map(|b| (f.x(b.avg_score), f.y(b.avg_response))),
            &format!(r#"stroke="{color}""#),
        );
        for b in bins {
            writeln!(
                out,
                r#"<circle class="{class}" cx="{}" cy="{}" r="3" fill="{color}"/>"#,
                px(f.x(b.avg_score)),
                px(f.y(b.avg_response))
            )
            .unwrap();
        }
    };
    draw(&diagram.first, "first", FIRST_COLOR);
    draw(&diagram.second, "second", SECOND_COLOR);
    out.push_str("</svg>\n");
    out
}

/// `k,A_k,C_k,score_at_k` rows preceded by `#` comment lines carrying the
/// summary statistics at four significant figures.
pub fn emit_series(series: &CumulativeSeries, stats: &SummaryStats) -> String {
    let mut out = String::new();
    writeln!(out, "# n = {}", stats.n).unwrap();
    writeln!(out, "# G = {}", fmt_sig(stats.g)).unwrap();
    writeln!(out, "# H = {}", fmt_sig(stats.h)).unwrap();
    writeln!(out, "# sigma = {}", fmt_sig(stats.sigma)).unwrap();
    writeln!(out, "# G/sigma = {}", fmt_sig(stats.g_over_sigma)).unwrap();
    writeln!(out, "# H/sigma = {}", fmt_sig(stats.h_over_sigma)).unwrap();
    writeln!(out, "# bernoulli_valid = {}", stats.bernoulli_valid).unwrap();
    out.push_str("k,A_k,C_k,score_at_k\n");
    for k in 0..=series.n() {
        let score = series
            .score_at_k
            .get(k)
            .map(|s| s.to_string())
            .unwrap_or_default();
        writeln!(
            out,
            "{k},{},{},{score}",
            series.a[k] + 0.0,
            series.c[k] + 0.0
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesTable {
    pub header: Vec<(String, String)>,
    pub a: Vec<f64>,
    pub c: Vec<f64>,
    pub score_at_k: Vec<f64>,
}

/// Reads back the output of [`emit_series`].
pub fn parse_series(text: &str) -> Result<SeriesTable> {
    let mut table = SeriesTable {
        header: Vec::new(),
        a: Vec::new(),
        c: Vec::new(),
        score_at_k: Vec::new(),
    };
    let bad = |msg: String| Error::MalformedSeries(msg);
    let mut saw_columns = false;
    for (lineno, line) in text.lines().enumerate() {
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                table
                    .header
                    .push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !saw_columns {
            if line != "k,A_k,C_k,score_at_k" {
                return Err(bad(format!("unexpected column header {line:?}")));
            }
            saw_columns = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(bad(format!("line {}: expected 4 fields", lineno + 1)));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| bad(format!("line {}: {e}", lineno + 1)))
        };
        if fields[0].parse::<usize>().ok() != Some(table.a.len()) {
            return Err(bad(format!("line {}: index out of sequence", lineno + 1)));
        }
        table.a.push(num(fields[1])?);
        table.c.push(num(fields[2])?);
        if !fields[3].is_empty() {
            table.score_at_k.push(num(fields[3])?);
        }
    }
    if !saw_columns {
        return Err(bad("missing column header".into()));
    }
    Ok(table)
}

/// One row per bin: `bin,group,avg_score,avg_response,total_weight,member_count`.
pub fn emit_diagram(
    diagram: &ReliabilityDiagram,
    first_label: &str,
    second_label: &str,
) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record([
        "bin",
        "group",
        "avg_score",
        "avg_response",
        "total_weight",
        "member_count",
    ])?;
    for (label, bins) in [
        (first_label, &diagram.first),
        (second_label, &diagram.second),
    ] {
        for (i, b) in bins.iter().enumerate() {
            writer.write_record([
                i.to_string(),
                label.to_string(),
                b.avg_score.to_string(),
                b.avg_response.to_string(),
                b.total_weight.to_string(),
                b.member_count.to_string(),
            ])?;
        }
    }
    let bytes = writer.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reliability::{BinStrategy, BinningSpec};
    use crate::summary::triangle;

    fn flat(n: usize) -> CumulativeSeries {
        CumulativeSeries {
            c: vec![0.0; n + 1],
            a: (0..=n).map(|j| j as f64 / n as f64).collect(),
            sign_flipped: false,
            score_at_k: (0..=n).map(|j| j as f64 * 0.1).collect(),
            uniform: true,
        }
    }

    fn stats_for(series: &CumulativeSeries) -> SummaryStats {
        SummaryStats::new(series, &vec![4.0; series.n()], true)
    }

    #[test]
    fn sig_fig_formatting() {
        assert_eq!(fmt_sig(0.0974), "0.09740");
        assert_eq!(fmt_sig(7.823), "7.823");
        assert_eq!(fmt_sig(11.3249), "11.32");
        assert_eq!(fmt_sig(0.099996), "0.1000");
        assert_eq!(fmt_sig(-0.5), "-0.5000");
        assert_eq!(fmt_sig(1234.56), "1235");
        assert_eq!(fmt_sig(12345.6), "1.235e4");
        assert_eq!(fmt_sig(0.00001234), "1.234e-5");
        assert_eq!(fmt_sig(0.0), "0");
    }

    #[test]
    fn flat_series_renders_horizontal_line() {
        let s = flat(10);
        let tri = triangle(0.1);
        let svg = render_cumulative(&s, &tri, &PlotSpec::cumulative(&s));
        assert!(svg.contains(TITLE_UNIFORM));
        assert!(svg.contains(r#"class="triangle""#));
        let line = svg
            .lines()
            .find(|l| l.contains(r#"class="series""#))
            .unwrap();
        let pts = line
            .split("points=\"")
            .nth(1)
            .unwrap()
            .split('"')
            .next()
            .unwrap();
        let ys: Vec<&str> = pts
            .split(' ')
            .map(|p| p.split(',').nth(1).unwrap())
            .collect();
        assert_eq!(ys.len(), 11);
        assert!(ys.iter().all(|y| *y == ys[0]));
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut s = flat(7);
        s.c = vec![0.0, 0.1, -0.05, 0.2, 0.15, 0.3, 0.25, 0.4];
        s.uniform = false;
        let tri = triangle(0.05);
        let spec = PlotSpec::cumulative(&s);
        assert!(spec.title.ends_with("A_k"));
        assert_eq!(
            render_cumulative(&s, &tri, &spec),
            render_cumulative(&s, &tri, &spec)
        );
    }

    #[test]
    fn series_round_trip() {
        let mut s = flat(2);
        s.c = vec![0.0, 1.0 / 3.0, -2.0 / 7.0];
        s.a = vec![0.0, 0.123456789012345, 1.0];
        let stats = stats_for(&s);
        let text = emit_series(&s, &stats);
        let table = parse_series(&text).unwrap();
        assert_eq!(table.a.len(), 3);
        for k in 0..3 {
            assert!((table.a[k] - s.a[k]).abs() <= 1e-12);
            assert!((table.c[k] - s.c[k]).abs() <= 1e-12);
        }
        let g_over = table.header.iter().find(|(k, _)| k == "G/sigma").unwrap();
        assert_eq!(g_over.1, fmt_sig(stats.g_over_sigma));
    }

    #[test]
    fn reliability_markers_by_color() {
        let bin = |s: f64| Bin {
            avg_score: s,
            avg_response: s,
            total_weight: 1.0,
            member_count: 1,
        };
        let d = ReliabilityDiagram {
            spec: BinningSpec::new(BinStrategy::Count, 3),
            first: vec![bin(0.1), bin(0.5), bin(0.9)],
            second: vec![bin(0.1), bin(0.5), bin(0.9)],
        };
        let svg = render_reliability(&d, &PlotSpec::reliability(&d));
        assert!(svg.contains(BinStrategy::Count.title()));
        assert_eq!(svg.matches(r#"fill="black""#).count(), 3);
        assert_eq!(svg.matches(r#"fill="gray""#).count(), 3);
        let csv = emit_diagram(&d, "a", "b").unwrap();
        assert_eq!(csv.lines().count(), 7);
    }

    #[test]
    fn title_is_escaped() {
        assert_eq!(escape("a<b & c"), "a&lt;b &amp; c");
    }
}
