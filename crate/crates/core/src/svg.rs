//! Deterministic SVG figures: co-occurrence heatmaps and segment strips.
//!
//! Output depends only on the inputs. Coordinates use four fixed decimals and
//! colors come from the explicit stop lists below.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use thiserror::Error;

use crate::annotation::AnnotationMatrix;
use crate::format::fixed4;
use crate::metrics::{CooccurrenceKind, CooccurrenceMatrix};

/// Diverging scale for values in [-1, 1].
pub const DIVERGING_STOPS: [(f64, &str); 5] = [
    (-1.0, "#2166ac"),
    (-0.5, "#92c5de"),
    (0.0, "#f7f7f7"),
    (0.5, "#f4a582"),
    (1.0, "#b2182b"),
];

/// Sequential scale for values in [0, 1].
pub const SEQUENTIAL_STOPS: [(f64, &str); 3] = [(0.0, "#f7fbff"), (0.5, "#6baed6"), (1.0, "#08306b")];

pub const STRIP_FILLED: &str = "#3b6ea8";
pub const STRIP_EMPTY: &str = "#ececec";

const CELL: f64 = 34.0;
const LABEL_MARGIN: f64 = 150.0;
const TOP_MARGIN: f64 = 160.0;
const STRIP_WIDTH: f64 = 600.0;
const STRIP_HEIGHT: f64 = 14.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SvgError {
    #[error("unknown code {0:?}")]
    UnknownCode(String),
    #[error("segment strips need one or two matrices, got {0}")]
    MatrixCount(usize),
    #[error("paired matrices differ in shape")]
    ShapeMismatch,
    #[error("labels do not match the matrix size")]
    LabelCount,
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
            _ => out.push(c),
        }
    }
    out
}

fn parse_hex(hex: &str) -> [u8; 3] {
    let v = u32::from_str_radix(&hex[1..], 16).unwrap_or(0);
    [(v >> 16) as u8, (v >> 8) as u8, v as u8]
}

/// Linear RGB interpolation between the two stops that bracket `value`.
pub fn scale_color(stops: &[(f64, &str)], value: f64) -> String {
    let (lo_v, _) = stops[0];
    let (hi_v, _) = stops[stops.len() - 1];
    let v = value.clamp(lo_v, hi_v);
    let seg = stops.windows(2).find(|w| v <= w[1].0).unwrap_or(&stops[stops.len() - 2..]);
    let (a_v, a_hex) = seg[0];
    let (b_v, b_hex) = seg[1];
    let t = if b_v > a_v { (v - a_v) / (b_v - a_v) } else { 0.0 };
    let (a, b) = (parse_hex(a_hex), parse_hex(b_hex));
    let mix = |i: usize| libm::round(a[i] as f64 + (b[i] as f64 - a[i] as f64) * t) as u8;
    format!("#{:02x}{:02x}{:02x}", mix(0), mix(1), mix(2))
}

pub fn stops_for(kind: CooccurrenceKind) -> &'static [(f64, &'static str)] {
    match kind {
        CooccurrenceKind::Pearson => &DIVERGING_STOPS,
        CooccurrenceKind::Jaccard => &SEQUENTIAL_STOPS,
    }
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">",
        w = fixed4(width),
        h = fixed4(height)
    );
}

/// Heatmap of a square co-occurrence matrix. Pearson uses the diverging
/// scale, Jaccard the sequential one; undefined cells are hatched.
/// `labels` defaults to the code ids.
pub fn render_heatmap_svg(m: &CooccurrenceMatrix, title: &str, labels: Option<&[String]>) -> Result<String, SvgError> {
    let k = m.size();
    let labels: Vec<String> = match labels {
        Some(l) if l.len() == k => l.to_vec(),
        Some(_) => return Err(SvgError::LabelCount),
        None => m.codes.clone(),
    };
    let stops = stops_for(m.kind);
    let grid = CELL * k as f64;
    let legend_x = LABEL_MARGIN + grid + 30.0;
    let width = legend_x + 80.0;
    let height = TOP_MARGIN + grid + 30.0;

    let mut out = String::new();
    header(&mut out, width, height);
    out.push_str("<defs>\n");
    out.push_str(
        "<pattern id=\"hatch\" patternUnits=\"userSpaceOnUse\" width=\"6\" height=\"6\" patternTransform=\"rotate(45)\">\
<rect width=\"6\" height=\"6\" fill=\"#ffffff\"/><line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"6\" stroke=\"#999999\" stroke-width=\"2\"/></pattern>\n",
    );
    out.push_str("<linearGradient id=\"legend\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">\n");
    let (lo, hi) = (stops[0].0, stops[stops.len() - 1].0);
    for (v, hex) in stops {
        let _ = writeln!(out, "<stop offset=\"{}\" stop-color=\"{hex}\"/>", fixed4((v - lo) / (hi - lo)));
    }
    out.push_str("</linearGradient>\n</defs>\n");
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        fixed4(width / 2.0),
        escape(title)
    );

    for (i, label) in labels.iter().enumerate() {
        let y = TOP_MARGIN + CELL * i as f64 + CELL / 2.0 + 4.0;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            fixed4(LABEL_MARGIN - 6.0),
            fixed4(y),
            escape(label)
        );
        let x = LABEL_MARGIN + CELL * i as f64 + CELL / 2.0 + 4.0;
        let ly = TOP_MARGIN - 6.0;
        let _ = writeln!(
            out,
            "<text x=\"{x}\" y=\"{y}\" font-size=\"11\" transform=\"rotate(-60 {x} {y})\">{}</text>",
            escape(label),
            x = fixed4(x),
            y = fixed4(ly)
        );
    }

    for i in 0..k {
        for j in 0..k {
            let x = fixed4(LABEL_MARGIN + CELL * j as f64);
            let y = fixed4(TOP_MARGIN + CELL * i as f64);
            let (fill, text) = match m.get(i, j) {
                Some(v) => (scale_color(stops, v), format!("{v:.2}")),
                None => ("url(#hatch)".to_string(), String::new()),
            };
            let _ = writeln!(
                out,
                "<rect class=\"cell\" data-row=\"{i}\" data-col=\"{j}\" x=\"{x}\" y=\"{y}\" width=\"{c}\" height=\"{c}\" fill=\"{fill}\" stroke=\"#ffffff\"/>",
                c = fixed4(CELL)
            );
            if !text.is_empty() {
                let _ = writeln!(
                    out,
                    "<text x=\"{}\" y=\"{}\" font-size=\"9\" text-anchor=\"middle\">{}</text>",
                    fixed4(LABEL_MARGIN + CELL * j as f64 + CELL / 2.0),
                    fixed4(TOP_MARGIN + CELL * i as f64 + CELL / 2.0 + 3.0),
                    text.replace("-0.00", "0.00")
                );
            }
        }
    }

    let _ = writeln!(
        out,
        "<rect x=\"{}\" y=\"{}\" width=\"16\" height=\"{}\" fill=\"url(#legend)\"/>",
        fixed4(legend_x),
        fixed4(TOP_MARGIN),
        fixed4(grid)
    );
    for (v, y) in [(hi, TOP_MARGIN + 4.0), (lo, TOP_MARGIN + grid)] {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"10\">{:.1}</text>",
            fixed4(legend_x + 20.0),
            fixed4(y),
            v
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Maximal runs of equal values as `(start, end, value)`, end exclusive.
pub fn run_lengths(column: &[u8]) -> Vec<(usize, usize, u8)> {
    let mut runs: Vec<(usize, usize, u8)> = Vec::new();
    for (i, &v) in column.iter().enumerate() {
        match runs.last_mut() {
            Some(last) if last.2 == v => last.1 = i + 1,
            _ => runs.push((i, i + 1, v)),
        }
    }
    runs
}

/// One horizontal strip per selected code, split into contiguous sentence
/// runs whose widths are proportional to their length; runs where the code is
/// present are filled. With two matrices each code gets a pair of strips, the
/// first matrix on top.
pub fn render_segment_strip_svg(matrices: &[&AnnotationMatrix], codes: &[&str], title: &str) -> Result<String, SvgError> {
    if matrices.is_empty() || matrices.len() > 2 {
        return Err(SvgError::MatrixCount(matrices.len()));
    }
    let first = matrices[0];
    if matrices.iter().any(|m| m.codes() != first.codes() || m.num_sentences() != first.num_sentences()) {
        return Err(SvgError::ShapeMismatch);
    }
    let mut columns = Vec::with_capacity(codes.len());
    for &code in codes {
        let col = first.codes().iter().position(|c| c == code).ok_or_else(|| SvgError::UnknownCode(code.to_string()))?;
        columns.push(col);
    }

    let n = first.num_sentences();
    let per_code = matrices.len() as f64 * (STRIP_HEIGHT + 2.0) + 10.0;
    let top = 50.0;
    let axis_y = top + per_code * codes.len() as f64 + 6.0;
    let width = LABEL_MARGIN + STRIP_WIDTH + 30.0;
    let height = axis_y + 44.0;
    let unit = if n > 0 { STRIP_WIDTH / n as f64 } else { 0.0 };

    let mut out = String::new();
    header(&mut out, width, height);
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        fixed4(width / 2.0),
        escape(title)
    );
    if matrices.len() == 2 {
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"40\" font-size=\"10\" text-anchor=\"middle\">upper: {} / lower: {}</text>",
            fixed4(width / 2.0),
            escape(&matrices[0].annotator().label),
            escape(&matrices[1].annotator().label)
        );
    }

    for (ci, (&code, &col)) in codes.iter().zip(&columns).enumerate() {
        let block_y = top + per_code * ci as f64;
        let _ = writeln!(
            out,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>",
            fixed4(LABEL_MARGIN - 6.0),
            fixed4(block_y + STRIP_HEIGHT - 2.0),
            escape(code)
        );
        for (mi, m) in matrices.iter().enumerate() {
            let y = block_y + mi as f64 * (STRIP_HEIGHT + 2.0);
            let _ = writeln!(out, "<g class=\"strip\" data-code=\"{}\" data-annotator=\"{}\">", escape(code), escape(&m.annotator().label));
            for (start, end, v) in run_lengths(&m.column(col)) {
                let fill = if v == 1 { STRIP_FILLED } else { STRIP_EMPTY };
                let class = if v == 1 { "filled" } else { "empty" };
                let _ = writeln!(
                    out,
                    "<rect class=\"{class}\" data-run=\"{start}-{end}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"/>",
                    fixed4(LABEL_MARGIN + unit * start as f64),
                    fixed4(y),
                    fixed4(unit * (end - start) as f64),
                    fixed4(STRIP_HEIGHT)
                );
            }
            out.push_str("</g>\n");
        }
    }

    let _ = writeln!(
        out,
        "<line x1=\"{x0}\" y1=\"{y}\" x2=\"{x1}\" y2=\"{y}\" stroke=\"#333333\"/>",
        x0 = fixed4(LABEL_MARGIN),
        x1 = fixed4(LABEL_MARGIN + STRIP_WIDTH),
        y = fixed4(axis_y)
    );
    let step = tick_step(n);
    let mut t = 0;
    while t <= n {
        let x = fixed4(LABEL_MARGIN + unit * t as f64);
        let _ = writeln!(
            out,
            "<line x1=\"{x}\" y1=\"{y0}\" x2=\"{x}\" y2=\"{y1}\" stroke=\"#333333\"/>\n<text x=\"{x}\" y=\"{ty}\" font-size=\"10\" text-anchor=\"middle\">{t}</text>",
            y0 = fixed4(axis_y),
            y1 = fixed4(axis_y + 4.0),
            ty = fixed4(axis_y + 16.0)
        );
        t += step;
    }
    let _ = writeln!(
        out,
        "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">sentence</text>",
        fixed4(LABEL_MARGIN + STRIP_WIDTH / 2.0),
        fixed4(axis_y + 34.0)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

fn tick_step(n: usize) -> usize {
    match n {
        0..=10 => 1,
        11..=20 => 2,
        21..=60 => 5,
        61..=200 => 20,
        _ => 50,
    }
}
