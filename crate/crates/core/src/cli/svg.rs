//! Minimal self-contained SVG charts. Coordinates are printed with two
//! decimals so output is byte-stable.

use std::fmt::Write as _;

use chrono::{Datelike, NaiveDate};

use crate::metrics::HistogramBin;

const W: f64 = 900.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(title: &str) -> String {
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    );
    let _ = writeln!(out, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
        W / 2.0,
        escape(title)
    );
    out
}

/// Rounded tick positions covering `[lo, hi]`.
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64 + 1e-9)
        .unwrap_or(10.0 * mag);
    let first = (lo / step - 1e-9).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0).max(1e-12) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y0) / (self.y1 - self.y0).max(1e-12) * (H - TOP - BOTTOM)
    }

    fn y_axis(&self, out: &mut String, unit: &str) {
        for t in ticks(self.y0, self.y1, 6) {
            let y = self.py(t);
            let _ = writeln!(
                out,
                "<line x1=\"{LEFT}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>",
                W - RIGHT
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}{unit}</text>",
                LEFT - 6.0,
                y + 4.0,
                trim(t)
            );
        }
        let _ = writeln!(
            out,
            "<line x1=\"{LEFT}\" y1=\"{TOP}\" x2=\"{LEFT}\" y2=\"{:.2}\" stroke=\"black\"/>",
            H - BOTTOM
        );
    }
}

fn trim(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Lines over a shared date axis; every series must have one value per date.
pub fn line_chart(title: &str, unit: &str, dates: &[NaiveDate], series: &[(String, Vec<f64>)]) -> String {
    let mut out = header(title);
    let all = series.iter().flat_map(|(_, v)| v.iter().copied());
    let (mut lo, mut hi) = all.fold((0.0f64, 0.0f64), |(l, h), v| (l.min(v), h.max(v)));
    if hi - lo < 1e-9 {
        lo -= 1.0;
        hi += 1.0;
    }
    let f = Frame {
        x0: 0.0,
        x1: dates.len().saturating_sub(1).max(1) as f64,
        y0: lo,
        y1: hi,
    };
    f.y_axis(&mut out, unit);
    let _ = writeln!(
        out,
        "<line x1=\"{LEFT}\" y1=\"{0:.2}\" x2=\"{1:.2}\" y2=\"{0:.2}\" stroke=\"black\"/>",
        f.py(0.0_f64.clamp(lo, hi)),
        W - RIGHT
    );
    let mut year = None;
    for (i, d) in dates.iter().enumerate() {
        if year != Some(d.year()) {
            year = Some(d.year());
            let x = f.px(i as f64);
            let _ = writeln!(
                out,
                "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                H - BOTTOM + 18.0,
                d.year()
            );
        }
    }
    for (k, (name, values)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut path = String::new();
        for (i, v) in values.iter().enumerate() {
            let _ = write!(
                path,
                "{}{:.2},{:.2}",
                if i == 0 { "M" } else { " L" },
                f.px(i as f64),
                f.py(*v)
            );
        }
        let _ = writeln!(
            out,
            "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>"
        );
        let ly = TOP + 8.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"12\" height=\"3\" fill=\"{color}\"/>",
            LEFT + 12.0,
            ly - 4.0
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{ly:.2}\">{}</text>",
            LEFT + 30.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Bars for a return histogram; bin edges are shown in percent.
pub fn histogram_chart(title: &str, bins: &[HistogramBin], width: f64) -> String {
    let mut out = header(title);
    if bins.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let x0 = bins[0].lower * 100.0;
    let x1 = (bins[bins.len() - 1].lower + width) * 100.0;
    let max = bins.iter().map(|b| b.count).max().unwrap_or(0).max(1) as f64;
    let f = Frame {
        x0,
        x1,
        y0: 0.0,
        y1: max,
    };
    f.y_axis(&mut out, "");
    for b in bins {
        let (l, r) = (f.px(b.lower * 100.0), f.px((b.lower + width) * 100.0));
        let top = f.py(b.count as f64);
        let _ = writeln!(
            out,
            "<rect x=\"{l:.2}\" y=\"{top:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\" stroke=\"white\" stroke-width=\"0.5\"/>",
            (r - l).max(0.5),
            f.py(0.0) - top,
            PALETTE[0]
        );
    }
    for t in ticks(x0, x1, 8) {
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}%</text>",
            f.px(t),
            H - BOTTOM + 18.0,
            trim(t)
        );
    }
    out.push_str("</svg>\n");
    out
}
