use std::fmt::Write as _;

use crate::cubical::DiagramTable;
use crate::scalar::Real;

const SIZE: f64 = 400.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 3] = ["#1f77b4", "#d62728", "#2ca02c"];

/// Birth/death scatter plot with the diagonal. Essential classes are drawn at the
/// volume maximum as hollow markers.
pub fn diagram_svg<T: Real>(table: &DiagramTable<T>, dims: &[usize]) -> String {
    let cap = table.cap_value().as_f64();
    let rows: Vec<(usize, f64, f64, bool)> = table
        .rows
        .iter()
        .filter(|r| dims.contains(&r.0))
        .map(|&(d, b, e)| {
            let e = e.as_f64();
            (d, b.as_f64(), if e.is_finite() { e } else { cap }, !e.is_finite())
        })
        .collect();
    let (mut lo, mut hi) = rows
        .iter()
        .flat_map(|r| [r.1, r.2])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        lo = if lo.is_finite() { lo - 1.0 } else { -1.0 };
        hi = lo + 2.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let span = SIZE - 2.0 * MARGIN;
    let px = |v: f64| MARGIN + (v - lo) / (hi - lo) * span;
    let py = |v: f64| SIZE - MARGIN - (v - lo) / (hi - lo) * span;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="4 3"/>"#,
        px(lo),
        py(lo),
        px(hi),
        py(hi)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">birth</text>"#,
        SIZE / 2.0,
        SIZE - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{}" font-size="12" text-anchor="middle" transform="rotate(-90 12 {})">death</text>"#,
        SIZE / 2.0,
        SIZE / 2.0
    );
    for (d, b, e, essential) in rows {
        let color = COLORS[d.min(2)];
        let fill = if essential { "none" } else { color };
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{fill}" stroke="{color}"/>"#,
            px(b),
            py(e)
        );
    }
    for (i, &d) in dims.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{}">H{d}</text>"#,
            MARGIN + 8.0,
            MARGIN + 14.0 * (i as f64 + 1.0),
            COLORS[d.min(2)]
        );
    }
    out.push_str("</svg>\n");
    out
}
