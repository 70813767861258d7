//! Minimal deterministic SVG charts.
//!
//! Coordinates are printed with three decimals, so identical inputs give
//! identical bytes.

use std::fmt::Write as _;

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Linear map from data range to pixels.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        // A degenerate range still gets a visible span.
        let (lo, hi) = if hi - lo > 1e-12 { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
        Axis { lo, hi, px_lo, px_hi }
    }

    fn px(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
}

fn frame(out: &mut String, x: &Axis, y: &Axis, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x.lo + t * (x.hi - x.lo);
        let yv = y.lo + t * (y.hi - y.lo);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            x.px(xv),
            H - MARGIN + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            MARGIN - 6.0,
            y.px(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, W / 2.0, H - 16.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn polyline(out: &mut String, pts: impl Iterator<Item = (f64, f64)>, color: &str) {
    let mut p = String::new();
    for (i, (x, y)) in pts.enumerate() {
        if i > 0 {
            p.push(' ');
        }
        let _ = write!(p, "{x:.3},{y:.3}");
    }
    let _ = writeln!(out, r#"<polyline points="{p}" fill="none" stroke="{color}" stroke-width="1.5"/>"#);
}

/// Predicted against real positions with the identity line.
pub fn scatter_svg(points: &[(f64, f64)], title: &str) -> String {
    let (lo, hi) = range(points.iter().flat_map(|(r, p)| [*r, *p]));
    let x = Axis::new(lo, hi, MARGIN, W - MARGIN);
    let y = Axis::new(lo, hi, H - MARGIN, MARGIN);
    let mut out = String::new();
    header(&mut out, title);
    frame(&mut out, &x, &y, "real position (mm)", "predicted position (mm)");
    polyline(&mut out, [(x.px(x.lo), y.px(x.lo)), (x.px(x.hi), y.px(x.hi))].into_iter(), "blue");
    for (r, p) in points {
        let _ = writeln!(out, r#"<circle cx="{:.3}" cy="{:.3}" r="2.5" fill="darkorange"/>"#, x.px(*r), y.px(*p));
    }
    out.push_str("</svg>\n");
    out
}

/// Satisfiability (left scale, 0 to 1) and RMSE (right scale) per epoch.
pub fn trace_svg(epochs: &[f64], sat: &[f64], rmse: &[f64], title: &str) -> String {
    let (e_lo, e_hi) = range(epochs.iter().copied());
    let (r_lo, r_hi) = range(rmse.iter().copied());
    let x = Axis::new(e_lo, e_hi, MARGIN, W - MARGIN);
    let ys = Axis::new(0.0, 1.0, H - MARGIN, MARGIN);
    let yr = Axis::new(r_lo.min(0.0), r_hi, H - MARGIN, MARGIN);
    let mut out = String::new();
    header(&mut out, title);
    frame(&mut out, &x, &ys, "epoch", "satisfiability");
    for i in 0..=4 {
        let v = yr.lo + i as f64 / 4.0 * (yr.hi - yr.lo);
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="start" fill="firebrick">{}</text>"#,
            W - MARGIN + 6.0,
            yr.px(v) + 4.0,
            tick(v)
        );
    }
    polyline(&mut out, epochs.iter().zip(sat).map(|(e, s)| (x.px(*e), ys.px(*s))), "seagreen");
    polyline(&mut out, epochs.iter().zip(rmse).map(|(e, r)| (x.px(*e), yr.px(*r))), "firebrick");
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" fill="seagreen">satisfiability</text><text x="{}" y="{}" fill="firebrick">validation RMSE</text>"#,
        MARGIN + 8.0,
        MARGIN + 16.0,
        MARGIN + 120.0,
        MARGIN + 16.0
    );
    out.push_str("</svg>\n");
    out
}
