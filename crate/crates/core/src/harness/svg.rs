use std::fmt::Write;

use super::FitReport;

const W: f64 = 520.0;
const H: f64 = 380.0;
const PAD: f64 = 56.0;

/// Points and fitted line on log₂ axes.
pub fn loglog_plot(title: &str, fit: &FitReport) -> String {
    let xs = fit.points.iter().map(|p| p.0);
    let ys = fit.points.iter().map(|p| p.1);
    let (x0, x1) = span(xs);
    let (y0, y1) = span(ys.chain([fit.intercept + fit.slope * x0, fit.intercept + fit.slope * x1]));
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">log2 x</text>"#,
        W / 2.0,
        H - 14.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{}" font-size="12" transform="rotate(-90 16 {})" text-anchor="middle">log2 y</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (v, anchor_x) in [(x0, sx(x0)), (x1, sx(x1))] {
        let _ = writeln!(s, r#"<text x="{anchor_x:.1}" y="{}" text-anchor="middle" font-size="11">{v:.2}</text>"#, H - PAD + 16.0);
    }
    for (v, anchor_y) in [(y0, sy(y0)), (y1, sy(y1))] {
        let _ = writeln!(s, r#"<text x="{}" y="{anchor_y:.1}" text-anchor="end" font-size="11">{v:.2}</text>"#, PAD - 6.0);
    }
    let _ = writeln!(
        s,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="firebrick" stroke-width="1.5"/>"#,
        sx(x0),
        sy(fit.intercept + fit.slope * x0),
        sx(x1),
        sy(fit.intercept + fit.slope * x1)
    );
    for &(x, y) in &fit.points {
        let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="steelblue"/>"#, sx(x), sy(y));
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-size="12">slope {:.4}, r² {:.5}</text>"#,
        PAD + 8.0,
        PAD + 18.0,
        fit.slope,
        fit.r_squared
    );
    s.push_str("</svg>\n");
    s
}

fn span(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        let m = 0.05 * (hi - lo);
        (lo - m, hi + m)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
