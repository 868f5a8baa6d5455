//! Static SVG line charts of ledger CSV columns against `time`, on a
//! log₁₀ axis. Non-positive values have no logarithm and are skipped.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use crate::artifacts::read_ledger_csv;

pub const DEFAULT_COLUMNS: [&str; 3] = ["e_hat_m0", "e_h_m0_i0", "e_phi_m0_i0"];

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidInput, msg)
}

/// Renders `series` of `(name, points)` into an SVG document.
pub fn render_svg(series: &[(String, Vec<(f64, f64)>)]) -> String {
    let logged: Vec<(&str, Vec<(f64, f64)>)> = series
        .iter()
        .map(|(name, pts)| (name.as_str(), pts.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).map(|&(t, y)| (t, y.log10())).collect()))
        .collect();
    let all = || logged.iter().flat_map(|(_, p)| p.iter());
    let (t0, t1) = all().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    let (y0, y1) = all().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.1), b.max(p.1)));
    // Degenerate ranges still map to the plot box.
    let span = |lo: f64, hi: f64| if hi > lo { (lo, hi) } else if lo.is_finite() { (lo - 0.5, lo + 0.5) } else { (0.0, 1.0) };
    let ((t0, t1), (y0, y1)) = (span(t0, t1), span(y0.floor(), y1.ceil()));
    let sx = |t: f64| MARGIN + (t - t0) / (t1 - t0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#);
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let mut decade = y0;
    while decade <= y1 + 1e-9 {
        let y = sy(decade);
        let _ = writeln!(svg, r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/>"##, WIDTH - MARGIN);
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="end">1e{decade}</text>"#, MARGIN - 4.0, y + 4.0);
        decade += ((y1 - y0) / 8.0).ceil().max(1.0);
    }
    for t in [t0, 0.5 * (t0 + t1), t1] {
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="11" text-anchor="middle">{t:.3}</text>"#, sx(t), HEIGHT - MARGIN + 16.0);
    }
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="middle">time</text>"#, WIDTH / 2.0, HEIGHT - 12.0);
    for (k, (name, pts)) in logged.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = pts.iter().map(|&(t, y)| format!("{:.2},{:.2}", sx(t), sy(y))).collect();
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, points.join(" "));
        let ly = MARGIN + 14.0 + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<text x="{:.2}" y="{ly:.2}" font-size="12" fill="{color}">{name}</text>"#, WIDTH - MARGIN - 150.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Plots `columns` of the ledger CSV at `input` (defaults when empty).
pub fn plot_csv(input: &Path, output: &Path, columns: &[String]) -> io::Result<()> {
    let (names, rows) = read_ledger_csv(std::fs::File::open(input)?)?;
    let index = |name: &str| names.iter().position(|n| n == name);
    let time = index("time").ok_or_else(|| invalid(format!("{}: no 'time' column", input.display())))?;
    let wanted: Vec<String> = if columns.is_empty() {
        DEFAULT_COLUMNS.iter().filter(|c| index(c).is_some()).map(|c| c.to_string()).collect()
    } else {
        columns.to_vec()
    };
    let series = wanted
        .iter()
        .map(|name| {
            let j = index(name).ok_or_else(|| invalid(format!("{}: no column '{name}'", input.display())))?;
            Ok((name.clone(), rows.iter().map(|r| (r[time], r[j])).collect()))
        })
        .collect::<io::Result<Vec<_>>>()?;
    std::fs::write(output, render_svg(&series))
}
