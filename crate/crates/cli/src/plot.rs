//! Log-log scatter plots with a least-squares slope.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum PlotError {
    Empty,
    MissingColumn(String),
    TooFewPoints(usize),
    BadRow(usize),
}

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PlotError::Empty => write!(f, "empty CSV"),
            PlotError::MissingColumn(c) => write!(f, "missing column '{c}'"),
            PlotError::TooFewPoints(k) => write!(f, "need at least 2 positive points, got {k}"),
            PlotError::BadRow(i) => write!(f, "row {i} has the wrong number of fields"),
        }
    }
}

impl std::error::Error for PlotError {}

/// Positive `(x, y)` pairs from two named columns. Rows with a
/// non-numeric or non-positive entry are skipped.
pub fn read_points(csv: &str, x: &str, y: &str) -> Result<Vec<(f64, f64)>, PlotError> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or(PlotError::Empty)?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| *h == name)
            .ok_or_else(|| PlotError::MissingColumn(name.to_string()))
    };
    let (ix, iy) = (col(x)?, col(y)?);
    let mut pts = Vec::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != header.len() {
            return Err(PlotError::BadRow(i + 2));
        }
        if let (Ok(a), Ok(b)) = (f[ix].parse::<f64>(), f[iy].parse::<f64>()) {
            if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
                pts.push((a, b));
            }
        }
    }
    Ok(pts)
}

/// Ordinary least squares of `log10 y` on `log10 x`: `(slope, intercept)`.
pub fn loglog_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.log10()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub struct Plot {
    pub svg: String,
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

const W: f64 = 640.0;
const H: f64 = 480.0;
const PAD: f64 = 60.0;

/// Renders the plot; output depends only on the input bytes.
pub fn plot(csv: &str, x: &str, y: &str) -> Result<Plot, PlotError> {
    let pts = read_points(csv, x, y)?;
    let (slope, intercept) = loglog_fit(&pts).ok_or(PlotError::TooFewPoints(pts.len()))?;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.log10()).collect();
    let span = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min).floor();
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil();
        if hi > lo {
            (lo, hi)
        } else {
            (lo, lo + 1.0)
        }
    };
    let (x0, x1) = span(&lx);
    let (y0, y1) = span(&ly);
    let px = |v: f64| PAD + (v - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let py = |v: f64| H - PAD - (v - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    for d in (x0 as i64)..=(x1 as i64) {
        let p = px(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{p:.2}" y1="{:.2}" x2="{p:.2}" y2="{:.2}" stroke="black"/><text x="{p:.2}" y="{:.2}" font-size="12" text-anchor="middle">1e{d}</text>"#,
            H - PAD,
            H - PAD + 5.0,
            H - PAD + 20.0
        );
    }
    for d in (y0 as i64)..=(y1 as i64) {
        let p = py(d as f64);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{p:.2}" x2="{PAD}" y2="{p:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">1e{d}</text>"#,
            PAD - 5.0,
            PAD - 8.0,
            p + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">{x}</text>"#,
        W / 2.0,
        H - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 15 {:.2})">{y}</text>"#,
        H / 2.0,
        H / 2.0
    );
    for (a, b) in lx.iter().zip(&ly) {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            px(*a),
            py(*b)
        );
    }
    let fit = |v: f64| slope * v + intercept;
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
        px(x0),
        py(fit(x0)),
        px(x1),
        py(fit(x1))
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" fill="firebrick">slope = {slope:.4}</text>"#,
        PAD + 10.0,
        PAD + 20.0
    );
    s.push_str("</svg>\n");
    Ok(Plot {
        svg: s,
        slope,
        intercept,
        points: pts.len(),
    })
}
