//! Deterministic SVG line plots of the CSV reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::table::Table;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: (f64, f64, f64, f64) = (70.0, 20.0, 40.0, 50.0); // left, right, top, bottom
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Debug, Default)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Default)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(hi.abs()) {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

impl Plot {
    /// Renders the plot; identical inputs give identical bytes.
    pub fn render(&self) -> String {
        let fx = |x: f64| if self.log_x { x.log10() } else { x };
        let finite = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!self.log_x || x > 0.0);
        let pts: Vec<(f64, f64)> =
            self.series.iter().flat_map(|s| s.points.iter().copied().filter(finite)).collect();
        let (x0, x1) = range(pts.iter().map(|p| fx(p.0)));
        let (y0, y1) = range(pts.iter().map(|p| p.1));
        let (l, r, t, b) = MARGIN;
        let (pw, ph) = (WIDTH - l - r, HEIGHT - t - b);
        let sx = |x: f64| l + (fx(x) - x0) / (x1 - x0) * pw;
        let sy = |y: f64| t + (y1 - y) / (y1 - y0) * ph;

        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&self.title));
        let _ = writeln!(s, r#"<rect x="{l}" y="{t}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
            let (px, py) = (l + f * pw, t + (1.0 - f) * ph);
            let xl = if self.log_x { format!("{:.3e}", 10f64.powf(xv)) } else { format!("{xv:.3e}") };
            let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/>"#, t + ph, t + ph + 4.0);
            let _ = writeln!(s, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xl}</text>"#, t + ph + 16.0);
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{py:.2}" x2="{l}" y2="{py:.2}" stroke="black"/>"#, l - 4.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.3e}</text>"#, l - 6.0, py + 4.0);
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, l + pw / 2.0, HEIGHT - 10.0, escape(&self.x_label));
        let _ = writeln!(
            s,
            r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
            t + ph / 2.0,
            t + ph / 2.0,
            escape(&self.y_label)
        );
        for (i, ser) in self.series.iter().enumerate() {
            let color = COLORS[i % COLORS.len()];
            let path: Vec<String> = ser
                .points
                .iter()
                .copied()
                .filter(finite)
                .map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
                .collect();
            if !path.is_empty() {
                let _ = writeln!(s, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, path.join(" "));
            }
            let ly = t + 14.0 + 14.0 * i as f64;
            let _ = writeln!(s, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, l + pw - 150.0, l + pw - 130.0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, l + pw - 125.0, ly + 4.0, escape(&ser.label));
        }
        s.push_str("</svg>\n");
        s
    }
}

fn column_pair(t: &Table, x: &str, y: &str) -> Result<Vec<(f64, f64)>> {
    Ok(t.floats(x)?.into_iter().zip(t.floats(y)?).collect())
}

/// Groups a long `(time, name, value)` table by name, keeping first-seen order.
fn long_series(t: &Table, keep: impl Fn(&str) -> bool) -> Result<Vec<Series>> {
    let (tc, nc, vc) = (t.column("time")?, t.column("name")?, t.column("value")?);
    let mut out: Vec<Series> = Vec::new();
    for r in &t.rows {
        if !keep(&r[nc]) {
            continue;
        }
        let p = (r[tc].parse::<f64>().unwrap_or(f64::NAN), r[vc].parse::<f64>().unwrap_or(f64::NAN));
        match out.iter_mut().find(|s| s.label == r[nc]) {
            Some(s) => s.points.push(p),
            None => out.push(Series { label: r[nc].clone(), points: vec![p] }),
        }
    }
    Ok(out)
}

fn find(dir: &Path, name: &str) -> Option<PathBuf> {
    [dir.join(name), dir.join("analysis").join(name)].into_iter().find(|p| p.exists())
}

/// Writes every plot whose input CSV is present in `dir` (or `dir/analysis`).
pub fn emit_plots(dir: &Path, out: &Path) -> Result<Vec<PathBuf>> {
    let mut plots: Vec<(&str, Plot)> = Vec::new();
    if let Some(p) = find(dir, "series.csv") {
        let t = Table::read(&p)?;
        plots.push((
            "energy.svg",
            Plot {
                title: "Energy".into(),
                x_label: "time".into(),
                y_label: "energy".into(),
                log_x: false,
                series: vec![Series { label: "energy".into(), points: column_pair(&t, "time", "energy")? }],
            },
        ));
        plots.push((
            "discrepancy.svg",
            Plot {
                title: "Discrepancy".into(),
                x_label: "time".into(),
                y_label: "integral of |discrepancy|".into(),
                log_x: false,
                series: vec![Series {
                    label: "abs_discrepancy".into(),
                    points: column_pair(&t, "time", "abs_discrepancy")?,
                }],
            },
        ));
    }
    if let Some(p) = find(dir, "angle_vs_eps.csv") {
        let t = Table::read(&p)?;
        plots.push((
            "angle_vs_eps.svg",
            Plot {
                title: "Contact angle error".into(),
                x_label: "epsilon".into(),
                y_label: "worst error (degrees)".into(),
                log_x: true,
                series: vec![Series {
                    label: "worst_error_deg".into(),
                    points: column_pair(&t, "epsilon", "worst_error_deg")?,
                }],
            },
        ));
    }
    if let Some(p) = find(dir, "monotonicity.csv") {
        let t = Table::read(&p)?;
        let all = long_series(&t, |_| true)?;
        let first = all.first().map(|s| s.label.trim_start_matches("lhs").trim_start_matches("rhs").to_string());
        let series = match first {
            Some(label) => all.into_iter().filter(|s| s.label.ends_with(&label)).collect(),
            None => Vec::new(),
        };
        plots.push((
            "monotonicity.svg",
            Plot {
                title: "Monotonicity at fitted constants".into(),
                x_label: "time".into(),
                y_label: "dG/dt and right side".into(),
                log_x: false,
                series,
            },
        ));
    }
    if plots.is_empty() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("no report CSV found in {}", dir.display()),
        )));
    }
    std::fs::create_dir_all(out)?;
    let mut written = Vec::new();
    for (name, plot) in plots {
        let path = out.join(name);
        std::fs::write(&path, plot.render())?;
        written.push(path);
    }
    Ok(written)
}
