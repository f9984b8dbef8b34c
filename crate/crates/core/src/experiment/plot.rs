use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ExperimentError, RunRecord};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Mean of `metric` per variant and flow count, averaged over repetitions.
fn by_variant(records: &[RunRecord], metric: fn(&RunRecord) -> f64) -> BTreeMap<&'static str, Vec<(f64, f64)>> {
    let mut acc: BTreeMap<&'static str, BTreeMap<usize, (f64, usize)>> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.failed()) {
        let e = acc.entry(r.variant.name()).or_default().entry(r.n).or_insert((0.0, 0));
        e.0 += metric(r);
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(v, m)| (v, m.into_iter().map(|(n, (s, c))| (n as f64, s / c as f64)).collect()))
        .collect()
}

fn nice_max(x: f64) -> f64 {
    if !(x > 0.0) {
        return 1.0;
    }
    let mag = 10f64.powf(x.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|&c| c >= x)
        .unwrap_or(10.0 * mag)
}

fn frame(svg: &mut String, title: &str, x_label: &str, y_label: &str, y_max: f64) {
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let _ = write!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = write!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="15">{title}</text>"#,
        LEFT + pw / 2.0
    );
    let _ = write!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=5 {
        let v = y_max * i as f64 / 5.0;
        let y = TOP + ph - ph * i as f64 / 5.0;
        let _ = write!(
            svg,
            r##"<line x1="{LEFT}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">{}</text>"##,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0,
            trim_num(v)
        );
    }
    let _ = write!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0
    );
    let _ = write!(
        svg,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{y_label}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );
}

fn trim_num(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() { "0".into() } else { s.to_string() }
}

fn legend(svg: &mut String, i: usize, name: &str) {
    let x = W - RIGHT + 15.0;
    let y = TOP + 10.0 + 20.0 * i as f64;
    let c = COLORS[i % COLORS.len()];
    let _ = write!(
        svg,
        r#"<rect x="{x}" y="{}" width="14" height="10" fill="{c}"/><text x="{}" y="{y}">{name}</text>"#,
        y - 9.0,
        x + 20.0
    );
}

/// Line chart of a metric against the flow count, one line per variant.
pub fn line_chart(records: &[RunRecord], metric: fn(&RunRecord) -> f64, title: &str, y_label: &str) -> Result<String, ExperimentError> {
    let data = by_variant(records, metric);
    if data.is_empty() {
        return Err(ExperimentError::Empty);
    }
    let x_max = data.values().flatten().map(|p| p.0).fold(1.0, f64::max);
    let y_max = nice_max(data.values().flatten().map(|p| p.1).fold(0.0, f64::max));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + pw * x / x_max;
    let sy = |y: f64| TOP + ph - ph * y / y_max;

    let mut svg = String::new();
    frame(&mut svg, title, "number of flows", y_label, y_max);
    let mut ns: Vec<f64> = data.values().flatten().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    for n in ns {
        let _ = write!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{n}</text>"#,
            sx(n),
            TOP + ph + 16.0
        );
    }
    for (i, (name, pts)) in data.iter().enumerate() {
        let c = COLORS[i % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = write!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#,
            path.join(" ")
        );
        for &(x, y) in pts {
            let _ = write!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, sx(x), sy(y));
        }
        legend(&mut svg, i, name);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Bar chart with one bar per label.
pub fn bar_chart(bars: &[(String, f64)], title: &str, y_label: &str) -> Result<String, ExperimentError> {
    if bars.is_empty() {
        return Err(ExperimentError::Empty);
    }
    let y_max = nice_max(bars.iter().map(|b| b.1).fold(0.0, f64::max));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let slot = pw / bars.len() as f64;
    let mut svg = String::new();
    frame(&mut svg, title, "variant", y_label, y_max);
    for (i, (name, v)) in bars.iter().enumerate() {
        let h = ph * (v / y_max).clamp(0.0, 1.0);
        let x = LEFT + slot * i as f64 + slot * 0.2;
        let _ = write!(
            svg,
            r#"<rect x="{x:.2}" y="{:.2}" width="{:.2}" height="{h:.2}" fill="{}"/><text x="{:.2}" y="{}" text-anchor="middle">{name}</text>"#,
            TOP + ph - h,
            slot * 0.6,
            COLORS[i % COLORS.len()],
            x + slot * 0.3,
            TOP + ph + 16.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Per-variant mean of `metric` over all successful cells.
fn variant_means(records: &[RunRecord], metric: fn(&RunRecord) -> f64) -> Vec<(String, f64)> {
    by_variant(records, metric)
        .into_iter()
        .map(|(v, pts)| (v.to_string(), pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64))
        .collect()
}

/// Writes the five standard figures into `dir`.
pub fn emit_plots(records: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    if records.iter().all(|r| r.failed()) {
        return Err(ExperimentError::Empty);
    }
    let figures = [
        (
            "utilization_vs_n.svg",
            line_chart(records, |r| r.utilization, "Bottleneck utilization", "utilization (fraction of capacity)")?,
        ),
        (
            "loss_ratio_vs_n.svg",
            line_chart(records, |r| r.loss_ratio, "Loss ratio", "loss ratio (retransmitted / sent)")?,
        ),
        (
            "avg_loss_per_variant.svg",
            bar_chart(&variant_means(records, |r| r.loss_ratio), "Average loss ratio", "loss ratio (retransmitted / sent)")?,
        ),
        (
            "jfi_vs_n.svg",
            line_chart(records, |r| r.jfi, "Jain's fairness index", "JFI (dimensionless)")?,
        ),
        (
            "jfi_per_variant.svg",
            bar_chart(&variant_means(records, |r| r.jfi), "Average fairness index", "JFI (dimensionless)")?,
        ),
    ];
    let mut out = Vec::new();
    for (name, svg) in figures {
        let path = dir.join(name);
        fs::write(&path, svg).map_err(|e| ExperimentError::io(&path, e))?;
        out.push(path);
    }
    Ok(out)
}
