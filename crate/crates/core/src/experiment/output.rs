use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentConfig, ExperimentError, RunRecord};
use crate::cc::Variant;

pub const SUMMARY_HEADER: &str =
    "variant,n,rep,seed,utilization,loss_ratio,jfi,acw_mean,drops,retransmissions";
pub const SERIES_HEADER: &str = "t,flow_id,goodput_bps,cwnd,queue_len,queue_avg";

/// Formats a real with six significant digits in fixed notation.
pub fn fmt6(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0.00000".to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    // Rounding may carry into the next decade.
    let exp = if (x.abs() / 10f64.powi(exp)) >= 9.999995 { exp + 1 } else { exp };
    if exp >= 5 {
        let scale = 10f64.powi(exp - 5);
        format!("{:.0}", (x / scale).round() * scale)
    } else {
        format!("{:.*}", (5 - exp) as usize, x)
    }
}

pub fn series_file_name(variant: Variant, n: usize, rep: u32) -> String {
    format!("series_{}_{n}_{rep}.csv", variant.name())
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, ExperimentError> {
    fs::File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ExperimentError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<fs::File>) -> Result<(), ExperimentError> {
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

/// Checks that `dir` exists or can be created and accepts new files.
pub fn ensure_writable(dir: &Path) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
    let probe = dir.join(".write_probe");
    fs::write(&probe, b"").map_err(|e| ExperimentError::io(dir, e))?;
    fs::remove_file(&probe).map_err(|e| ExperimentError::io(dir, e))
}

/// Writes `summary.csv` (successful cells) and, when enabled, one series file
/// per cell. Returns the paths written.
pub fn emit_csv(records: &[RunRecord], dir: &Path, with_series: bool) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut sorted: Vec<&RunRecord> = records.iter().filter(|r| !r.failed()).collect();
    sorted.sort_by(|a, b| (a.variant.name(), a.n, a.rep).cmp(&(b.variant.name(), b.n, b.rep)));

    let mut written = Vec::new();
    let path = dir.join("summary.csv");
    let mut w = create(&path)?;
    let io = |e| ExperimentError::io(&path, e);
    writeln!(w, "{SUMMARY_HEADER}").map_err(io)?;
    for r in &sorted {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.variant.name(),
            r.n,
            r.rep,
            r.seed,
            fmt6(r.utilization),
            fmt6(r.loss_ratio),
            fmt6(r.jfi),
            fmt6(r.acw_mean),
            r.drops,
            r.retransmissions
        )
        .map_err(io)?;
    }
    finish(&path, w)?;
    written.push(path);

    if with_series {
        for r in &sorted {
            let path = dir.join(series_file_name(r.variant, r.n, r.rep));
            let mut w = create(&path)?;
            let io = |e| ExperimentError::io(&path, e);
            writeln!(w, "{SERIES_HEADER}").map_err(io)?;
            let mut rows = r.series.clone();
            rows.sort_by(|a, b| a.t.cmp(&b.t).then(a.flow_id.cmp(&b.flow_id)));
            for p in rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{}",
                    fmt6(p.t.as_secs()),
                    p.flow_id,
                    fmt6(p.goodput_bps),
                    fmt6(p.cwnd),
                    p.queue_len,
                    fmt6(p.queue_avg)
                )
                .map_err(io)?;
            }
            finish(&path, w)?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Writes `failures.csv` listing aborted cells; nothing when none failed.
pub fn emit_failures(records: &[RunRecord], dir: &Path) -> Result<Option<PathBuf>, ExperimentError> {
    let failed: Vec<&RunRecord> = records.iter().filter(|r| r.failed()).collect();
    if failed.is_empty() {
        return Ok(None);
    }
    let path = dir.join("failures.csv");
    let mut w = create(&path)?;
    let io = |e| ExperimentError::io(&path, e);
    writeln!(w, "variant,n,rep,seed,error").map_err(io)?;
    for r in failed {
        let msg = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        writeln!(w, "{},{},{},{},{msg}", r.variant.name(), r.n, r.rep, r.seed).map_err(io)?;
    }
    finish(&path, w)?;
    Ok(Some(path))
}

#[derive(Serialize)]
struct Derived {
    base_rtt_s: f64,
    /// Stagger in force, after defaulting to one base RTT.
    stagger_s: f64,
    bdp_bytes: f64,
    bdp_packets: f64,
    data_packet_bytes: u32,
    ack_packet_bytes: u32,
    cells: usize,
    failed_cells: usize,
}

#[derive(Serialize)]
struct Metadata<'a> {
    crate_version: &'static str,
    derived: Derived,
    config: &'a ExperimentConfig,
}

/// Writes `metadata.toml`: the full configuration plus derived constants.
pub fn emit_metadata(cfg: &ExperimentConfig, records: &[RunRecord], dir: &Path) -> Result<PathBuf, ExperimentError> {
    let base_rtt = cfg.link.base_rtt();
    let bdp_bytes = cfg.link.bottleneck_bps * base_rtt / 8.0;
    let meta = Metadata {
        crate_version: env!("CARGO_PKG_VERSION"),
        derived: Derived {
            base_rtt_s: base_rtt,
            stagger_s: cfg.stagger_s.unwrap_or(base_rtt),
            bdp_bytes,
            bdp_packets: bdp_bytes / crate::net::DATA_PACKET_BYTES as f64,
            data_packet_bytes: crate::net::DATA_PACKET_BYTES,
            ack_packet_bytes: crate::net::ACK_PACKET_BYTES,
            cells: records.len(),
            failed_cells: records.iter().filter(|r| r.failed()).count(),
        },
        config: cfg,
    };
    let text = toml::to_string(&meta).expect("metadata is always serializable");
    let path = dir.join("metadata.toml");
    fs::write(&path, text).map_err(|e| ExperimentError::io(&path, e))?;
    Ok(path)
}

/// Reads a `summary.csv` back into records (without series).
pub fn read_summary(path: &Path) -> Result<Vec<RunRecord>, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SUMMARY_HEADER => {}
        _ => return Err(ExperimentError::parse(path, 1, "missing summary header")),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        let bad = |what: &str| ExperimentError::parse(path, i + 1, format!("bad {what}"));
        if f.len() != 10 {
            return Err(bad("column count"));
        }
        let real = |k: usize, name: &str| f[k].parse::<f64>().map_err(|_| bad(name));
        out.push(RunRecord {
            variant: f[0].parse().map_err(|_| bad("variant"))?,
            n: f[1].parse().map_err(|_| bad("n"))?,
            rep: f[2].parse().map_err(|_| bad("rep"))?,
            seed: f[3].parse().map_err(|_| bad("seed"))?,
            utilization: real(4, "utilization")?,
            loss_ratio: real(5, "loss_ratio")?,
            jfi: real(6, "jfi")?,
            acw_mean: real(7, "acw_mean")?,
            drops: f[8].parse().map_err(|_| bad("drops"))?,
            retransmissions: f[9].parse().map_err(|_| bad("retransmissions"))?,
            series: Vec::new(),
            error: None,
        });
    }
    Ok(out)
}
