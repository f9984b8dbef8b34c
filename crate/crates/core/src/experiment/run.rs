use rayon::prelude::*;

use super::ExperimentConfig;
use crate::cc::Variant;
use crate::metrics::SeriesPoint;
use crate::scenario::run_scenario;
use crate::ConfigError;

/// One matrix cell's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub variant: Variant,
    pub n: usize,
    pub rep: u32,
    pub seed: u64,
    pub utilization: f64,
    pub loss_ratio: f64,
    pub jfi: f64,
    pub acw_mean: f64,
    pub drops: u64,
    pub retransmissions: u64,
    pub series: Vec<SeriesPoint>,
    /// Set when the cell aborted; metric fields are then zero.
    pub error: Option<String>,
}

impl RunRecord {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

/// Seed of one cell, independent of scheduling order.
pub fn cell_seed(seed: u64, variant: Variant, n: usize, rep: u32) -> u64 {
    seed ^ fnv1a(format!("{}/{n}/{rep}", variant.name()).as_bytes())
}

/// Runs every (variant, n, rep) cell on `jobs` worker threads. Records come
/// back sorted by variant name, then n, then rep.
pub fn run_matrix(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<RunRecord>, ConfigError> {
    cfg.validate()?;
    let variants = cfg.parsed_variants()?;
    let mut cells = Vec::new();
    for &v in &variants {
        for &n in &cfg.flow_counts {
            for rep in 0..cfg.repetitions {
                cells.push((v, n, rep));
            }
        }
    }
    cells.sort_by(|a, b| (a.0.name(), a.1, a.2).cmp(&(b.0.name(), b.1, b.2)));
    cells.dedup();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| ConfigError::invalid("jobs", e))?;
    let records = pool.install(|| {
        cells
            .par_iter()
            .map(|&(v, n, rep)| run_cell(cfg, v, n, rep))
            .collect()
    });
    Ok(records)
}

fn run_cell(cfg: &ExperimentConfig, variant: Variant, n: usize, rep: u32) -> RunRecord {
    let seed = cell_seed(cfg.seed, variant, n, rep);
    let mut rec = RunRecord {
        variant,
        n,
        rep,
        seed,
        utilization: 0.0,
        loss_ratio: 0.0,
        jfi: 0.0,
        acw_mean: 0.0,
        drops: 0,
        retransmissions: 0,
        series: Vec::new(),
        error: None,
    };
    match run_scenario(cfg.scenario(variant, n), seed) {
        Ok(r) => {
            rec.utilization = r.utilization;
            rec.loss_ratio = r.loss_ratio;
            rec.jfi = r.jfi;
            rec.acw_mean = r.acw_mean;
            rec.drops = r.drops;
            rec.retransmissions = r.retransmissions;
            rec.series = r.series;
        }
        Err(e) => rec.error = Some(e.to_string()),
    }
    rec
}
