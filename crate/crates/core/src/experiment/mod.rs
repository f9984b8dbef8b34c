//! Experiment matrices: TOML configuration, parallel execution of every
//! (variant, flow count, repetition) cell, CSV and metadata output, and SVG
//! figures.

mod config;
mod output;
mod plot;
mod run;

use std::path::{Path, PathBuf};

pub use config::{parse_config, ExperimentConfig};
pub use output::{
    emit_csv, emit_failures, emit_metadata, ensure_writable, fmt6, read_summary, series_file_name,
    SERIES_HEADER, SUMMARY_HEADER,
};
pub use plot::{bar_chart, emit_plots, line_chart};
pub use run::{cell_seed, fnv1a, run_matrix, RunRecord};

use crate::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("no successful runs to plot")]
    Empty,
}

impl ExperimentError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        ExperimentError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

/// Everything a finished matrix left on disk.
#[derive(Debug, Clone)]
pub struct MatrixOutput {
    pub records: Vec<RunRecord>,
    pub files: Vec<PathBuf>,
    pub failures: usize,
}

/// Runs the matrix and writes CSV, metadata and (optionally) plots to `dir`.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path, jobs: usize, plots: bool) -> Result<MatrixOutput, ExperimentError> {
    cfg.validate()?;
    ensure_writable(dir)?;
    let records = run_matrix(cfg, jobs)?;
    let mut files = emit_csv(&records, dir, cfg.write_series)?;
    files.push(emit_metadata(cfg, &records, dir)?);
    files.extend(emit_failures(&records, dir)?);
    let failures = records.iter().filter(|r| r.failed()).count();
    if plots && failures < records.len() {
        files.extend(emit_plots(&records, dir)?);
    }
    Ok(MatrixOutput {
        records,
        files,
        failures,
    })
}

/// Regenerates the figures next to an existing `summary.csv`.
pub fn plot_summary(summary: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    let records = read_summary(summary)?;
    let dir = summary.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    emit_plots(&records, dir)
}
