use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use partcp::experiment::{self, ExperimentConfig, ExperimentError};

/// Parallel TCP experiment runner.
#[derive(Parser)]
#[command(name = "partcp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix described by a TOML file.
    Run {
        config: PathBuf,
        /// Output directory; defaults to the config's `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Comma-separated variant names.
        #[arg(long)]
        variants: Option<String>,
        /// Comma-separated flow counts.
        #[arg(long)]
        flows: Option<String>,
        #[arg(long)]
        no_plots: bool,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Parse and check a configuration without running it.
    Validate { config: PathBuf },
    /// Regenerate figures from a summary.csv.
    Plot { summary: PathBuf },
}

const EXIT_CONFIG: u8 = 1;
const EXIT_FAULT: u8 = 2;
const EXIT_IO: u8 = 3;

fn exit_code(e: &ExperimentError) -> u8 {
    match e {
        ExperimentError::Config(_) | ExperimentError::Parse { .. } | ExperimentError::Empty => EXIT_CONFIG,
        ExperimentError::Io { .. } => EXIT_IO,
    }
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| ExperimentError::io(path, e))?;
    Ok(experiment::parse_config(&text)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            config,
            out,
            seed,
            variants,
            flows,
            no_plots,
            jobs,
        } => (|| {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(v) = variants {
                cfg.override_variants(&v)?;
            }
            if let Some(f) = flows {
                cfg.override_flows(&f)?;
            }
            cfg.validate()?;
            let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let res = experiment::run_to_dir(&cfg, &dir, jobs, !no_plots)?;
            println!(
                "{} cells ({} failed) written to {}",
                res.records.len(),
                res.failures,
                dir.display()
            );
            Ok(if res.failures > 0 { EXIT_FAULT } else { 0 })
        })(),
        Command::Validate { config } => load(&config).map(|cfg| {
            println!(
                "ok: {} variants x {} flow counts x {} repetitions, {} s each",
                cfg.parsed_variants().map_or(0, |v| v.len()),
                cfg.flow_counts.len(),
                cfg.repetitions,
                cfg.duration_s
            );
            print!("{}", cfg.to_toml());
            0
        }),
        Command::Plot { summary } => experiment::plot_summary(&summary).map(|files| {
            for f in files {
                println!("{}", f.display());
            }
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
