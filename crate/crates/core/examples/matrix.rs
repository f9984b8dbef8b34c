//! A reduced experiment matrix written to disk: summary.csv, per-cell
//! series, metadata.toml and the SVG figures.
//!
//!     cargo run --release --example matrix -- [out-dir]

use std::path::PathBuf;

use partcp::experiment::{parse_config, run_to_dir};

const CONFIG: &str = r#"
variants = ["newreno", "cubic", "htcp"]
flow_counts = [1, 5, 10]
duration_s = 150.0
warmup_s = 30.0
seed = 42
"#;

fn main() {
    let out: PathBuf = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("partcp-matrix"), PathBuf::from);
    let cfg = parse_config(CONFIG).expect("valid config");
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let res = run_to_dir(&cfg, &out, jobs, true).expect("matrix runs");
    for r in &res.records {
        println!(
            "{:>8} n={:<3} util {:.4} loss {:.5} jfi {:.4}",
            r.variant.name(),
            r.n,
            r.utilization,
            r.loss_ratio,
            r.jfi
        );
    }
    println!("{} files in {}", res.files.len(), out.display());
}
