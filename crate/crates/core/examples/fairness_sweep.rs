//! Jain's index and utilization as the number of parallel flows grows.
//!
//!     cargo run --release --example fairness_sweep -- [variant] [seconds]

use partcp::cc::Variant;
use partcp::scenario::{run_scenario, ScenarioConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let variant: Variant = args.next().map_or(Variant::Cubic, |s| s.parse().expect("variant name"));
    let secs: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(300.0);

    println!("{:>3} {:>8} {:>8} {:>8}  per-flow Mb/s", "n", "util", "jfi", "loss");
    for n in [1, 5, 10, 15, 20, 25, 30] {
        let cfg = ScenarioConfig {
            variant,
            flows: n,
            duration_s: secs,
            warmup_s: secs / 10.0,
            record_series: false,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(cfg, 1).expect("scenario runs");
        let rates: Vec<String> = r.flow_goodput_bps.iter().map(|g| format!("{:.2}", g / 1e6)).collect();
        println!("{n:>3} {:>8.4} {:>8.4} {:>8.5}  {}", r.utilization, r.jfi, r.loss_ratio, rates.join(" "));
    }
}
