//! One NewReno flow over the default dumbbell. Prints its window once per
//! second and every loss reaction.
//!
//!     cargo run --release --example sawtooth -- [seconds]

use partcp::cc::Variant;
use partcp::scenario::{run_scenario, ScenarioConfig};

fn main() {
    let secs: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(120.0);
    let cfg = ScenarioConfig {
        variant: Variant::NewReno,
        flows: 1,
        duration_s: secs,
        warmup_s: secs.min(20.0),
        ..ScenarioConfig::default()
    };
    let report = run_scenario(cfg, 1).expect("scenario runs");

    println!("{:>6} {:>8} {:>6} {:>8}", "t", "cwnd", "queue", "avg");
    for p in &report.series {
        let bar = "#".repeat((p.cwnd / 10.0) as usize);
        println!("{:>6.0} {:>8.1} {:>6} {:>8.1} {bar}", p.t.as_secs(), p.cwnd, p.queue_len, p.queue_avg);
    }
    for e in &report.loss_events {
        println!("{:>8.2}s {:?}: {:.1} -> {:.1}", e.t.as_secs(), e.kind, e.cwnd_before, e.cwnd_after);
    }
    println!(
        "utilization {:.3}, loss ratio {:.5}, mean srtt {:.3} s",
        report.utilization, report.loss_ratio, report.mean_srtt_s
    );
}
