//! The five window laws on the same 5-flow session.

use partcp::cc::Variant;
use partcp::scenario::{run_scenario, ScenarioConfig};

fn main() {
    println!("{:>9} {:>7} {:>8} {:>7} {:>7} {:>6} {:>6}", "variant", "util", "loss", "jfi", "acw", "fast", "rto");
    for v in Variant::ALL {
        let cfg = ScenarioConfig {
            variant: v,
            flows: 5,
            duration_s: 300.0,
            warmup_s: 50.0,
            record_series: false,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(cfg, 4).expect("scenario runs");
        let fast: u64 = r.flow_stats.iter().map(|s| s.fast_retransmits).sum();
        let rto: u64 = r.flow_stats.iter().map(|s| s.timeouts).sum();
        println!(
            "{:>9} {:>7.4} {:>8.5} {:>7.4} {:>7.1} {fast:>6} {rto:>6}",
            v.name(),
            r.utilization,
            r.loss_ratio,
            r.jfi,
            r.acw_mean
        );
    }
}
