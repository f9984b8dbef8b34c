//! Goodput of one NewReno flow under uniform random loss, next to the
//! square-root throughput model.

use partcp::cc::Variant;
use partcp::metrics::{mathis_estimate, MathisInputs};
use partcp::net::DATA_PACKET_BYTES;
use partcp::scenario::{run_scenario, ScenarioConfig};

fn main() {
    println!("{:>9} {:>12} {:>12} {:>8}", "p", "goodput", "model", "ratio");
    for p in [1e-4, 2e-4, 4e-4, 8e-4, 1.6e-3, 3.2e-3] {
        let cfg = ScenarioConfig {
            variant: Variant::NewReno,
            flows: 1,
            duration_s: 600.0,
            warmup_s: 100.0,
            uniform_loss: p,
            record_series: false,
            ..ScenarioConfig::default()
        };
        let r = run_scenario(cfg, 5).expect("scenario runs");
        let model = mathis_estimate(&MathisInputs::new(DATA_PACKET_BYTES as f64, r.mean_srtt_s, p)).unwrap();
        let g = r.flow_goodput_bps[0];
        println!("{p:>9.1e} {:>9.3}Mb/s {:>9.3}Mb/s {:>8.3}", g / 1e6, model / 1e6, g / model);
    }
}
