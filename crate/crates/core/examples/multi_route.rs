//! Six flows over three parallel bottlenecks. Each flow is pinned at start
//! to the least-utilized link.

use partcp::cc::Variant;
use partcp::net::{build_dumbbell, route_assign, LinkConfig, RedParams, RoutePolicy};
use partcp::scenario::{run_scenario, ScenarioConfig};
use partcp::sim::SimTime;

fn main() {
    let link = LinkConfig {
        bottleneck_links: 3,
        ..LinkConfig::default()
    };

    // Assignment on an idle topology: ties go to the lowest id.
    let mut topo = build_dumbbell(&link, &RedParams::default(), 6, 0).expect("topology");
    for f in 0..6 {
        println!("idle assignment: flow {f} -> link {}", route_assign(f, &mut topo, &RoutePolicy::default(), SimTime::ZERO));
    }

    let cfg = ScenarioConfig {
        variant: Variant::NewReno,
        flows: 6,
        duration_s: 200.0,
        warmup_s: 20.0,
        link,
        background_sources: 3,
        record_series: false,
        ..ScenarioConfig::default()
    };
    let r = run_scenario(cfg, 2).expect("scenario runs");
    for (i, busy) in r.link_busy.iter().enumerate() {
        println!("link {i}: busy {:.3}", busy);
    }
    for (f, g) in r.flow_goodput_bps.iter().enumerate() {
        println!("flow {f}: {:.3} Mb/s", g / 1e6);
    }
    println!("aggregate utilization {:.3}, jfi {:.4}", r.utilization, r.jfi);
}
