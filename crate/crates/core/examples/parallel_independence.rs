//! A 3-flow CUBIC session where flow 0 loses one packet at t = 300 s.
//! Each flow gets its own bottleneck, so the other two are unaffected; the
//! aggregate window drops by the share flow 0 gives up.

use partcp::cc::Variant;
use partcp::net::LinkConfig;
use partcp::parallel::reduction;
use partcp::scenario::{run_scenario, ForcedLoss, LossKind, ScenarioConfig};

fn config(inject: bool) -> ScenarioConfig {
    ScenarioConfig {
        variant: Variant::Cubic,
        flows: 3,
        duration_s: 320.0,
        warmup_s: 0.0,
        link: LinkConfig {
            bottleneck_links: 3,
            ..LinkConfig::default()
        },
        background_sources: 3,
        forced_losses: if inject { vec![ForcedLoss { flow: 0, at_s: 300.0 }] } else { Vec::new() },
        trace_cwnd: true,
        ..ScenarioConfig::default()
    }
}

fn main() {
    let control = run_scenario(config(false), 11).expect("control runs");
    let injected = run_scenario(config(true), 11).expect("injected run");

    let inj = &injected.injections[0];
    println!("dropped segment {} of flow 0 at {:.3} s", inj.seq, inj.t.as_secs());
    println!("windows at the drop: {:?}", inj.windows.iter().map(|w| format!("{w:.1}")).collect::<Vec<_>>());
    if let Some(ev) = injected
        .loss_events
        .iter()
        .find(|e| e.flow == 0 && e.t >= inj.t && e.kind == LossKind::FastRetransmit)
    {
        println!(
            "flow 0 reacted at {:.3} s: cwnd {:.1} -> {:.1}, ACW {:.1} -> {:.1}, reduction {:.4}",
            ev.t.as_secs(),
            ev.cwnd_before,
            ev.cwnd_after,
            ev.acw_before,
            ev.acw_after,
            reduction(ev.acw_before, ev.acw_after).unwrap()
        );
    }
    for f in [1, 2] {
        let trace = |r: &partcp::scenario::ScenarioReport| {
            r.cwnd_trace.iter().filter(|(_, g, _)| *g == f).copied().collect::<Vec<_>>()
        };
        println!("flow {f}: trace identical to control = {}", trace(&control) == trace(&injected));
    }
}
