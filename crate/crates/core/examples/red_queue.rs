//! Drives a RED queue directly: a burst fills it faster than it drains and
//! the average, drop probability and verdicts are printed as it grows.

use partcp::net::{red_drop_probability, Packet, RedParams, RedQueue, RedVerdict, Source};
use partcp::sim::{RandomStream, SimTime};

fn main() {
    let params = RedParams::default();
    println!("drop probability against the average queue (count = 0):");
    for avg in [0.0, 75.0, 100.0, 150.0, 200.0, 224.0, 225.0, 300.0] {
        println!("  avg {avg:>5.0} -> p_b {:.4}", red_drop_probability(&params, avg, 0));
    }

    // 10 Mb/s drains one 1000-byte packet per 0.8 ms; offer two per slot.
    let service = 0.0008;
    let mut q = RedQueue::new(params, service);
    let mut rng = RandomStream::new(7, 0);
    let (mut early, mut overflow) = (0, 0);
    for slot in 0..4000u64 {
        let now = SimTime::from_secs(slot as f64 * service);
        for k in 0..2 {
            let pkt = Packet::data(2 * slot + k, Source::Flow(0), 2 * slot + k, now, false);
            match q.enqueue(pkt, now, &mut rng) {
                RedVerdict::Accepted => {}
                RedVerdict::DroppedEarly => early += 1,
                RedVerdict::DroppedOverflow => overflow += 1,
            }
        }
        q.dequeue(now);
        if slot % 400 == 0 {
            println!(
                "t={:.2}s occupancy {:>3} avg {:>6.1} p {:.3}",
                now.as_secs(),
                q.occupancy(),
                q.avg(),
                q.drop_probability()
            );
        }
    }
    println!("early drops {early}, overflow drops {overflow}");
}
