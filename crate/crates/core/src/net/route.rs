use serde::{Deserialize, Serialize};

use super::Topology;
use crate::sim::SimTime;

/// Weights for choosing a bottleneck among parallel routes. A route's score
/// is the weighted sum of its utilization, one-way delay (s), hop count and
/// administrative cost; the lowest score wins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutePolicy {
    pub utilization: f64,
    pub delay: f64,
    pub distance: f64,
    pub cost: f64,
}

impl Default for RoutePolicy {
    fn default() -> Self {
        RoutePolicy {
            utilization: 1.0,
            delay: 0.0,
            distance: 0.0,
            cost: 0.0,
        }
    }
}

impl RoutePolicy {
    pub fn utilization_only() -> Self {
        RoutePolicy::default()
    }

    pub fn validate(&self) -> Result<(), String> {
        let w = [self.utilization, self.delay, self.distance, self.cost];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err("route weights must be non-negative".into());
        }
        if w.iter().sum::<f64>() <= 0.0 {
            return Err("route weights must sum to a positive value".into());
        }
        Ok(())
    }

    pub fn score(&self, utilization: f64, delay: f64, hops: u32, cost: f64) -> f64 {
        self.utilization * utilization
            + self.delay * delay
            + self.distance * hops as f64
            + self.cost * cost
    }
}

/// Picks the bottleneck for `flow_id` and pins it in the routing table.
///
/// An existing assignment is returned unchanged. Ties go to the lowest link id.
pub fn route_assign(flow_id: usize, topo: &mut Topology, policy: &RoutePolicy, now: SimTime) -> usize {
    if let Some(link) = topo.route_of(flow_id) {
        return link;
    }
    let mut best = 0;
    let mut best_score = f64::INFINITY;
    for link in &topo.bottlenecks {
        let s = policy.score(link.utilization(now), link.prop_delay, link.hops, link.cost);
        if s < best_score {
            best = link.id;
            best_score = s;
        }
    }
    if flow_id >= topo.routes.len() {
        topo.routes.resize(flow_id + 1, None);
    }
    topo.routes[flow_id] = Some(best);
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{build_dumbbell, LinkConfig, Packet, RedParams, Source};

    fn topo(links: usize, flows: usize) -> Topology {
        let cfg = LinkConfig {
            bottleneck_links: links,
            ..LinkConfig::default()
        };
        build_dumbbell(&cfg, &RedParams::default(), flows, 0).unwrap()
    }

    #[test]
    fn single_link_always_chosen() {
        let mut t = topo(1, 3);
        for f in 0..3 {
            assert_eq!(route_assign(f, &mut t, &RoutePolicy::default(), SimTime::ZERO), 0);
        }
    }

    #[test]
    fn idle_identical_links_pick_lowest_id() {
        let mut t = topo(2, 1);
        assert_eq!(route_assign(0, &mut t, &RoutePolicy::default(), SimTime::ZERO), 0);
    }

    #[test]
    fn busy_link_is_avoided() {
        let mut t = topo(2, 2);
        // Load link 0 to 90% over one second: 1125 packets of 0.8 ms each.
        for i in 0..1125 {
            t.bottlenecks[0].begin_service(Packet::data(i, Source::Flow(0), i, SimTime::ZERO, false));
            t.bottlenecks[0].finish_service();
        }
        let now = SimTime::from_secs(1.0);
        assert!((t.bottlenecks[0].utilization(now) - 0.9).abs() < 1e-9);
        assert_eq!(route_assign(1, &mut t, &RoutePolicy::utilization_only(), now), 1);
    }

    #[test]
    fn assignment_is_sticky() {
        let mut t = topo(2, 1);
        assert_eq!(route_assign(0, &mut t, &RoutePolicy::default(), SimTime::ZERO), 0);
        t.bottlenecks[0].begin_service(Packet::data(0, Source::Flow(0), 0, SimTime::ZERO, false));
        assert_eq!(route_assign(0, &mut t, &RoutePolicy::default(), SimTime::from_secs(1.0)), 0);
    }

    #[test]
    fn cost_and_delay_weights() {
        let mut t = topo(2, 1);
        t.bottlenecks[0].cost = 5.0;
        let policy = RoutePolicy {
            utilization: 0.0,
            cost: 1.0,
            ..RoutePolicy::default()
        };
        assert_eq!(route_assign(0, &mut t, &policy, SimTime::ZERO), 1);
        assert!(RoutePolicy { utilization: 0.0, ..RoutePolicy::default() }.validate().is_err());
    }
}
