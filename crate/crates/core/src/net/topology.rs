use serde::{Deserialize, Serialize};

use super::{BottleneckLink, FifoLink, RedParams};
use crate::ConfigError;

/// Physical parameters of the dumbbell. Rates in bits/s, delays in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    pub access_bps: f64,
    pub access_delay_s: f64,
    pub bottleneck_bps: f64,
    /// One-way propagation delay of the bottleneck.
    pub bottleneck_delay_s: f64,
    /// Parallel R1 -> R2 links; more than one enables multi-route assignment.
    pub bottleneck_links: usize,
    /// Sender hosts; `None` gives one host per flow.
    pub senders: Option<usize>,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            access_bps: 100e6,
            access_delay_s: 0.0,
            bottleneck_bps: 10e6,
            bottleneck_delay_s: 0.1,
            bottleneck_links: 1,
            senders: None,
        }
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, format!("must be positive, got {v}")))
            }
        };
        positive("link.access_bps", self.access_bps)?;
        positive("link.bottleneck_bps", self.bottleneck_bps)?;
        positive("link.bottleneck_delay_s", self.bottleneck_delay_s)?;
        if !(self.access_delay_s.is_finite() && self.access_delay_s >= 0.0) {
            return Err(ConfigError::invalid(
                "link.access_delay_s",
                "must be non-negative",
            ));
        }
        if self.bottleneck_links == 0 {
            return Err(ConfigError::invalid(
                "link.bottleneck_links",
                "at least one bottleneck link is required",
            ));
        }
        Ok(())
    }

    /// Bandwidth-delay product of one bottleneck, in bytes, using the one-way delay.
    pub fn bdp_bytes(&self) -> f64 {
        self.bottleneck_bps * self.bottleneck_delay_s / 8.0
    }

    /// Round-trip propagation delay of an unloaded path.
    pub fn base_rtt(&self) -> f64 {
        2.0 * (self.bottleneck_delay_s + 2.0 * self.access_delay_s)
    }
}

pub type HostId = usize;

/// Two routers, one or more parallel bottlenecks, one access link per host.
///
/// The reverse direction mirrors the forward one with lossless FIFO links.
#[derive(Debug, Clone)]
pub struct Topology {
    pub senders: Vec<HostId>,
    pub receivers: Vec<HostId>,
    /// Sender -> R1, indexed by sender position.
    pub sender_access: Vec<FifoLink>,
    /// R2 -> receiver, indexed by receiver position.
    pub receiver_access: Vec<FifoLink>,
    /// Receiver -> R2 (reverse path).
    pub receiver_uplink: Vec<FifoLink>,
    /// R1 -> sender (reverse path).
    pub sender_downlink: Vec<FifoLink>,
    pub bottlenecks: Vec<BottleneckLink>,
    /// R2 -> R1, one per forward bottleneck.
    pub reverse_bottlenecks: Vec<FifoLink>,
    /// Flow id -> bottleneck link id, fixed once assigned.
    pub routes: Vec<Option<usize>>,
    /// Flow id -> sender position.
    pub flow_sender: Vec<usize>,
}

impl Topology {
    pub fn route_of(&self, flow: usize) -> Option<usize> {
        self.routes.get(flow).copied().flatten()
    }
}

/// Builds the dumbbell for `flows` session flows plus `extra_hosts` host
/// pairs for background generators. RED sits on the forward bottleneck only.
pub fn build_dumbbell(
    links: &LinkConfig,
    red: &RedParams,
    flows: usize,
    extra_hosts: usize,
) -> Result<Topology, ConfigError> {
    links.validate()?;
    red.validate().map_err(|m| ConfigError::invalid("red", m))?;
    let senders = links.senders.unwrap_or(flows);
    if senders == 0 && flows > 0 {
        return Err(ConfigError::invalid(
            "link.senders",
            format!("{flows} flows requested but no sender hosts"),
        ));
    }
    let hosts = senders.max(flows) + extra_hosts;
    let mk_access = || FifoLink::new(links.access_bps, links.access_delay_s);

    let bottlenecks = (0..links.bottleneck_links)
        .map(|id| {
            BottleneckLink::new(
                id,
                links.bottleneck_bps,
                links.bottleneck_delay_s,
                red.clone(),
            )
        })
        .collect();
    let reverse_bottlenecks = (0..links.bottleneck_links)
        .map(|_| FifoLink::new(links.bottleneck_bps, links.bottleneck_delay_s))
        .collect();

    let sender_hosts = senders + extra_hosts;
    let receiver_hosts = flows + extra_hosts;
    Ok(Topology {
        senders: (0..sender_hosts).collect(),
        receivers: (hosts..hosts + receiver_hosts).collect(),
        sender_access: (0..sender_hosts).map(|_| mk_access()).collect(),
        sender_downlink: (0..sender_hosts).map(|_| mk_access()).collect(),
        receiver_access: (0..receiver_hosts).map(|_| mk_access()).collect(),
        receiver_uplink: (0..receiver_hosts).map(|_| mk_access()).collect(),
        bottlenecks,
        reverse_bottlenecks,
        routes: vec![None; flows],
        flow_sender: (0..flows).map(|f| if senders == 0 { 0 } else { f % senders }).collect(),
    })
}
