//! Random Early Detection queue (Floyd & Jacobson, 1993).

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::Packet;
use crate::sim::{RandomStream, SimTime};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RedParams {
    /// Physical buffer, in packets.
    pub buffer_packets: usize,
    pub min_th: f64,
    pub max_th: f64,
    /// EWMA weight for the average queue estimate.
    pub w_q: f64,
    pub max_p: f64,
}

impl Default for RedParams {
    fn default() -> Self {
        RedParams {
            buffer_packets: 300,
            min_th: 75.0,
            max_th: 225.0,
            w_q: 0.002,
            max_p: 0.1,
        }
    }
}

impl RedParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.buffer_packets == 0 {
            return Err("buffer_packets must be positive".into());
        }
        if !(self.min_th > 0.0 && self.min_th < self.max_th) {
            return Err("require 0 < min_th < max_th".into());
        }
        if self.max_th > self.buffer_packets as f64 {
            return Err("max_th must not exceed buffer_packets".into());
        }
        if !(self.max_p > 0.0 && self.max_p <= 1.0) {
            return Err("max_p must lie in (0, 1]".into());
        }
        if !(self.w_q > 0.0 && self.w_q <= 1.0) {
            return Err("w_q must lie in (0, 1]".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedVerdict {
    Accepted,
    DroppedEarly,
    DroppedOverflow,
}

#[derive(Debug, Clone)]
pub struct RedQueue {
    params: RedParams,
    avg: f64,
    /// Packets enqueued since the last drop; -1 while outside the early-drop band.
    count: i64,
    packets: VecDeque<Packet>,
    /// Set while the queue is empty; used to decay `avg` across idle periods.
    idle_since: Option<SimTime>,
    /// Typical service time of one packet, for the idle decay.
    service_time: f64,
}

impl RedQueue {
    pub fn new(params: RedParams, service_time: f64) -> Self {
        RedQueue {
            params,
            avg: 0.0,
            count: -1,
            packets: VecDeque::new(),
            idle_since: Some(SimTime::ZERO),
            service_time,
        }
    }

    pub fn params(&self) -> &RedParams {
        &self.params
    }

    pub fn avg(&self) -> f64 {
        self.avg
    }

    pub fn count(&self) -> i64 {
        self.count
    }

    pub fn occupancy(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    /// Early-drop probability the next arrival would face at the current average.
    pub fn drop_probability(&self) -> f64 {
        red_drop_probability(&self.params, self.avg, self.count.max(0))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Packet> {
        self.packets.iter()
    }

    /// Overrides the estimator state; intended for tests and demonstrations.
    pub fn set_state(&mut self, avg: f64, count: i64) {
        self.avg = avg;
        self.count = count;
    }

    fn update_avg(&mut self, now: SimTime) {
        let w = self.params.w_q;
        match self.idle_since.take() {
            Some(since) if self.packets.is_empty() => {
                let m = now.since(since) / self.service_time;
                self.avg *= (1.0 - w).powf(m);
            }
            _ => {
                self.avg = (1.0 - w) * self.avg + w * self.packets.len() as f64;
            }
        }
    }

    /// Admission decision for one arriving forward-direction packet.
    pub fn enqueue(&mut self, packet: Packet, now: SimTime, rng: &mut RandomStream) -> RedVerdict {
        self.update_avg(now);

        if self.packets.len() >= self.params.buffer_packets {
            self.count = 0;
            return RedVerdict::DroppedOverflow;
        }

        if self.avg >= self.params.min_th {
            self.count += 1;
            let p = red_drop_probability(&self.params, self.avg, self.count.max(0));
            if p >= 1.0 || rng.uniform() < p {
                self.count = 0;
                return RedVerdict::DroppedEarly;
            }
        } else {
            self.count = -1;
        }

        self.packets.push_back(packet);
        RedVerdict::Accepted
    }

    pub fn dequeue(&mut self, now: SimTime) -> Option<Packet> {
        let p = self.packets.pop_front();
        if self.packets.is_empty() {
            self.idle_since = Some(now);
        }
        p
    }
}

/// Drop probability for an arriving packet given the average queue and the
/// number of packets accepted since the last drop.
pub fn red_drop_probability(params: &RedParams, avg: f64, count: i64) -> f64 {
    if avg < params.min_th {
        return 0.0;
    }
    if avg >= params.max_th {
        return 1.0;
    }
    let p_b = params.max_p * (avg - params.min_th) / (params.max_th - params.min_th);
    let denom = 1.0 - count as f64 * p_b;
    if denom <= 0.0 {
        1.0
    } else {
        (p_b / denom).clamp(0.0, 1.0)
    }
}
