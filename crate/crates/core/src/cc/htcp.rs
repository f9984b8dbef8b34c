//! H-TCP (Leith & Shorten): increase grows with time since the last loss,
//! decrease adapts to the ratio of minimum to maximum RTT.

use serde::{Deserialize, Serialize};

use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HtcpParams {
    /// Seconds after a loss during which the standard increase applies.
    pub delta_l: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for HtcpParams {
    fn default() -> Self {
        HtcpParams {
            delta_l: 1.0,
            beta_min: 0.5,
            beta_max: 0.8,
        }
    }
}

impl HtcpParams {
    /// Increase factor as a function of seconds since the last loss.
    pub fn alpha(&self, delta: f64) -> f64 {
        if delta <= self.delta_l {
            1.0
        } else {
            let d = delta - self.delta_l;
            1.0 + 10.0 * d + (d / 2.0) * (d / 2.0)
        }
    }

    pub fn beta(&self, rtt_min: f64, rtt_max: f64) -> f64 {
        if rtt_min > 0.0 && rtt_max > 0.0 {
            (rtt_min / rtt_max).clamp(self.beta_min, self.beta_max)
        } else {
            self.beta_min
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.delta_l >= 0.0) {
            return Err("delta_l must be non-negative".into());
        }
        if !(0.0 < self.beta_min && self.beta_min <= self.beta_max && self.beta_max < 1.0) {
            return Err("require 0 < beta_min <= beta_max < 1".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HtcpState {
    pub rtt_min: f64,
    /// Largest RTT seen since the last congestion event.
    pub rtt_max: f64,
    pub beta: f64,
    /// When the last recovery episode ended. The increase clock runs from
    /// the later of this and the loss itself.
    pub recovered_at: SimTime,
}

impl HtcpState {
    pub fn new(params: &HtcpParams) -> Self {
        HtcpState {
            rtt_min: f64::INFINITY,
            rtt_max: 0.0,
            beta: params.beta_min,
            recovered_at: SimTime::ZERO,
        }
    }

    pub fn on_rtt(&mut self, rtt: f64) {
        self.rtt_min = self.rtt_min.min(rtt);
        self.rtt_max = self.rtt_max.max(rtt);
    }

    /// Recomputes beta for the loss being handled and starts a new epoch.
    pub fn on_congestion(&mut self, params: &HtcpParams) -> f64 {
        if self.rtt_max > 0.0 && self.rtt_min.is_finite() {
            self.beta = params.beta(self.rtt_min, self.rtt_max);
        }
        self.rtt_max = 0.0;
        self.beta
    }

    /// Per-ACK congestion-avoidance increment.
    pub fn increment(&self, params: &HtcpParams, cwnd: f64, delta: f64) -> f64 {
        2.0 * (1.0 - self.beta) * params.alpha(delta) / cwnd
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_closed_form() {
        let p = HtcpParams::default();
        assert_eq!(p.alpha(0.3), 1.0);
        assert!((p.alpha(2.0) - 11.25).abs() < 1e-12);
    }

    #[test]
    fn alpha_continuous_at_threshold() {
        let p = HtcpParams::default();
        assert_eq!(p.alpha(1.0), 1.0);
        assert!((p.alpha(1.0 + 1e-12) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn beta_clamped() {
        let p = HtcpParams::default();
        assert_eq!(p.beta(0.2, 0.21), 0.8);
        assert_eq!(p.beta(0.2, 1.0), 0.5);
        assert!((p.beta(0.2, 0.3) - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(p.beta(0.0, 0.0), 0.5);
    }

    #[test]
    fn unit_beta_half_gives_alpha_per_rtt() {
        let p = HtcpParams::default();
        let s = HtcpState::new(&p);
        // beta = 0.5 means cwnd ACKs add alpha segments per RTT.
        let cwnd = 40.0;
        assert!((s.increment(&p, cwnd, 0.5) * cwnd - 1.0).abs() < 1e-12);
    }
}
