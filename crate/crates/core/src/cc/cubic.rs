//! CUBIC window growth: a cubic function of time since the last loss,
//! anchored so the inflection point sits at the pre-loss window.

use serde::{Deserialize, Serialize};

use crate::sim::SimTime;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CubicParams {
    /// Scaling constant of the cubic term (MSS / s^3).
    pub c: f64,
    /// Fraction of the window removed on loss.
    pub beta: f64,
    pub tcp_friendly: bool,
    pub fast_convergence: bool,
}

impl Default for CubicParams {
    fn default() -> Self {
        CubicParams {
            c: 0.4,
            beta: 0.2,
            tcp_friendly: true,
            fast_convergence: false,
        }
    }
}

impl CubicParams {
    /// Seconds for the curve to climb from `w_max * (1 - beta)` back to `w_max`.
    pub fn k_for(&self, w_max: f64) -> f64 {
        (w_max * self.beta / self.c).cbrt()
    }

    /// Additive increase per RTT that matches standard TCP's average rate.
    pub fn friendly_alpha(&self) -> f64 {
        3.0 * self.beta / (2.0 - self.beta)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.c > 0.0) {
            return Err("c must be positive".into());
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err("beta must lie in (0, 1)".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubicState {
    pub w_max: f64,
    pub k: f64,
    /// Window the curve is anchored on (usually `w_max`).
    pub origin: f64,
    pub epoch_start: Option<SimTime>,
    /// Reno-equivalent window for the TCP-friendly region.
    pub w_est: f64,
}

impl Default for CubicState {
    fn default() -> Self {
        CubicState {
            w_max: 0.0,
            k: 0.0,
            origin: 0.0,
            epoch_start: None,
            w_est: 0.0,
        }
    }
}

impl CubicState {
    /// W(t) for `t` seconds into the current epoch.
    pub fn target_at(&self, params: &CubicParams, t: f64) -> f64 {
        let d = t - self.k;
        params.c * d * d * d + self.origin
    }

    pub fn start_epoch(&mut self, params: &CubicParams, now: SimTime, cwnd: f64) {
        self.epoch_start = Some(now);
        if cwnd < self.w_max {
            self.k = ((self.w_max - cwnd) / params.c).cbrt();
            self.origin = self.w_max;
        } else {
            self.k = 0.0;
            self.origin = cwnd;
        }
        self.w_est = cwnd;
    }

    /// Applies a loss to `cwnd`; returns the reduced window.
    pub fn on_loss(&mut self, params: &CubicParams, now: SimTime, cwnd: f64) -> f64 {
        self.w_max = if params.fast_convergence && cwnd < self.w_max {
            cwnd * (2.0 - params.beta) / 2.0
        } else {
            cwnd
        };
        let reduced = cwnd * (1.0 - params.beta);
        self.start_epoch(params, now, reduced);
        reduced
    }

    pub fn on_timeout(&mut self, cwnd: f64) {
        self.w_max = cwnd;
        self.epoch_start = None;
    }

    /// Per-ACK congestion-avoidance increment.
    pub fn increment(&mut self, params: &CubicParams, now: SimTime, cwnd: f64) -> f64 {
        if self.epoch_start.is_none() {
            self.start_epoch(params, now, cwnd);
        }
        let t = now.since(self.epoch_start.expect("epoch started"));
        let mut target = self.target_at(params, t);
        if params.tcp_friendly {
            self.w_est += params.friendly_alpha() / cwnd;
            target = target.max(self.w_est);
        }
        if target > cwnd {
            ((target - cwnd) / cwnd).min(0.5)
        } else {
            0.01 / cwnd
        }
    }
}
