//! HighSpeed TCP response function (RFC 3649).

use serde::{Deserialize, Serialize};

use crate::DomainError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HstcpParams {
    pub low_window: f64,
    pub high_window: f64,
    pub high_p: f64,
    pub high_decrease: f64,
}

impl Default for HstcpParams {
    fn default() -> Self {
        HstcpParams {
            low_window: 38.0,
            high_window: 83_000.0,
            high_p: 1e-7,
            high_decrease: 0.1,
        }
    }
}

impl HstcpParams {
    /// Loss rate at which standard TCP holds `low_window` (w = sqrt(1.5 / p)).
    pub fn low_p(&self) -> f64 {
        1.5 / (self.low_window * self.low_window)
    }

    /// Response-function loss rate p(w), log-linear between the two anchors.
    pub fn loss_rate(&self, w: f64) -> f64 {
        let frac = (w.ln() - self.low_window.ln()) / (self.high_window.ln() - self.low_window.ln());
        (self.low_p().ln() + frac * (self.high_p.ln() - self.low_p().ln())).exp()
    }

    /// Decrease fraction b(w), log-linear from 0.5 down to `high_decrease`.
    pub fn decrease(&self, w: f64) -> f64 {
        let frac = (w.ln() - self.low_window.ln()) / (self.high_window.ln() - self.low_window.ln());
        (self.high_decrease - 0.5) * frac + 0.5
    }

    /// Returns the per-RTT increase a(w) and decrease fraction b(w).
    pub fn ab(&self, w: f64) -> Result<(f64, f64), DomainError> {
        if !(w >= 1.0) {
            return Err(DomainError::new("hstcp_ab", format!("window {w} below 1 MSS")));
        }
        if w <= self.low_window {
            return Ok((1.0, 0.5));
        }
        let b = self.decrease(w);
        let a = w * w * self.loss_rate(w) * 2.0 * b / (2.0 - b);
        Ok((a, b))
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.low_window >= 1.0 && self.high_window > self.low_window) {
            return Err("require 1 <= low_window < high_window".into());
        }
        if !(self.high_p > 0.0 && self.high_p < self.low_p()) {
            return Err("high_p must be positive and below the low-window loss rate".into());
        }
        if !(self.high_decrease > 0.0 && self.high_decrease < 0.5) {
            return Err("high_decrease must lie in (0, 0.5)".into());
        }
        Ok(())
    }
}

/// `(a(w), b(w))` with the standard RFC 3649 constants.
pub fn hstcp_ab(w: f64) -> Result<(f64, f64), DomainError> {
    HstcpParams::default().ab(w)
}
