//! Congestion control: the shared loss/recovery state machine, the five
//! window laws, and the per-flow sender and receiver built on top of them.

mod cubic;
mod hstcp;
mod htcp;
mod receiver;
mod sender;
mod state;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use cubic::{CubicParams, CubicState};
pub use hstcp::{hstcp_ab, HstcpParams};
pub use htcp::{HtcpParams, HtcpState};
pub use receiver::Receiver;
pub use sender::{AckOutcome, Sender, TimerCommand};
pub use state::{CcState, Phase, VariantState};

/// The congestion-control law a flow runs. Ordered by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Variant {
    Cubic,
    Hstcp,
    Htcp,
    NewReno,
    Scalable,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::NewReno,
        Variant::Scalable,
        Variant::Htcp,
        Variant::Hstcp,
        Variant::Cubic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Cubic => "cubic",
            Variant::Hstcp => "hstcp",
            Variant::Htcp => "htcp",
            Variant::NewReno => "newreno",
            Variant::Scalable => "scalable",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown congestion-control variant {0:?} (expected newreno, scalable, htcp, hstcp or cubic)")]
pub struct UnknownVariant(pub String);

impl FromStr for Variant {
    type Err = UnknownVariant;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "newreno" => Ok(Variant::NewReno),
            "scalable" => Ok(Variant::Scalable),
            "htcp" => Ok(Variant::Htcp),
            "hstcp" => Ok(Variant::Hstcp),
            "cubic" => Ok(Variant::Cubic),
            other => Err(UnknownVariant(other.to_string())),
        }
    }
}

/// Scalable TCP (Kelly): fixed per-ACK increase, fixed multiplicative decrease.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StcpParams {
    pub a: f64,
    pub b: f64,
    /// At or below this window the standard increase applies.
    pub legacy_window: f64,
}

impl Default for StcpParams {
    fn default() -> Self {
        StcpParams {
            a: 0.01,
            b: 0.125,
            legacy_window: 16.0,
        }
    }
}

/// Every tunable of the sender, with the defaults in force unless overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CcParams {
    pub initial_cwnd: f64,
    pub initial_rto_s: f64,
    pub rto_min_s: f64,
    pub rto_max_s: f64,
    /// Optional cap on cwnd (a receive-window stand-in). `None` is unbounded.
    pub max_cwnd: Option<f64>,
    /// Restart the retransmission timer only on the first partial ACK of a
    /// recovery episode instead of on every one.
    pub impatient_timer: bool,
    /// Limited slow start threshold (RFC 3742): above it slow start adds at
    /// most half this many segments per RTT. `None` disables it.
    pub max_ssthresh: Option<f64>,
    pub scalable: StcpParams,
    pub hstcp: HstcpParams,
    pub htcp: HtcpParams,
    pub cubic: CubicParams,
}

impl Default for CcParams {
    fn default() -> Self {
        CcParams {
            initial_cwnd: 2.0,
            initial_rto_s: 1.0,
            rto_min_s: 1.0,
            rto_max_s: 60.0,
            max_cwnd: None,
            impatient_timer: false,
            max_ssthresh: Some(100.0),
            scalable: StcpParams::default(),
            hstcp: HstcpParams::default(),
            htcp: HtcpParams::default(),
            cubic: CubicParams::default(),
        }
    }
}

impl CcParams {
    /// Returns `(key, message)` for the first invalid setting.
    pub fn validate(&self) -> Result<(), (String, String)> {
        let err = |k: &str, m: &str| Err((k.to_string(), m.to_string()));
        if !(self.initial_cwnd >= 1.0) {
            return err("cc.initial_cwnd", "must be at least 1");
        }
        if !(self.rto_min_s > 0.0 && self.rto_max_s >= self.rto_min_s) {
            return err("cc.rto_min_s", "require 0 < rto_min_s <= rto_max_s");
        }
        if !(self.initial_rto_s > 0.0) {
            return err("cc.initial_rto_s", "must be positive");
        }
        if let Some(m) = self.max_ssthresh {
            if !(m >= 2.0) {
                return err("cc.max_ssthresh", "must be at least 2");
            }
        }
        if let Some(m) = self.max_cwnd {
            if !(m >= 1.0) {
                return err("cc.max_cwnd", "must be at least 1");
            }
        }
        let s = &self.scalable;
        if !(s.a > 0.0 && s.a < 1.0 && s.b > 0.0 && s.b < 1.0) {
            return err("cc.scalable", "require 0 < a < 1 and 0 < b < 1");
        }
        self.hstcp.validate().or_else(|m| err("cc.hstcp", &m))?;
        self.htcp.validate().or_else(|m| err("cc.htcp", &m))?;
        self.cubic.validate().or_else(|m| err("cc.cubic", &m))?;
        Ok(())
    }
}
