//! Parallel sessions: N independent flows opened one after another, with the
//! aggregate congestion window as a derived observable.

use crate::cc::{CcState, Variant};
use crate::sim::SimTime;
use crate::{ConfigError, DomainError};

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelSession {
    pub session_id: usize,
    pub flows: Vec<usize>,
    /// Seconds between consecutive flow establishments.
    pub stagger: f64,
    pub variant: Variant,
}

impl ParallelSession {
    /// A session of `n` flows with ids `0..n`.
    pub fn new(session_id: usize, n: usize, stagger: f64, variant: Variant) -> Result<Self, ConfigError> {
        if n == 0 {
            return Err(ConfigError::invalid("flow_counts", "a session needs at least one flow"));
        }
        if !(stagger.is_finite() && stagger >= 0.0) {
            return Err(ConfigError::invalid("stagger_s", "must be non-negative"));
        }
        Ok(ParallelSession {
            session_id,
            flows: (0..n).collect(),
            stagger,
            variant,
        })
    }

    pub fn n(&self) -> usize {
        self.flows.len()
    }

    /// Start time of each flow: `t0 + k * stagger` for the k-th flow.
    pub fn start_times(&self, t0: SimTime) -> Vec<(usize, SimTime)> {
        self.flows
            .iter()
            .enumerate()
            .map(|(k, &f)| (f, t0 + k as f64 * self.stagger))
            .collect()
    }
}

/// Aggregate window snapshot of a session.
#[derive(Debug, Clone, PartialEq)]
pub struct AcwSample {
    pub t: SimTime,
    pub acw: f64,
    pub per_flow: Vec<f64>,
}

impl AcwSample {
    pub fn new(t: SimTime, per_flow: Vec<f64>) -> Self {
        AcwSample {
            t,
            acw: acw_of(&per_flow),
            per_flow,
        }
    }
}

/// Sum of the given windows.
pub fn acw_of(windows: &[f64]) -> f64 {
    windows.iter().sum()
}

/// Aggregate congestion window of the session's flows.
pub fn acw<'a>(session: &ParallelSession, states: impl Fn(usize) -> Option<&'a CcState>) -> f64 {
    session
        .flows
        .iter()
        .filter_map(|&f| states(f))
        .map(CcState::window)
        .sum()
}

/// Relative drop of the aggregate window from its maximum.
pub fn reduction(max_acw: f64, current_acw: f64) -> Result<f64, DomainError> {
    if !(max_acw > 0.0) {
        return Err(DomainError::new("reduction", "max_acw must be positive"));
    }
    if current_acw > max_acw {
        return Err(DomainError::new("reduction", "current_acw exceeds max_acw"));
    }
    Ok(((max_acw - current_acw) / max_acw).clamp(0.0, 1.0))
}

/// Smallest flow count whose combined per-flow estimate covers the bottleneck.
pub fn parallelism_threshold(bottleneck_bps: f64, per_flow_bps: f64) -> Result<u32, DomainError> {
    if !(bottleneck_bps > 0.0 && per_flow_bps > 0.0) {
        return Err(DomainError::new(
            "parallelism_threshold",
            "both rates must be positive",
        ));
    }
    let n = (bottleneck_bps / per_flow_bps).ceil();
    Ok((n as u32).max(1))
}
