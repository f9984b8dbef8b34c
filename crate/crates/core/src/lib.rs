//! Deterministic packet-level simulation of parallel TCP over a RED dumbbell.
//!
//! The crate is organised bottom-up:
//!
//! - [`sim`]: clock, event queue, seeded random streams.
//! - [`net`]: packets, links, the RED queue, the dumbbell, route selection
//!   and Poisson background sources.
//! - [`cc`]: the sender/receiver state machines and the five window laws
//!   (`newreno`, `scalable`, `hstcp`, `htcp`, `cubic`).
//! - [`parallel`]: sessions of independent flows and the aggregate window.
//! - [`metrics`]: utilization, loss ratio, Jain's index, Mathis estimate.
//! - [`scenario`]: wires everything into one runnable world.
//! - [`experiment`]: TOML configs, the variant x flow-count matrix, CSV and
//!   SVG output.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! | example | shows |
//! |---|---|
//! | `sawtooth` | single NewReno flow, cwnd sawtooth under periodic loss |
//! | `red_queue` | RED average and drop probability on a saturated link |
//! | `parallel_independence` | one forced loss in a 3-flow session |
//! | `fairness_sweep` | Jain's index as the flow count grows |
//! | `mathis` | goodput against uniform random loss |
//! | `multi_route` | flows spread over parallel bottlenecks |
//! | `variants` | the five window laws side by side |
//! | `matrix` | a reduced experiment matrix written to disk |
//!
//! ```
//! use partcp::cc::Variant;
//! use partcp::scenario::{Scenario, ScenarioConfig};
//!
//! let cfg = ScenarioConfig {
//!     variant: Variant::Cubic,
//!     flows: 2,
//!     duration_s: 20.0,
//!     warmup_s: 5.0,
//!     ..ScenarioConfig::default()
//! };
//! let report = Scenario::new(cfg, 7).unwrap().run().unwrap();
//! assert!(report.utilization > 0.5);
//! ```

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cc;
pub mod experiment;
pub mod metrics;
pub mod net;
pub mod parallel;
pub mod scenario;
pub mod sim;

use std::fmt;

/// Invalid configuration value; `key` names the offending setting.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid `{key}`: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            key: key.into(),
            message: message.to_string(),
        }
    }
}

/// Argument outside the domain of a numeric operation.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{op}: {message}")]
pub struct DomainError {
    pub op: &'static str,
    pub message: String,
}

impl DomainError {
    pub fn new(op: &'static str, message: impl fmt::Display) -> Self {
        DomainError {
            op,
            message: message.to_string(),
        }
    }
}
