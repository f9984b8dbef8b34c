//! Deterministic discrete-event core: simulated clock, event queue and
//! seeded random streams.

mod engine;
mod rng;
mod time;

pub use engine::{Engine, Event, EventHandle};
pub use rng::{streams, RandomStream};
pub use time::SimTime;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("cannot schedule at {at} when the clock reads {now}")]
    ScheduleInPast { at: SimTime, now: SimTime },
    #[error("protocol fault on flow {flow} at {at}: {detail}")]
    Protocol {
        flow: usize,
        at: SimTime,
        detail: String,
    },
}
