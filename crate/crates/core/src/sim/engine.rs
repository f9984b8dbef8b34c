use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{SimError, SimTime};

/// Opaque reference to a scheduled event, usable with [`Engine::cancel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventHandle(u64);

impl EventHandle {
    pub fn seq(self) -> u64 {
        self.0
    }
}

/// A unit of simulated work. `seq` is the engine-wide insertion counter used
/// to order events that share a firing time.
#[derive(Debug, Clone)]
pub struct Event<E> {
    pub fire_at: SimTime,
    pub seq: u64,
    pub payload: E,
}

struct Entry<E>(Event<E>);

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.0.seq == other.0.seq
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // BinaryHeap is a max-heap; invert so the earliest (time, seq) pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .0
            .fire_at
            .cmp(&self.0.fire_at)
            .then_with(|| other.0.seq.cmp(&self.0.seq))
    }
}

/// Discrete-event scheduler: a simulated clock plus a time-ordered queue.
///
/// Events with equal `fire_at` are delivered in ascending insertion order.
/// Cancellation is lazy; cancelled entries stay in the heap and are skipped
/// when they reach the front.
pub struct Engine<E> {
    now: SimTime,
    next_seq: u64,
    heap: BinaryHeap<Entry<E>>,
    // One bit per sequence number, set once the event fired or was cancelled.
    retired: Vec<u64>,
    processed: u64,
}

impl<E> Default for Engine<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> Engine<E> {
    pub fn new() -> Self {
        Engine {
            now: SimTime::ZERO,
            next_seq: 0,
            heap: BinaryHeap::new(),
            retired: Vec::new(),
            processed: 0,
        }
    }

    #[inline]
    pub fn now(&self) -> SimTime {
        self.now
    }

    /// Total number of events delivered over the engine's lifetime.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    /// Number of entries still in the heap, cancelled ones included.
    pub fn queued(&self) -> usize {
        self.heap.len()
    }

    pub fn schedule(&mut self, fire_at: SimTime, payload: E) -> Result<EventHandle, SimError> {
        if fire_at < self.now {
            return Err(SimError::ScheduleInPast {
                at: fire_at,
                now: self.now,
            });
        }
        let seq = self.next_seq;
        self.next_seq += 1;
        let word = (seq / 64) as usize;
        if word >= self.retired.len() {
            self.retired.push(0);
        }
        self.heap.push(Entry(Event {
            fire_at,
            seq,
            payload,
        }));
        Ok(EventHandle(seq))
    }

    /// Schedules `payload` to fire `delay` seconds from now.
    pub fn schedule_in(&mut self, delay: f64, payload: E) -> Result<EventHandle, SimError> {
        let at = SimTime::try_from_secs(self.now.as_secs() + delay).ok_or(
            SimError::ScheduleInPast {
                at: SimTime::ZERO,
                now: self.now,
            },
        )?;
        self.schedule(at, payload)
    }

    /// Returns true if the event was pending and will now never fire.
    pub fn cancel(&mut self, handle: EventHandle) -> bool {
        if handle.0 >= self.next_seq || self.is_retired(handle.0) {
            return false;
        }
        self.retire(handle.0);
        true
    }

    /// Whether `handle` refers to an event that has neither fired nor been cancelled.
    pub fn is_pending(&self, handle: EventHandle) -> bool {
        handle.0 < self.next_seq && !self.is_retired(handle.0)
    }

    #[inline]
    fn is_retired(&self, seq: u64) -> bool {
        self.retired[(seq / 64) as usize] & (1 << (seq % 64)) != 0
    }

    #[inline]
    fn retire(&mut self, seq: u64) {
        self.retired[(seq / 64) as usize] |= 1 << (seq % 64);
    }

    /// Pops the next live event with `fire_at <= t_end`, advancing the clock to it.
    pub fn next_event(&mut self, t_end: SimTime) -> Option<Event<E>> {
        while let Some(top) = self.heap.peek() {
            if top.0.fire_at > t_end {
                return None;
            }
            let Entry(ev) = self.heap.pop().expect("peeked");
            if self.is_retired(ev.seq) {
                continue;
            }
            self.retire(ev.seq);
            self.now = ev.fire_at;
            self.processed += 1;
            return Some(ev);
        }
        None
    }

    /// Delivers every live event with `fire_at <= t_end` to `handler` in order,
    /// then leaves the clock at `t_end`. Returns the number of events delivered.
    pub fn run_until<F, Err>(&mut self, t_end: SimTime, mut handler: F) -> Result<usize, Err>
    where
        F: FnMut(&mut Self, Event<E>) -> Result<(), Err>,
        Err: From<SimError>,
    {
        if t_end < self.now {
            return Err(SimError::ScheduleInPast {
                at: t_end,
                now: self.now,
            }
            .into());
        }
        let mut count = 0;
        while let Some(ev) = self.next_event(t_end) {
            handler(self, ev)?;
            count += 1;
        }
        self.now = t_end;
        Ok(count)
    }

    /// Iterates over payloads still waiting to fire, in no particular order.
    pub fn pending_payloads(&self) -> impl Iterator<Item = &E> {
        self.heap
            .iter()
            .filter(|e| !self.is_retired(e.0.seq))
            .map(|e| &e.0.payload)
    }
}
