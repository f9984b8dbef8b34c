use super::{Packet, RedParams, RedQueue};
use crate::sim::SimTime;

/// A lossless point-to-point FIFO link with unbounded buffering.
///
/// Transmission is computed in closed form: the packet starts when the link
/// frees up, occupies it for `size * 8 / capacity`, then propagates.
#[derive(Debug, Clone)]
pub struct FifoLink {
    pub capacity_bps: f64,
    pub prop_delay: f64,
    busy_until: SimTime,
}

impl FifoLink {
    pub fn new(capacity_bps: f64, prop_delay: f64) -> Self {
        FifoLink {
            capacity_bps,
            prop_delay,
            busy_until: SimTime::ZERO,
        }
    }

    #[inline]
    pub fn serialization(&self, size_bytes: u32) -> f64 {
        size_bytes as f64 * 8.0 / self.capacity_bps
    }

    /// Enqueues a packet handed to the link at `at`; returns its arrival time
    /// at the far end.
    pub fn transmit(&mut self, at: SimTime, size_bytes: u32) -> SimTime {
        let start = at.max(self.busy_until);
        self.busy_until = start + self.serialization(size_bytes);
        self.busy_until + self.prop_delay
    }

    pub fn busy_until(&self) -> SimTime {
        self.busy_until
    }
}

/// A forward bottleneck link between the two routers with a RED queue.
#[derive(Debug, Clone)]
pub struct BottleneckLink {
    pub id: usize,
    pub capacity_bps: f64,
    pub prop_delay: f64,
    /// Router hops on this route, for route selection.
    pub hops: u32,
    /// Administrative cost, for route selection.
    pub cost: f64,
    pub queue: RedQueue,
    /// Packet currently being serialized, if any.
    pub in_service: Option<Packet>,
    busy_time: f64,
    bits_sent: f64,
}

impl BottleneckLink {
    pub fn new(id: usize, capacity_bps: f64, prop_delay: f64, red: RedParams) -> Self {
        let service = super::DATA_PACKET_BYTES as f64 * 8.0 / capacity_bps;
        BottleneckLink {
            id,
            capacity_bps,
            prop_delay,
            hops: 1,
            cost: 1.0,
            queue: RedQueue::new(red, service),
            in_service: None,
            busy_time: 0.0,
            bits_sent: 0.0,
        }
    }

    #[inline]
    pub fn serialization(&self, size_bytes: u32) -> f64 {
        size_bytes as f64 * 8.0 / self.capacity_bps
    }

    pub fn is_busy(&self) -> bool {
        self.in_service.is_some()
    }

    /// Puts `packet` on the wire; returns the serialization time.
    pub fn begin_service(&mut self, packet: Packet) -> f64 {
        debug_assert!(self.in_service.is_none());
        let ser = self.serialization(packet.size);
        self.busy_time += ser;
        self.bits_sent += packet.bits();
        self.in_service = Some(packet);
        ser
    }

    pub fn finish_service(&mut self) -> Option<Packet> {
        self.in_service.take()
    }

    pub fn bits_sent(&self) -> f64 {
        self.bits_sent
    }

    /// Fraction of elapsed time the link has spent transmitting.
    pub fn utilization(&self, now: SimTime) -> f64 {
        if now.as_secs() <= 0.0 {
            0.0
        } else {
            (self.busy_time / now.as_secs()).min(1.0)
        }
    }

    /// Packets held by the link: queued plus in service.
    pub fn backlog(&self) -> usize {
        self.queue.occupancy() + usize::from(self.in_service.is_some())
    }
}
