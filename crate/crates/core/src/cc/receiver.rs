use std::collections::BTreeSet;

/// Cumulative-ACK receiver that buffers out-of-order segments and ACKs
/// every arrival (no delayed ACK).
#[derive(Debug, Clone, Default)]
pub struct Receiver {
    rcv_nxt: u64,
    out_of_order: BTreeSet<u64>,
    pub arrivals: u64,
    pub duplicates: u64,
}

impl Receiver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Next in-order segment expected; equals the count of unique segments
    /// delivered to the application.
    pub fn rcv_nxt(&self) -> u64 {
        self.rcv_nxt
    }

    /// Accepts segment `seq`; returns the cumulative ACK to send.
    pub fn on_data(&mut self, seq: u64) -> u64 {
        self.arrivals += 1;
        if seq == self.rcv_nxt {
            self.rcv_nxt += 1;
            while self.out_of_order.remove(&self.rcv_nxt) {
                self.rcv_nxt += 1;
            }
        } else if seq > self.rcv_nxt {
            if !self.out_of_order.insert(seq) {
                self.duplicates += 1;
            }
        } else {
            self.duplicates += 1;
        }
        self.rcv_nxt
    }
}
