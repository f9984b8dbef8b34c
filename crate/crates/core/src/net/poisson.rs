use super::HostId;
use crate::sim::RandomStream;

/// Unresponsive background traffic with exponential inter-arrival gaps.
#[derive(Debug, Clone)]
pub struct PoissonSource {
    /// Packets per second; zero disables the source.
    pub rate: f64,
    pub destination: HostId,
    pub packet_size: u32,
    stream: RandomStream,
}

impl PoissonSource {
    pub fn new(rate: f64, destination: HostId, packet_size: u32, stream: RandomStream) -> Self {
        PoissonSource {
            rate,
            destination,
            packet_size,
            stream,
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.rate > 0.0
    }

    /// Seconds until the next arrival, or `None` if the source is disabled.
    pub fn next_gap(&mut self) -> Option<f64> {
        if !self.is_enabled() {
            return None;
        }
        let u = self.stream.uniform_open_closed();
        Some(-u.ln() / self.rate)
    }
}
