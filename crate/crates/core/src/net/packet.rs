use crate::sim::SimTime;

/// Data segment size in bytes (one MSS).
pub const DATA_PACKET_BYTES: u32 = 1000;
/// Pure acknowledgment size in bytes.
pub const ACK_PACKET_BYTES: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Source {
    /// A TCP flow of the measured session, by flow id.
    Flow(usize),
    /// An unresponsive background generator, by generator index.
    Background(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Data,
    Ack,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Packet {
    pub id: u64,
    pub source: Source,
    pub kind: PacketKind,
    pub size: u32,
    /// Segment number in MSS units (data packets).
    pub seq_no: u64,
    /// Cumulative acknowledgment: next segment expected (ACKs).
    pub ack_no: u64,
    pub sent_at: SimTime,
    pub is_retransmission: bool,
    /// For ACKs, the `sent_at` of the data segment that triggered it.
    pub echo_sent_at: SimTime,
    /// For ACKs, whether the triggering segment was a retransmission.
    pub echo_retransmission: bool,
}

impl Packet {
    pub fn data(id: u64, source: Source, seq_no: u64, sent_at: SimTime, retx: bool) -> Packet {
        Packet {
            id,
            source,
            kind: PacketKind::Data,
            size: DATA_PACKET_BYTES,
            seq_no,
            ack_no: 0,
            sent_at,
            is_retransmission: retx,
            echo_sent_at: SimTime::ZERO,
            echo_retransmission: false,
        }
    }

    pub fn ack_for(id: u64, data: &Packet, ack_no: u64, now: SimTime) -> Packet {
        Packet {
            id,
            source: data.source,
            kind: PacketKind::Ack,
            size: ACK_PACKET_BYTES,
            seq_no: 0,
            ack_no,
            sent_at: now,
            is_retransmission: false,
            echo_sent_at: data.sent_at,
            echo_retransmission: data.is_retransmission,
        }
    }

    pub fn flow_id(&self) -> Option<usize> {
        match self.source {
            Source::Flow(f) => Some(f),
            Source::Background(_) => None,
        }
    }

    pub fn bits(&self) -> f64 {
        self.size as f64 * 8.0
    }
}
