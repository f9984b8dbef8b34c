use std::sync::Arc;

use super::{CcParams, CcState, Variant};
use crate::net::Packet;
use crate::sim::{SimError, SimTime};

/// What the retransmission timer should do after an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimerCommand {
    Keep,
    Restart,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AckOutcome {
    /// Segment to retransmit right away (fast retransmit or partial ACK).
    pub retransmit: Option<u64>,
    pub timer: TimerCommand,
    /// True when this ACK triggered a multiplicative decrease.
    pub entered_recovery: bool,
}

/// Greedy NewReno-style sender: an infinite backlog, cumulative ACKs,
/// fast retransmit on three duplicates, partial-ACK recovery, and
/// go-back-N after a timeout. The window law is delegated to [`CcState`].
#[derive(Debug, Clone)]
pub struct Sender {
    pub flow: usize,
    pub cc: CcState,
    /// Oldest unacknowledged segment.
    pub snd_una: u64,
    /// Next segment to transmit.
    pub snd_nxt: u64,
    /// One past the highest segment ever transmitted.
    pub high_water: u64,
    partial_ack_seen: bool,
    pub data_packets_sent: u64,
    pub retransmissions: u64,
    pub timeouts: u64,
    pub fast_retransmits: u64,
}

impl Sender {
    pub fn new(flow: usize, variant: Variant, params: Arc<CcParams>, now: SimTime) -> Self {
        Sender {
            flow,
            cc: CcState::new(variant, params, now),
            snd_una: 0,
            snd_nxt: 0,
            high_water: 0,
            partial_ack_seen: false,
            data_packets_sent: 0,
            retransmissions: 0,
            timeouts: 0,
            fast_retransmits: 0,
        }
    }

    /// Segments sent but not yet cumulatively acknowledged.
    #[inline]
    pub fn outstanding(&self) -> u64 {
        self.snd_nxt - self.snd_una
    }

    /// Next segment the window allows, marking it sent. Returns
    /// `(seq, is_retransmission)`.
    pub fn next_segment(&mut self) -> Option<(u64, bool)> {
        if !self.cc.permits(self.outstanding()) {
            return None;
        }
        let seq = self.snd_nxt;
        self.snd_nxt += 1;
        Some((seq, self.record_send(seq)))
    }

    /// Books a transmission of `seq`; returns whether it is a retransmission.
    pub fn record_send(&mut self, seq: u64) -> bool {
        self.data_packets_sent += 1;
        let retx = seq < self.high_water;
        if retx {
            self.retransmissions += 1;
        } else {
            self.high_water = seq + 1;
        }
        retx
    }

    pub fn on_ack(&mut self, ack: &Packet, now: SimTime) -> Result<AckOutcome, SimError> {
        let ack_no = ack.ack_no;
        if ack_no > self.high_water {
            return Err(SimError::Protocol {
                flow: self.flow,
                at: now,
                detail: format!(
                    "ACK {ack_no} covers data never sent (highest sent {})",
                    self.high_water
                ),
            });
        }
        let mut out = AckOutcome {
            retransmit: None,
            timer: TimerCommand::Keep,
            entered_recovery: false,
        };

        if ack_no > self.snd_una {
            let acked = ack_no - self.snd_una;
            self.snd_una = ack_no;
            if self.snd_nxt < self.snd_una {
                self.snd_nxt = self.snd_una;
            }
            if !ack.echo_retransmission {
                self.cc.on_rtt_sample(now.since(ack.echo_sent_at));
            }
            out.timer = if self.outstanding() > 0 {
                TimerCommand::Restart
            } else {
                TimerCommand::Stop
            };

            if self.cc.in_fast_recovery {
                if ack_no >= self.cc.high_water_seq {
                    self.cc.exit_recovery(now);
                } else {
                    self.cc.on_partial_ack(acked);
                    out.retransmit = Some(self.snd_una);
                    if self.cc.params().impatient_timer && self.partial_ack_seen && out.timer == TimerCommand::Restart {
                        out.timer = TimerCommand::Keep;
                    }
                    self.partial_ack_seen = true;
                }
            } else {
                self.cc.on_new_ack(acked, now);
            }
            return Ok(out);
        }

        if ack_no == self.snd_una && self.outstanding() > 0 {
            let dups = self.cc.on_dup_ack();
            if dups == 3 && !self.cc.in_fast_recovery && self.snd_una >= self.cc.high_water_seq {
                self.cc.on_triple_dup_ack(now, self.high_water);
                self.partial_ack_seen = false;
                self.fast_retransmits += 1;
                out.retransmit = Some(self.snd_una);
                out.entered_recovery = true;
            }
        }
        Ok(out)
    }

    /// Timer expiry: collapse the window and resend from the oldest hole.
    pub fn on_rto(&mut self, now: SimTime) {
        self.timeouts += 1;
        self.cc.on_rto(now, self.high_water);
        self.snd_nxt = self.snd_una;
        self.partial_ack_seen = false;
    }

    /// Current retransmission timeout in seconds.
    pub fn rto(&self) -> f64 {
        self.cc.rto
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::Source;

    fn sender(v: Variant) -> Sender {
        Sender::new(0, v, Arc::new(CcParams::default()), SimTime::ZERO)
    }

    fn ack(no: u64, at: f64) -> Packet {
        let data = Packet::data(0, Source::Flow(0), 0, SimTime::from_secs(at - 0.2), false);
        Packet::ack_for(0, &data, no, SimTime::from_secs(at))
    }

    fn fill(s: &mut Sender) -> Vec<u64> {
        let mut v = Vec::new();
        while let Some((seq, _)) = s.next_segment() {
            v.push(seq);
        }
        v
    }

    #[test]
    fn initial_window_then_slow_start() {
        let mut s = sender(Variant::NewReno);
        assert_eq!(fill(&mut s), vec![0, 1]);
        let out = s.on_ack(&ack(1, 0.2), SimTime::from_secs(0.2)).unwrap();
        assert_eq!(out.timer, TimerCommand::Restart);
        assert_eq!(s.cc.cwnd, 3.0);
        assert_eq!(fill(&mut s), vec![2, 3]);
    }

    #[test]
    fn ack_beyond_sent_is_a_fault() {
        let mut s = sender(Variant::NewReno);
        fill(&mut s);
        assert!(s.on_ack(&ack(5, 0.2), SimTime::from_secs(0.2)).is_err());
    }

    #[test]
    fn triple_dup_triggers_fast_retransmit_once() {
        let mut s = sender(Variant::NewReno);
        s.cc.cwnd = 20.0;
        s.cc.ssthresh = 10.0;
        let sent = fill(&mut s);
        assert_eq!(sent.len(), 20);
        let t = SimTime::from_secs(1.0);
        for i in 0..2 {
            let o = s.on_ack(&ack(0, 1.0), t).unwrap();
            assert_eq!(o.retransmit, None, "dup {i}");
        }
        let o = s.on_ack(&ack(0, 1.0), t).unwrap();
        assert_eq!(o.retransmit, Some(0));
        assert!(o.entered_recovery);
        assert_eq!(s.cc.cwnd, 10.0);
        assert!(s.record_send(0));
        assert_eq!(s.retransmissions, 1);
        // Further duplicates inflate but never re-enter recovery.
        for _ in 0..10 {
            let o = s.on_ack(&ack(0, 1.0), t).unwrap();
            assert!(!o.entered_recovery);
        }
        assert_eq!(s.cc.send_window(), 23.0);
        // 20 outstanding < 23: three new segments may go out.
        assert_eq!(fill(&mut s), vec![20, 21, 22]);
    }

    #[test]
    fn partial_then_full_ack() {
        let mut s = sender(Variant::NewReno);
        s.cc.cwnd = 10.0;
        s.cc.ssthresh = 5.0;
        fill(&mut s);
        let t = SimTime::from_secs(1.0);
        for _ in 0..3 {
            s.on_ack(&ack(0, 1.0), t).unwrap();
        }
        assert!(s.cc.in_fast_recovery);
        let o = s.on_ack(&ack(4, 1.2), SimTime::from_secs(1.2)).unwrap();
        assert_eq!(o.retransmit, Some(4));
        assert!(s.cc.in_fast_recovery);
        let o = s.on_ack(&ack(10, 1.4), SimTime::from_secs(1.4)).unwrap();
        assert_eq!(o.retransmit, None);
        assert!(!s.cc.in_fast_recovery);
        assert_eq!(s.cc.cwnd, 5.0);
        assert_eq!(o.timer, TimerCommand::Stop);
    }

    #[test]
    fn timeout_goes_back_to_oldest_hole() {
        let mut s = sender(Variant::NewReno);
        s.cc.cwnd = 8.0;
        fill(&mut s);
        s.on_ack(&ack(3, 0.3), SimTime::from_secs(0.3)).unwrap();
        s.on_rto(SimTime::from_secs(2.0));
        assert_eq!(s.snd_nxt, 3);
        assert_eq!(s.cc.cwnd, 1.0);
        let (seq, retx) = s.next_segment().unwrap();
        assert_eq!((seq, retx), (3, true));
        assert!(s.next_segment().is_none());
        // Duplicates below the recovery point after a timeout do not
        // trigger another fast retransmit.
        for _ in 0..3 {
            let o = s.on_ack(&ack(3, 2.1), SimTime::from_secs(2.1)).unwrap();
            assert!(!o.entered_recovery);
        }
    }

    #[test]
    fn retransmitted_segments_give_no_rtt_sample() {
        let mut s = sender(Variant::NewReno);
        fill(&mut s);
        let data = Packet::data(0, Source::Flow(0), 0, SimTime::ZERO, true);
        let a = Packet::ack_for(0, &data, 1, SimTime::from_secs(5.0));
        s.on_ack(&a, SimTime::from_secs(5.0)).unwrap();
        assert_eq!(s.cc.srtt, None);
    }
}
