use std::sync::Arc;

use super::{CcParams, CubicState, HtcpState, Variant};
use crate::sim::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

/// Per-variant extension of the common state.
#[derive(Debug, Clone, PartialEq)]
pub enum VariantState {
    NewReno,
    Scalable,
    Hstcp,
    Htcp(HtcpState),
    Cubic(CubicState),
}

/// Congestion state of one flow. Windows are in MSS, times in seconds.
///
/// `cwnd` is kept as a real number; the sender may have at most
/// `floor(send_window())` segments outstanding.
#[derive(Debug, Clone)]
pub struct CcState {
    pub variant: Variant,
    pub cwnd: f64,
    pub ssthresh: f64,
    pub srtt: Option<f64>,
    pub rttvar: f64,
    pub rto: f64,
    pub dup_ack_count: u32,
    pub in_fast_recovery: bool,
    /// Highest segment (exclusive) outstanding when the last recovery began.
    pub high_water_seq: u64,
    /// Window just before the most recent loss reaction.
    pub w_last_loss: f64,
    pub t_last_loss: SimTime,
    pub phase: Phase,
    /// Fast-recovery window inflation from duplicate ACKs.
    pub inflation: f64,
    pub law: VariantState,
    params: Arc<CcParams>,
}

impl CcState {
    pub fn new(variant: Variant, params: Arc<CcParams>, now: SimTime) -> Self {
        let law = match variant {
            Variant::NewReno => VariantState::NewReno,
            Variant::Scalable => VariantState::Scalable,
            Variant::Hstcp => VariantState::Hstcp,
            Variant::Htcp => VariantState::Htcp(HtcpState::new(&params.htcp)),
            Variant::Cubic => VariantState::Cubic(CubicState::default()),
        };
        CcState {
            variant,
            cwnd: params.initial_cwnd,
            ssthresh: f64::INFINITY,
            srtt: None,
            rttvar: 0.0,
            rto: params.initial_rto_s,
            dup_ack_count: 0,
            in_fast_recovery: false,
            high_water_seq: 0,
            w_last_loss: 0.0,
            t_last_loss: now,
            phase: Phase::SlowStart,
            inflation: 0.0,
            law,
            params,
        }
    }

    pub fn params(&self) -> &CcParams {
        &self.params
    }

    /// The congestion window proper.
    #[inline]
    pub fn window(&self) -> f64 {
        self.cwnd
    }

    /// Window used for transmission permission, including recovery inflation.
    #[inline]
    pub fn send_window(&self) -> f64 {
        self.cwnd + self.inflation
    }

    /// Whether one more segment may be sent with `in_flight` outstanding.
    #[inline]
    pub fn permits(&self, in_flight: u64) -> bool {
        (in_flight as f64) < self.send_window().floor()
    }

    /// Standard smoothed estimators (RFC 6298) plus variant RTT bookkeeping.
    pub fn on_rtt_sample(&mut self, rtt: f64) {
        match self.srtt {
            None => {
                self.srtt = Some(rtt);
                self.rttvar = rtt / 2.0;
            }
            Some(srtt) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (srtt - rtt).abs();
                self.srtt = Some(0.875 * srtt + 0.125 * rtt);
            }
        }
        let srtt = self.srtt.expect("set above");
        self.rto = (srtt + 4.0 * self.rttvar).clamp(self.params.rto_min_s, self.params.rto_max_s);
        if let VariantState::Htcp(h) = &mut self.law {
            h.on_rtt(rtt);
        }
    }

    fn cap(&mut self) {
        if let Some(m) = self.params.max_cwnd {
            self.cwnd = self.cwnd.min(m);
        }
        self.cwnd = self.cwnd.max(1.0);
    }

    /// Window growth for `acked` newly acknowledged segments outside recovery.
    pub fn on_new_ack(&mut self, acked: u64, now: SimTime) {
        self.dup_ack_count = 0;
        if self.in_fast_recovery {
            return;
        }
        let mut remaining = acked;
        if self.cwnd < self.ssthresh {
            // Byte counting limited to two segments per ACK in slow start.
            let room = self.ssthresh - self.cwnd;
            let segs = (remaining.min(2) as f64).min(room.max(0.0).ceil());
            let step = match self.params.max_ssthresh {
                Some(m) if self.cwnd > m => segs / (self.cwnd / (0.5 * m)).floor(),
                _ => segs,
            };
            self.cwnd += step;
            remaining = remaining.saturating_sub(segs as u64);
            if self.cwnd < self.ssthresh {
                self.phase = Phase::SlowStart;
                self.cap();
                return;
            }
        }
        self.phase = Phase::CongestionAvoidance;
        for _ in 0..remaining {
            let inc = self.ca_increment(now);
            self.cwnd += inc;
        }
        self.cap();
    }

    /// Per-ACK congestion-avoidance increment of the active law.
    pub fn ca_increment(&mut self, now: SimTime) -> f64 {
        let cwnd = self.cwnd;
        let p = &self.params;
        match &mut self.law {
            VariantState::NewReno => 1.0 / cwnd,
            VariantState::Scalable => {
                if cwnd > p.scalable.legacy_window {
                    p.scalable.a
                } else {
                    1.0 / cwnd
                }
            }
            VariantState::Hstcp => {
                let (a, _) = p.hstcp.ab(cwnd.max(1.0)).expect("cwnd >= 1");
                a / cwnd
            }
            VariantState::Htcp(h) => {
                let delta = now.since(self.t_last_loss.max(h.recovered_at));
                h.increment(&p.htcp, cwnd, delta)
            }
            VariantState::Cubic(c) => c.increment(&p.cubic, now, cwnd),
        }
    }

    /// Counts a duplicate ACK; returns the running count.
    pub fn on_dup_ack(&mut self) -> u32 {
        self.dup_ack_count += 1;
        if self.in_fast_recovery {
            self.inflation += 1.0;
        }
        self.dup_ack_count
    }

    /// Multiplicative decrease of the active law, applied to `cwnd`.
    pub fn decreased_window(&mut self, now: SimTime) -> f64 {
        let w = self.cwnd;
        let p = &self.params;
        match &mut self.law {
            VariantState::NewReno => w / 2.0,
            VariantState::Scalable => w * (1.0 - p.scalable.b),
            VariantState::Hstcp => {
                let (_, b) = p.hstcp.ab(w.max(1.0)).expect("cwnd >= 1");
                (1.0 - b) * w
            }
            VariantState::Htcp(h) => h.on_congestion(&p.htcp) * w,
            VariantState::Cubic(c) => c.on_loss(&p.cubic, now, w),
        }
    }

    /// Fast retransmit and entry into fast recovery on the third duplicate ACK.
    /// `outstanding_end` is one past the highest segment sent so far.
    pub fn on_triple_dup_ack(&mut self, now: SimTime, outstanding_end: u64) {
        let before = self.cwnd;
        self.w_last_loss = before;
        let after = self.decreased_window(now).max(1.0);
        self.t_last_loss = now;
        self.ssthresh = after.max(2.0);
        self.cwnd = after;
        self.inflation = 3.0;
        self.in_fast_recovery = true;
        self.high_water_seq = outstanding_end;
        self.phase = Phase::FastRecovery;
    }

    /// Partial ACK during recovery: deflate by the amount acknowledged, then
    /// allow one more segment for the retransmission.
    pub fn on_partial_ack(&mut self, acked: u64) {
        self.dup_ack_count = 0;
        self.inflation = (self.inflation - acked as f64 + 1.0).max(0.0);
    }

    pub fn exit_recovery(&mut self, now: SimTime) {
        if let VariantState::Htcp(h) = &mut self.law {
            h.recovered_at = now;
        }
        self.in_fast_recovery = false;
        self.inflation = 0.0;
        self.dup_ack_count = 0;
        self.phase = if self.cwnd < self.ssthresh {
            Phase::SlowStart
        } else {
            Phase::CongestionAvoidance
        };
    }

    /// Retransmission timeout: collapse to one segment and back off the timer.
    pub fn on_rto(&mut self, now: SimTime, outstanding_end: u64) {
        let before = self.cwnd;
        self.w_last_loss = before;
        self.t_last_loss = now;
        self.ssthresh = (before / 2.0).max(2.0);
        self.cwnd = 1.0;
        self.inflation = 0.0;
        self.in_fast_recovery = false;
        self.dup_ack_count = 0;
        self.high_water_seq = outstanding_end;
        self.phase = Phase::SlowStart;
        self.rto = (self.rto * 2.0).min(self.params.rto_max_s);
        match &mut self.law {
            VariantState::Cubic(c) => c.on_timeout(before),
            VariantState::Htcp(h) => {
                h.on_congestion(&self.params.htcp);
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(v: Variant) -> CcState {
        CcState::new(v, Arc::new(CcParams::default()), SimTime::ZERO)
    }

    fn in_ca(v: Variant, cwnd: f64) -> CcState {
        let mut s = state(v);
        s.cwnd = cwnd;
        s.ssthresh = 1.0;
        s.phase = Phase::CongestionAvoidance;
        s
    }

    #[test]
    fn fresh_flow_window() {
        let s = state(Variant::NewReno);
        assert_eq!(s.window(), 2.0);
        assert_eq!(s.phase, Phase::SlowStart);
    }

    #[test]
    fn floor_semantics_for_permission() {
        let mut s = state(Variant::NewReno);
        s.cwnd = 10.6;
        assert!(s.permits(9));
        assert!(!s.permits(10));
    }

    #[test]
    fn newreno_additive_increase() {
        let mut s = in_ca(Variant::NewReno, 10.0);
        s.on_new_ack(1, SimTime::ZERO);
        assert!((s.cwnd - 10.1).abs() < 1e-12);
    }

    #[test]
    fn slow_start_adds_one_per_ack() {
        let mut s = state(Variant::NewReno);
        s.on_new_ack(1, SimTime::ZERO);
        assert_eq!(s.cwnd, 3.0);
    }

    #[test]
    fn scalable_increase_above_and_below_legacy() {
        let mut s = in_ca(Variant::Scalable, 100.0);
        s.on_new_ack(1, SimTime::ZERO);
        assert!((s.cwnd - 100.01).abs() < 1e-12);

        let mut s = in_ca(Variant::Scalable, 10.0);
        s.on_new_ack(1, SimTime::ZERO);
        assert!((s.cwnd - 10.1).abs() < 1e-12);
    }

    #[test]
    fn htcp_increase_uses_time_since_loss() {
        let mut s = in_ca(Variant::Htcp, 50.0);
        s.t_last_loss = SimTime::ZERO;
        let inc = s.ca_increment(SimTime::from_secs(2.0));
        // beta starts at 0.5: 2 * 0.5 * 11.25 / 50
        assert!((inc - 11.25 / 50.0).abs() < 1e-12);
    }

    #[test]
    fn hstcp_matches_newreno_at_small_windows() {
        for w in [2.0, 10.0, 25.0, 37.5] {
            let mut a = in_ca(Variant::Hstcp, w);
            let mut b = in_ca(Variant::NewReno, w);
            for _ in 0..5 {
                a.on_new_ack(1, SimTime::ZERO);
                b.on_new_ack(1, SimTime::ZERO);
            }
            assert!((a.cwnd - b.cwnd).abs() < 1e-12);
        }
    }

    #[test]
    fn newreno_halves_on_triple_dup() {
        let mut s = in_ca(Variant::NewReno, 20.0);
        s.on_triple_dup_ack(SimTime::from_secs(1.0), 40);
        assert_eq!(s.ssthresh, 10.0);
        assert_eq!(s.cwnd, 10.0);
        assert_eq!(s.w_last_loss, 20.0);
        assert!(s.in_fast_recovery);
        assert_eq!(s.send_window(), 13.0);
    }

    #[test]
    fn scalable_and_cubic_decrease() {
        let mut s = in_ca(Variant::Scalable, 100.0);
        s.on_triple_dup_ack(SimTime::ZERO, 100);
        assert!((s.cwnd - 87.5).abs() < 1e-12);

        let mut c = in_ca(Variant::Cubic, 100.0);
        c.on_triple_dup_ack(SimTime::ZERO, 100);
        assert!((c.cwnd - 80.0).abs() < 1e-12);
        match &c.law {
            VariantState::Cubic(st) => {
                assert_eq!(st.w_max, 100.0);
                assert!((st.k - 50f64.cbrt()).abs() < 1e-12);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn rto_collapses_and_backs_off() {
        let mut s = in_ca(Variant::NewReno, 40.0);
        s.rto = 1.0;
        s.on_rto(SimTime::ZERO, 40);
        assert_eq!(s.cwnd, 1.0);
        assert_eq!(s.ssthresh, 20.0);
        assert_eq!(s.rto, 2.0);
        s.on_rto(SimTime::ZERO, 40);
        assert_eq!(s.rto, 4.0);
        for _ in 0..10 {
            s.on_rto(SimTime::ZERO, 40);
        }
        assert_eq!(s.rto, 60.0);
    }

    #[test]
    fn rto_abandons_recovery() {
        let mut s = in_ca(Variant::Cubic, 30.0);
        s.on_triple_dup_ack(SimTime::ZERO, 30);
        s.on_rto(SimTime::from_secs(1.0), 30);
        assert!(!s.in_fast_recovery);
        assert_eq!(s.phase, Phase::SlowStart);
        assert_eq!(s.inflation, 0.0);
    }

    #[test]
    fn rtt_estimator() {
        let mut s = state(Variant::NewReno);
        s.on_rtt_sample(0.2);
        assert_eq!(s.srtt, Some(0.2));
        assert!((s.rttvar - 0.1).abs() < 1e-15);
        // 0.2 + 4 * 0.1 = 0.6 -> clamped to rto_min
        assert_eq!(s.rto, 1.0);
        s.on_rtt_sample(1.0);
        let srtt = 0.875 * 0.2 + 0.125 * 1.0;
        let var = 0.75 * 0.1 + 0.25 * 0.8;
        assert!((s.srtt.unwrap() - srtt).abs() < 1e-12);
        assert!((s.rto - (srtt + 4.0 * var)).abs() < 1e-12);
    }

    #[test]
    fn max_cwnd_caps_growth() {
        let params = CcParams {
            max_cwnd: Some(5.0),
            ..CcParams::default()
        };
        let mut s = CcState::new(Variant::NewReno, Arc::new(params), SimTime::ZERO);
        for _ in 0..10 {
            s.on_new_ack(1, SimTime::ZERO);
        }
        assert_eq!(s.cwnd, 5.0);
    }
}
