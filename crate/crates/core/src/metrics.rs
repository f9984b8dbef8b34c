//! Run statistics: utilization, loss ratio, Jain's fairness index and the
//! Mathis throughput estimate.

use crate::sim::SimTime;
use crate::DomainError;

/// Counters for one TCP flow over a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FlowStats {
    pub flow_id: usize,
    /// Every data transmission, retransmissions included.
    pub data_packets_sent: u64,
    pub retransmissions: u64,
    /// Data packets dropped in the network (RED, overflow or injected).
    pub drops_observed: u64,
    /// Data packets that reached the receiver, duplicates included.
    pub packets_arrived: u64,
    /// Unique in-order bytes delivered to the receiving application.
    pub bytes_delivered: u64,
    pub timeouts: u64,
    pub fast_retransmits: u64,
    pub goodput_series: Vec<(SimTime, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FairnessReport {
    pub throughputs: Vec<f64>,
    pub n: usize,
    pub jfi: f64,
}

impl FairnessReport {
    pub fn from_throughputs(throughputs: Vec<f64>) -> Result<Self, DomainError> {
        let jfi = jfi(&throughputs)?;
        Ok(FairnessReport {
            n: throughputs.len(),
            throughputs,
            jfi,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathisInputs {
    pub mss_bytes: f64,
    pub rtt_s: f64,
    pub loss_probability: f64,
    pub coefficient: f64,
}

impl MathisInputs {
    pub fn new(mss_bytes: f64, rtt_s: f64, loss_probability: f64) -> Self {
        MathisInputs {
            mss_bytes,
            rtt_s,
            loss_probability,
            coefficient: (1.5f64).sqrt(),
        }
    }
}

/// Fraction of `capacity_bps * interval_s` carried by `delivered_bits`.
pub fn utilization(delivered_bits: f64, capacity_bps: f64, interval_s: f64) -> f64 {
    if !(capacity_bps > 0.0 && interval_s > 0.0) {
        return 0.0;
    }
    (delivered_bits / (capacity_bps * interval_s)).clamp(0.0, 1.0)
}

/// Retransmissions per data packet sent; zero when nothing was sent.
pub fn loss_ratio(stats: &FlowStats) -> f64 {
    ratio(stats.retransmissions, stats.data_packets_sent)
}

/// Pooled loss ratio: summed retransmissions over summed transmissions.
pub fn aggregate_loss_ratio<'a>(flows: impl IntoIterator<Item = &'a FlowStats>) -> f64 {
    let (retx, sent) = flows
        .into_iter()
        .fold((0, 0), |(r, s), f| (r + f.retransmissions, s + f.data_packets_sent));
    ratio(retx, sent)
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        (num as f64 / den as f64).clamp(0.0, 1.0)
    }
}

/// Jain's fairness index, `(sum x)^2 / (n * sum x^2)`.
pub fn jfi(throughputs: &[f64]) -> Result<f64, DomainError> {
    if throughputs.is_empty() {
        return Err(DomainError::new("jfi", "no throughputs given"));
    }
    if throughputs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(DomainError::new("jfi", "throughputs must be finite and non-negative"));
    }
    let sum: f64 = throughputs.iter().sum();
    let sum_sq: f64 = throughputs.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Err(DomainError::new("jfi", "all throughputs are zero"));
    }
    let n = throughputs.len() as f64;
    Ok((sum * sum / (n * sum_sq)).clamp(1.0 / n, 1.0))
}

/// Steady-state TCP throughput estimate in bits/s: `C * MSS / (RTT * sqrt(p))`.
pub fn mathis_estimate(inputs: &MathisInputs) -> Result<f64, DomainError> {
    let MathisInputs {
        mss_bytes,
        rtt_s,
        loss_probability: p,
        coefficient,
    } = *inputs;
    if !(p > 0.0 && p < 1.0) {
        return Err(DomainError::new("mathis_estimate", format!("loss probability {p} outside (0, 1)")));
    }
    if !(rtt_s > 0.0 && mss_bytes > 0.0) {
        return Err(DomainError::new("mathis_estimate", "rtt and mss must be positive"));
    }
    Ok(coefficient * mss_bytes * 8.0 / (rtt_s * p.sqrt()))
}

/// One sample-tick row for a flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesPoint {
    pub t: SimTime,
    pub flow_id: usize,
    pub goodput_bps: f64,
    pub cwnd: f64,
    pub queue_len: usize,
    pub queue_avg: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn utilization_cases() {
        assert_eq!(utilization(1e9, 10e6, 100.0), 1.0);
        assert_eq!(utilization(0.0, 10e6, 100.0), 0.0);
        assert_eq!(utilization(5e8, 10e6, 100.0), 0.5);
        assert_eq!(utilization(2e9, 10e6, 100.0), 1.0);
    }

    #[test]
    fn loss_ratio_cases() {
        let mut s = FlowStats {
            data_packets_sent: 100,
            ..FlowStats::default()
        };
        assert_eq!(loss_ratio(&s), 0.0);
        s.retransmissions = 13;
        assert!((loss_ratio(&s) - 0.13).abs() < 1e-12);
        s.retransmissions = 16;
        assert!((loss_ratio(&s) - 0.16).abs() < 1e-12);
        assert_eq!(loss_ratio(&FlowStats::default()), 0.0);

        let a = FlowStats { data_packets_sent: 100, retransmissions: 10, ..FlowStats::default() };
        let b = FlowStats { data_packets_sent: 300, retransmissions: 10, ..FlowStats::default() };
        assert!((aggregate_loss_ratio([&a, &b]) - 0.05).abs() < 1e-12);
    }

    #[test]
    fn jfi_cases() {
        assert!((jfi(&[5.0, 5.0, 5.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((jfi(&[7.0, 0.0, 0.0]).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!(jfi(&[0.0, 0.0]).is_err());
        assert!(jfi(&[]).is_err());
    }

    #[test]
    fn mathis_closed_form() {
        let est = mathis_estimate(&MathisInputs::new(1000.0, 0.1, 1e-4)).unwrap();
        assert!((est - 1.5f64.sqrt() * 8000.0 / 0.001).abs() < 1e-6);
        assert!((est / 1e6 - 9.798).abs() < 1e-3);
        assert!(mathis_estimate(&MathisInputs::new(1000.0, 0.1, 0.0)).is_err());
    }
}
