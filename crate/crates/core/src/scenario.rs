//! One simulated run: a parallel session of TCP flows plus Poisson
//! background traffic over the dumbbell, observed on a fixed sampling grid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cc::{CcParams, Receiver, Sender, TimerCommand, Variant};
use crate::metrics::{self, FlowStats, SeriesPoint};
use crate::net::{
    build_dumbbell, route_assign, LinkConfig, Packet, PacketKind, PoissonSource, RedParams,
    RedVerdict, RoutePolicy, Source, Topology, DATA_PACKET_BYTES,
};
use crate::parallel::{AcwSample, ParallelSession};
use crate::sim::{streams, Engine, Event, EventHandle, RandomStream, SimError, SimTime};
use crate::{ConfigError, DomainError};

/// A single injected drop: the first data packet of `flow` reaching the
/// bottleneck router at or after `at_s` is discarded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedLoss {
    pub flow: usize,
    pub at_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub variant: Variant,
    pub flows: usize,
    pub duration_s: f64,
    /// Start of the measurement window for utilization, fairness and ACW.
    pub warmup_s: f64,
    pub sample_interval_s: f64,
    /// Gap between flow establishments; `None` uses one base RTT.
    pub stagger_s: Option<f64>,
    pub link: LinkConfig,
    pub red: RedParams,
    pub cc: CcParams,
    pub route: RoutePolicy,
    /// Aggregate background rate in packets/s; 0 disables it.
    pub background_pps: f64,
    pub background_sources: usize,
    pub background_packet_bytes: u32,
    pub forced_losses: Vec<ForcedLoss>,
    /// Independent per-packet drop probability applied to every flow's data
    /// at the bottleneck router.
    pub uniform_loss: f64,
    /// Record every cwnd change, not just the sampled values.
    pub trace_cwnd: bool,
    /// Keep per-tick series (needed for CSV output).
    pub record_series: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            variant: Variant::NewReno,
            flows: 1,
            duration_s: 1000.0,
            warmup_s: 100.0,
            sample_interval_s: 1.0,
            stagger_s: None,
            link: LinkConfig::default(),
            red: RedParams::default(),
            cc: CcParams::default(),
            route: RoutePolicy::default(),
            background_pps: 125.0,
            background_sources: 1,
            background_packet_bytes: DATA_PACKET_BYTES,
            forced_losses: Vec::new(),
            uniform_loss: 0.0,
            trace_cwnd: false,
            record_series: true,
        }
    }
}

impl ScenarioConfig {
    pub fn stagger(&self) -> f64 {
        self.stagger_s.unwrap_or_else(|| self.link.base_rtt())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::invalid(key, format!("must be positive, got {v}")))
            }
        };
        positive("duration_s", self.duration_s)?;
        positive("sample_interval_s", self.sample_interval_s)?;
        if !(self.warmup_s.is_finite() && self.warmup_s >= 0.0 && self.warmup_s < self.duration_s) {
            return Err(ConfigError::invalid("warmup_s", "must lie in [0, duration_s)"));
        }
        if !(self.background_pps.is_finite() && self.background_pps >= 0.0) {
            return Err(ConfigError::invalid("background_pps", "must be non-negative"));
        }
        if self.background_pps > 0.0 && self.background_sources == 0 {
            return Err(ConfigError::invalid("background_sources", "must be at least 1"));
        }
        if self.background_packet_bytes == 0 {
            return Err(ConfigError::invalid("background_packet_bytes", "must be positive"));
        }
        if !(0.0..1.0).contains(&self.uniform_loss) {
            return Err(ConfigError::invalid("uniform_loss", "must lie in [0, 1)"));
        }
        let stagger = self.stagger();
        if !(stagger.is_finite() && stagger >= 0.0) {
            return Err(ConfigError::invalid("stagger_s", "must be non-negative"));
        }
        for f in &self.forced_losses {
            if f.flow >= self.flows || !(f.at_s >= 0.0) {
                return Err(ConfigError::invalid(
                    "forced_losses",
                    format!("flow {} at {} s is outside the scenario", f.flow, f.at_s),
                ));
            }
        }
        self.link.validate()?;
        self.red.validate().map_err(|m| ConfigError::invalid("red", m))?;
        self.route.validate().map_err(|m| ConfigError::invalid("route", m))?;
        self.cc.validate().map_err(|(k, m)| ConfigError::invalid(k, m))?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metric(#[from] DomainError),
    #[error("conservation violated for flow {flow} at {at}: sent {sent} != delivered {delivered} + dropped {dropped} + in flight {in_flight}")]
    Conservation {
        flow: usize,
        at: SimTime,
        sent: u64,
        delivered: u64,
        dropped: u64,
        in_flight: u64,
    },
}

/// What happens next in the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Payload {
    FlowStart(usize),
    /// Packet reaches the bottleneck router R1.
    PacketArrival(Packet),
    /// Bottleneck link finishes serializing its current packet.
    PacketDeparture(usize),
    /// Data packet reaches its receiving host.
    Delivery(Packet),
    AckArrival(Packet),
    RtoExpiry(usize),
    SampleTick,
    BackgroundArrival(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LossKind {
    FastRetransmit,
    Timeout,
}

/// A window reduction, with the aggregate window around it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossEvent {
    pub t: SimTime,
    pub flow: usize,
    pub kind: LossKind,
    pub cwnd_before: f64,
    pub cwnd_after: f64,
    pub acw_before: f64,
    pub acw_after: f64,
}

/// A drop made by a [`ForcedLoss`], with every flow's window at that instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Injection {
    pub t: SimTime,
    pub flow: usize,
    pub seq: u64,
    pub windows: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ScenarioReport {
    pub variant: Variant,
    pub flows: usize,
    pub seed: u64,
    pub utilization: f64,
    /// Retransmissions over transmissions inside the measurement window.
    pub loss_ratio: f64,
    pub jfi: f64,
    pub acw_mean: f64,
    /// Data packets of the session's flows dropped anywhere.
    pub drops: u64,
    pub retransmissions: u64,
    pub red_early_drops: u64,
    pub overflow_drops: u64,
    pub forced_drops: u64,
    pub background_delivered_bytes: u64,
    pub background_drops: u64,
    /// Mean goodput of each flow over the measurement window, bits/s.
    pub flow_goodput_bps: Vec<f64>,
    pub flow_stats: Vec<FlowStats>,
    pub series: Vec<SeriesPoint>,
    pub acw_series: Vec<AcwSample>,
    pub loss_events: Vec<LossEvent>,
    pub injections: Vec<Injection>,
    /// `(t, flow, cwnd)` after every change when tracing is on.
    pub cwnd_trace: Vec<(SimTime, usize, f64)>,
    /// Mean of the smoothed RTT samples taken at each tick, seconds.
    pub mean_srtt_s: f64,
    /// Fraction of the whole run each bottleneck spent transmitting.
    pub link_busy: Vec<f64>,
    pub events_processed: u64,
    pub conservation_checks: u64,
}

struct Flow {
    sender: Sender,
    receiver: Receiver,
    stats: FlowStats,
    started: bool,
    rto_handle: Option<EventHandle>,
    rto_fire_at: SimTime,
    rto_deadline: Option<SimTime>,
    delivered_at_last_tick: u64,
    delivered_at_warmup: u64,
    sent_at_warmup: u64,
    retx_at_warmup: u64,
    loss_rng: RandomStream,
}

struct Background {
    source: PoissonSource,
    host: usize,
    link: usize,
}

struct World {
    cfg: ScenarioConfig,
    topo: Topology,
    red_rng: Vec<RandomStream>,
    flows: Vec<Flow>,
    background: Vec<Background>,
    pending_forced: Vec<ForcedLoss>,
    next_packet_id: u64,
    warmup: SimTime,
    end: SimTime,

    red_early: u64,
    overflow: u64,
    forced: u64,
    bg_delivered: u64,
    bg_delivered_at_warmup: u64,
    bg_drops: u64,

    series: Vec<SeriesPoint>,
    acw_series: Vec<AcwSample>,
    loss_events: Vec<LossEvent>,
    injections: Vec<Injection>,
    cwnd_trace: Vec<(SimTime, usize, f64)>,
    srtt_sum: f64,
    srtt_samples: u64,
    conservation_checks: u64,
    warmup_snapshot_taken: bool,
}

/// A configured, not yet executed run.
pub struct Scenario {
    engine: Engine<Payload>,
    world: World,
    seed: u64,
}

impl Scenario {
    pub fn new(cfg: ScenarioConfig, seed: u64) -> Result<Self, ScenarioError> {
        cfg.validate()?;
        let bg_sources = if cfg.background_pps > 0.0 {
            cfg.background_sources
        } else {
            0
        };
        let topo = build_dumbbell(&cfg.link, &cfg.red, cfg.flows, bg_sources)?;
        let session = if cfg.flows > 0 {
            Some(ParallelSession::new(0, cfg.flows, cfg.stagger(), cfg.variant)?)
        } else {
            None
        };

        let params = Arc::new(cfg.cc.clone());
        let flows = (0..cfg.flows)
            .map(|f| Flow {
                sender: Sender::new(f, cfg.variant, params.clone(), SimTime::ZERO),
                receiver: Receiver::new(),
                stats: FlowStats {
                    flow_id: f,
                    ..FlowStats::default()
                },
                started: false,
                rto_handle: None,
                rto_fire_at: SimTime::ZERO,
                rto_deadline: None,
                delivered_at_last_tick: 0,
                delivered_at_warmup: 0,
                sent_at_warmup: 0,
                retx_at_warmup: 0,
                loss_rng: RandomStream::new(seed, streams::FORCED_LOSS_BASE + f as u64),
            })
            .collect();

        let n_links = topo.bottlenecks.len();
        let background = (0..bg_sources)
            .map(|k| Background {
                source: PoissonSource::new(
                    cfg.background_pps / bg_sources as f64,
                    cfg.flows + k,
                    cfg.background_packet_bytes,
                    RandomStream::new(seed, streams::BACKGROUND_BASE + k as u64),
                ),
                host: k,
                link: k % n_links,
            })
            .collect();
        let red_rng = (0..n_links)
            .map(|l| RandomStream::new(seed, streams::RED_BASE + l as u64))
            .collect();

        let mut engine = Engine::new();
        if let Some(session) = &session {
            for (f, t) in session.start_times(SimTime::ZERO) {
                engine.schedule(t, Payload::FlowStart(f))?;
            }
        }
        engine.schedule(SimTime::from_secs(cfg.sample_interval_s), Payload::SampleTick)?;

        let mut pending_forced = cfg.forced_losses.clone();
        pending_forced.sort_by(|a, b| a.at_s.total_cmp(&b.at_s));

        let mut world = World {
            warmup: SimTime::from_secs(cfg.warmup_s),
            end: SimTime::from_secs(cfg.duration_s),
            cfg,
            topo,
            red_rng,
            flows,
            background,
            pending_forced,
            next_packet_id: 0,
            red_early: 0,
            overflow: 0,
            forced: 0,
            bg_delivered: 0,
            bg_delivered_at_warmup: 0,
            bg_drops: 0,
            series: Vec::new(),
            acw_series: Vec::new(),
            loss_events: Vec::new(),
            injections: Vec::new(),
            cwnd_trace: Vec::new(),
            srtt_sum: 0.0,
            srtt_samples: 0,
            conservation_checks: 0,
            warmup_snapshot_taken: false,
        };
        for k in 0..world.background.len() {
            world.schedule_background(&mut engine, k)?;
        }
        Ok(Scenario {
            engine,
            world,
            seed,
        })
    }

    pub fn run(mut self) -> Result<ScenarioReport, ScenarioError> {
        let end = self.world.end;
        let world = &mut self.world;
        self.engine.run_until(end, |eng, ev| world.handle(eng, ev))?;
        if !world.warmup_snapshot_taken {
            world.take_warmup_snapshot();
        }
        world.report(self.seed, self.engine.processed())
    }
}

/// Runs one scenario to completion.
pub fn run_scenario(cfg: ScenarioConfig, seed: u64) -> Result<ScenarioReport, ScenarioError> {
    Scenario::new(cfg, seed)?.run()
}

impl World {
    fn handle(&mut self, eng: &mut Engine<Payload>, ev: Event<Payload>) -> Result<(), ScenarioError> {
        let now = ev.fire_at;
        match ev.payload {
            Payload::FlowStart(f) => self.on_flow_start(eng, f, now),
            Payload::PacketArrival(p) => self.on_router_arrival(eng, p, now),
            Payload::PacketDeparture(link) => self.on_departure(eng, link, now),
            Payload::Delivery(p) => self.on_delivery(eng, p, now),
            Payload::AckArrival(p) => self.on_ack(eng, p, now),
            Payload::RtoExpiry(f) => self.on_rto(eng, f, now),
            Payload::SampleTick => self.on_tick(eng, now),
            Payload::BackgroundArrival(k) => self.on_background(eng, k, now),
        }
    }

    fn packet_id(&mut self) -> u64 {
        self.next_packet_id += 1;
        self.next_packet_id
    }

    fn acw(&self) -> f64 {
        self.flows.iter().map(|f| f.sender.cc.window()).sum()
    }

    fn trace(&mut self, now: SimTime, f: usize) {
        if self.cfg.trace_cwnd {
            let w = self.flows[f].sender.cc.window();
            if self.cwnd_trace.iter().rev().find(|(_, g, _)| *g == f).map(|(_, _, c)| *c) != Some(w) {
                self.cwnd_trace.push((now, f, w));
            }
        }
    }

    fn on_flow_start(&mut self, eng: &mut Engine<Payload>, f: usize, now: SimTime) -> Result<(), ScenarioError> {
        route_assign(f, &mut self.topo, &self.cfg.route, now);
        let flow = &mut self.flows[f];
        flow.started = true;
        flow.sender.cc.t_last_loss = now;
        self.trace(now, f);
        self.send_available(eng, f, now)
    }

    /// Puts one data segment on the sender's access link.
    fn transmit(&mut self, eng: &mut Engine<Payload>, f: usize, seq: u64, retx: bool, now: SimTime) -> Result<(), ScenarioError> {
        let id = self.packet_id();
        let pkt = Packet::data(id, Source::Flow(f), seq, now, retx);
        let flow = &mut self.flows[f];
        flow.stats.data_packets_sent += 1;
        if retx {
            flow.stats.retransmissions += 1;
        }
        let host = self.topo.flow_sender[f];
        let at = self.topo.sender_access[host].transmit(now, pkt.size);
        eng.schedule(at, Payload::PacketArrival(pkt))?;
        if self.flows[f].rto_deadline.is_none() {
            self.arm_rto(eng, f, now)?;
        }
        Ok(())
    }

    fn send_available(&mut self, eng: &mut Engine<Payload>, f: usize, now: SimTime) -> Result<(), ScenarioError> {
        while let Some((seq, retx)) = self.flows[f].sender.next_segment() {
            self.transmit(eng, f, seq, retx, now)?;
        }
        Ok(())
    }

    /// (Re)starts the retransmission timer. The queued event is only replaced
    /// when the new deadline is earlier; a late event re-arms itself.
    fn arm_rto(&mut self, eng: &mut Engine<Payload>, f: usize, now: SimTime) -> Result<(), ScenarioError> {
        let flow = &mut self.flows[f];
        let deadline = now + flow.sender.rto();
        flow.rto_deadline = Some(deadline);
        let pending = flow.rto_handle.is_some_and(|h| eng.is_pending(h));
        if pending && flow.rto_fire_at <= deadline {
            return Ok(());
        }
        if let Some(h) = flow.rto_handle.take() {
            eng.cancel(h);
        }
        flow.rto_handle = Some(eng.schedule(deadline, Payload::RtoExpiry(f))?);
        flow.rto_fire_at = deadline;
        Ok(())
    }

    fn on_rto(&mut self, eng: &mut Engine<Payload>, f: usize, now: SimTime) -> Result<(), ScenarioError> {
        let flow = &mut self.flows[f];
        flow.rto_handle = None;
        match flow.rto_deadline {
            None => return Ok(()),
            Some(d) if d > now => {
                flow.rto_handle = Some(eng.schedule(d, Payload::RtoExpiry(f))?);
                flow.rto_fire_at = d;
                return Ok(());
            }
            Some(_) => {}
        }
        flow.rto_deadline = None;
        let before = flow.sender.cc.window();
        let acw_before = self.acw();
        let flow = &mut self.flows[f];
        flow.sender.on_rto(now);
        flow.stats.timeouts += 1;
        let after = flow.sender.cc.window();
        self.loss_events.push(LossEvent {
            t: now,
            flow: f,
            kind: LossKind::Timeout,
            cwnd_before: before,
            cwnd_after: after,
            acw_before,
            acw_after: acw_before - before + after,
        });
        self.trace(now, f);
        self.send_available(eng, f, now)?;
        if self.flows[f].rto_deadline.is_none() {
            self.arm_rto(eng, f, now)?;
        }
        Ok(())
    }

    fn take_forced_loss(&mut self, f: usize, now: SimTime) -> bool {
        if let Some(i) = self
            .pending_forced
            .iter()
            .position(|l| l.flow == f && l.at_s <= now.as_secs())
        {
            self.pending_forced.remove(i);
            return true;
        }
        false
    }

    fn on_router_arrival(&mut self, eng: &mut Engine<Payload>, p: Packet, now: SimTime) -> Result<(), ScenarioError> {
        let link = match p.source {
            Source::Flow(f) => {
                if !self.pending_forced.is_empty() && self.take_forced_loss(f, now) {
                    self.forced += 1;
                    self.flows[f].stats.drops_observed += 1;
                    let windows = self.flows.iter().map(|fl| fl.sender.cc.window()).collect();
                    self.injections.push(Injection {
                        t: now,
                        flow: f,
                        seq: p.seq_no,
                        windows,
                    });
                    return Ok(());
                }
                if self.cfg.uniform_loss > 0.0
                    && self.flows[f].loss_rng.uniform() < self.cfg.uniform_loss
                {
                    self.forced += 1;
                    self.flows[f].stats.drops_observed += 1;
                    return Ok(());
                }
                self.topo.route_of(f).expect("started flows are routed")
            }
            Source::Background(k) => self.background[k].link,
        };

        let bl = &mut self.topo.bottlenecks[link];
        match bl.queue.enqueue(p, now, &mut self.red_rng[link]) {
            RedVerdict::Accepted => {
                if !bl.is_busy() {
                    self.start_service(eng, link, now)?;
                }
            }
            verdict => {
                if verdict == RedVerdict::DroppedEarly {
                    self.red_early += 1;
                } else {
                    self.overflow += 1;
                }
                match p.source {
                    Source::Flow(f) => self.flows[f].stats.drops_observed += 1,
                    Source::Background(_) => self.bg_drops += 1,
                }
            }
        }
        Ok(())
    }

    fn start_service(&mut self, eng: &mut Engine<Payload>, link: usize, now: SimTime) -> Result<(), ScenarioError> {
        let bl = &mut self.topo.bottlenecks[link];
        if let Some(next) = bl.queue.dequeue(now) {
            let ser = bl.begin_service(next);
            eng.schedule(now + ser, Payload::PacketDeparture(link))?;
        }
        Ok(())
    }

    fn on_departure(&mut self, eng: &mut Engine<Payload>, link: usize, now: SimTime) -> Result<(), ScenarioError> {
        let bl = &mut self.topo.bottlenecks[link];
        let p = bl.finish_service().expect("departure without a packet in service");
        let at_r2 = now + bl.prop_delay;
        let rx = match p.source {
            Source::Flow(f) => f,
            Source::Background(k) => self.cfg.flows + self.background[k].host,
        };
        let at = self.topo.receiver_access[rx].transmit(at_r2, p.size);
        eng.schedule(at, Payload::Delivery(p))?;
        self.start_service(eng, link, now)
    }

    fn on_delivery(&mut self, eng: &mut Engine<Payload>, p: Packet, now: SimTime) -> Result<(), ScenarioError> {
        let f = match p.source {
            Source::Flow(f) => f,
            Source::Background(_) => {
                self.bg_delivered += p.size as u64;
                return Ok(());
            }
        };
        let flow = &mut self.flows[f];
        let before = flow.receiver.rcv_nxt();
        let ack_no = flow.receiver.on_data(p.seq_no);
        flow.stats.packets_arrived += 1;
        flow.stats.bytes_delivered += (ack_no - before) * DATA_PACKET_BYTES as u64;

        let id = self.packet_id();
        let ack = Packet::ack_for(id, &p, ack_no, now);
        let link = self.topo.route_of(f).expect("started flows are routed");
        let host = self.topo.flow_sender[f];
        let t1 = self.topo.receiver_uplink[f].transmit(now, ack.size);
        let t2 = self.topo.reverse_bottlenecks[link].transmit(t1, ack.size);
        let t3 = self.topo.sender_downlink[host].transmit(t2, ack.size);
        eng.schedule(t3, Payload::AckArrival(ack))?;
        Ok(())
    }

    fn on_ack(&mut self, eng: &mut Engine<Payload>, ack: Packet, now: SimTime) -> Result<(), ScenarioError> {
        debug_assert_eq!(ack.kind, PacketKind::Ack);
        let f = ack.flow_id().expect("ACKs belong to flows");
        let before = self.flows[f].sender.cc.window();
        let acw_before = self.acw();
        let out = self.flows[f].sender.on_ack(&ack, now)?;
        let after = self.flows[f].sender.cc.window();
        if out.entered_recovery {
            self.flows[f].stats.fast_retransmits += 1;
            self.loss_events.push(LossEvent {
                t: now,
                flow: f,
                kind: LossKind::FastRetransmit,
                cwnd_before: before,
                cwnd_after: after,
                acw_before,
                acw_after: acw_before - before + after,
            });
        }
        if after != before {
            self.trace(now, f);
        }
        match out.timer {
            TimerCommand::Keep => {}
            TimerCommand::Restart => self.arm_rto(eng, f, now)?,
            TimerCommand::Stop => self.flows[f].rto_deadline = None,
        }
        if let Some(seq) = out.retransmit {
            let retx = self.flows[f].sender.record_send(seq);
            self.transmit(eng, f, seq, retx, now)?;
        }
        self.send_available(eng, f, now)
    }

    fn schedule_background(&mut self, eng: &mut Engine<Payload>, k: usize) -> Result<(), ScenarioError> {
        if let Some(gap) = self.background[k].source.next_gap() {
            eng.schedule_in(gap, Payload::BackgroundArrival(k))?;
        }
        Ok(())
    }

    fn on_background(&mut self, eng: &mut Engine<Payload>, k: usize, now: SimTime) -> Result<(), ScenarioError> {
        let id = self.packet_id();
        let bg = &self.background[k];
        let mut pkt = Packet::data(id, Source::Background(k), 0, now, false);
        pkt.size = bg.source.packet_size;
        let sender = self.topo.senders.len() - self.background.len() + bg.host;
        let at = self.topo.sender_access[sender].transmit(now, pkt.size);
        eng.schedule(at, Payload::PacketArrival(pkt))?;
        self.schedule_background(eng, k)
    }

    fn take_warmup_snapshot(&mut self) {
        self.warmup_snapshot_taken = true;
        for f in &mut self.flows {
            f.delivered_at_warmup = f.stats.bytes_delivered;
            f.sent_at_warmup = f.stats.data_packets_sent;
            f.retx_at_warmup = f.stats.retransmissions;
        }
        self.bg_delivered_at_warmup = self.bg_delivered;
    }

    fn on_tick(&mut self, eng: &mut Engine<Payload>, now: SimTime) -> Result<(), ScenarioError> {
        let interval = self.cfg.sample_interval_s;
        if !self.warmup_snapshot_taken && now >= self.warmup {
            self.take_warmup_snapshot();
        }
        self.check_conservation(eng, now)?;

        let mut windows = Vec::with_capacity(self.flows.len());
        for (f, flow) in self.flows.iter_mut().enumerate() {
            let delivered = flow.stats.bytes_delivered;
            let goodput = (delivered - flow.delivered_at_last_tick) as f64 * 8.0 / interval;
            flow.delivered_at_last_tick = delivered;
            flow.stats.goodput_series.push((now, goodput));
            let cwnd = flow.sender.cc.window();
            windows.push(cwnd);
            if let Some(s) = flow.sender.cc.srtt {
                if now >= self.warmup {
                    self.srtt_sum += s;
                    self.srtt_samples += 1;
                }
            }
            if self.cfg.record_series {
                let link = self.topo.route_of(f).unwrap_or(0);
                let bl = &self.topo.bottlenecks[link];
                self.series.push(SeriesPoint {
                    t: now,
                    flow_id: f,
                    goodput_bps: goodput,
                    cwnd,
                    queue_len: bl.backlog(),
                    queue_avg: bl.queue.avg(),
                });
            }
        }
        self.acw_series.push(AcwSample::new(now, windows));

        let next = now + interval;
        if next <= self.end {
            eng.schedule(next, Payload::SampleTick)?;
        }
        Ok(())
    }

    /// Counts each flow's data packets still inside the network by walking the
    /// event queue and the bottleneck buffers.
    fn check_conservation(&mut self, eng: &Engine<Payload>, now: SimTime) -> Result<(), ScenarioError> {
        self.conservation_checks += 1;
        let mut in_flight = vec![0u64; self.flows.len()];
        let mut count = |p: &Packet| {
            if let (PacketKind::Data, Source::Flow(f)) = (p.kind, p.source) {
                in_flight[f] += 1;
            }
        };
        for payload in eng.pending_payloads() {
            match payload {
                Payload::PacketArrival(p) | Payload::Delivery(p) => count(p),
                _ => {}
            }
        }
        for bl in &self.topo.bottlenecks {
            bl.queue.iter().for_each(&mut count);
            if let Some(p) = &bl.in_service {
                count(p);
            }
        }
        for (f, flow) in self.flows.iter().enumerate() {
            let s = &flow.stats;
            if s.data_packets_sent != s.packets_arrived + s.drops_observed + in_flight[f] {
                return Err(ScenarioError::Conservation {
                    flow: f,
                    at: now,
                    sent: s.data_packets_sent,
                    delivered: s.packets_arrived,
                    dropped: s.drops_observed,
                    in_flight: in_flight[f],
                });
            }
        }
        Ok(())
    }

    fn report(&mut self, seed: u64, events: u64) -> Result<ScenarioReport, ScenarioError> {
        let window = self.end.since(self.warmup);
        let capacity: f64 = self.topo.bottlenecks.iter().map(|b| b.capacity_bps).sum();

        let flow_goodput_bps: Vec<f64> = self
            .flows
            .iter()
            .map(|f| (f.stats.bytes_delivered - f.delivered_at_warmup) as f64 * 8.0 / window)
            .collect();
        let bg_bits = (self.bg_delivered - self.bg_delivered_at_warmup) as f64 * 8.0;
        let tcp_bits: f64 = flow_goodput_bps.iter().sum::<f64>() * window;
        let utilization = metrics::utilization(tcp_bits + bg_bits, capacity, window);

        let flow_stats: Vec<FlowStats> = self.flows.iter().map(|f| f.stats.clone()).collect();
        let windowed: Vec<FlowStats> = self
            .flows
            .iter()
            .map(|f| FlowStats {
                data_packets_sent: f.stats.data_packets_sent - f.sent_at_warmup,
                retransmissions: f.stats.retransmissions - f.retx_at_warmup,
                ..FlowStats::default()
            })
            .collect();
        let loss_ratio = metrics::aggregate_loss_ratio(&windowed);
        let jfi = if self.flows.is_empty() {
            1.0
        } else {
            metrics::jfi(&flow_goodput_bps)?
        };
        let in_window: Vec<f64> = self
            .acw_series
            .iter()
            .filter(|s| s.t >= self.warmup)
            .map(|s| s.acw)
            .collect();
        let acw_mean = if in_window.is_empty() {
            0.0
        } else {
            in_window.iter().sum::<f64>() / in_window.len() as f64
        };

        Ok(ScenarioReport {
            variant: self.cfg.variant,
            flows: self.cfg.flows,
            seed,
            utilization,
            loss_ratio,
            jfi,
            acw_mean,
            drops: flow_stats.iter().map(|s| s.drops_observed).sum(),
            retransmissions: flow_stats.iter().map(|s| s.retransmissions).sum(),
            red_early_drops: self.red_early,
            overflow_drops: self.overflow,
            forced_drops: self.forced,
            background_delivered_bytes: self.bg_delivered,
            background_drops: self.bg_drops,
            flow_goodput_bps,
            flow_stats,
            series: std::mem::take(&mut self.series),
            acw_series: std::mem::take(&mut self.acw_series),
            loss_events: std::mem::take(&mut self.loss_events),
            injections: std::mem::take(&mut self.injections),
            cwnd_trace: std::mem::take(&mut self.cwnd_trace),
            mean_srtt_s: if self.srtt_samples == 0 {
                0.0
            } else {
                self.srtt_sum / self.srtt_samples as f64
            },
            link_busy: self.topo.bottlenecks.iter().map(|b| b.utilization(self.end)).collect(),
            events_processed: events,
            conservation_checks: self.conservation_checks,
        })
    }
}
