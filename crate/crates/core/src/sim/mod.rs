//! Deterministic discrete-event packet simulator.
//!
//! Links are unidirectional, each fed by a FIFO output queue with a byte
//! limit. A link serializes one packet at a time at its capacity and delivers
//! it to the far node after the propagation delay. Switches forward by a
//! shortest-path table; hosts hand packets to their TCP endpoints.
//!
//! When an output port runs RWNDQ, data leaving through it feeds the port's
//! MSS estimate, and every segment coming back the other way (arriving on
//! the reverse link, i.e. the port's ingress) goes through the port's
//! handler before being forwarded. That is where SYN-ACKs and FINs are
//! counted and ACK windows clamped.

mod event;
mod queue;
mod tcp;
mod topology;

pub use event::{Event, EventKind, EventQueue};
pub use queue::{Aqm, Enqueue, OutQueue};
pub use tcp::{CcState, Phase, TcpConfig, TcpReceiver, TcpSender};
pub use topology::{LinkId, LinkSpec, NodeId, NodeKind, Topology};

use crate::error::{Error, Result};
use crate::metrics::{
    FlowKind, FlowRecord, LinkDrops, MetricsReport, PortSample, QueueSample, TraceRecord, WindowSample,
};
use crate::packet::{FlowKey, TcpSegment};
use crate::port::PortState;
use crate::time::SimTime;

pub type ConnId = usize;

/// Frame size of a segment: payload plus 40 bytes of TCP/IP headers, never
/// below the 64-byte minimum (pure ACKs, SYN, FIN).
pub const HEADER_OVERHEAD: u32 = 40;
pub const MIN_FRAME: u32 = 64;

pub fn wire_size(seg: &TcpSegment) -> u32 {
    (seg.payload_len + HEADER_OVERHEAD).max(MIN_FRAME)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Packet {
    pub seg: TcpSegment,
    pub conn: ConnId,
    pub dst: NodeId,
    pub wire_bytes: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub src: NodeId,
    pub dst: NodeId,
    pub start: SimTime,
    /// Elephants stop producing data here.
    pub stop: Option<SimTime>,
    /// Bytes to transfer; `None` is unbounded.
    pub size: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub tcp: TcpConfig,
    pub horizon: SimTime,
    pub bin: SimTime,
    pub sample_interval: SimTime,
    /// Record `(in_flight, rwnd, cwnd)` at every ACK a sender processes.
    pub record_windows: bool,
    pub trace: bool,
    /// Verify queue and flow conservation laws after every event.
    pub check_invariants: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            tcp: TcpConfig::default(),
            horizon: SimTime::from_millis(1000),
            bin: SimTime::from_millis(10),
            sample_interval: SimTime::from_micros(50),
            record_windows: false,
            trace: false,
            check_invariants: false,
        }
    }
}

struct Link {
    spec: LinkSpec,
    queue: OutQueue,
    in_service: Option<Packet>,
    reverse: Option<LinkId>,
}

struct Conn {
    spec: FlowSpec,
    sender: TcpSender,
    receiver: TcpReceiver,
    rto_event_at: Option<SimTime>,
    acked_bins: Vec<u64>,
    closed: bool,
}

pub struct Simulator {
    now: SimTime,
    events: EventQueue,
    links: Vec<Link>,
    next_hop: Vec<Vec<Option<LinkId>>>,
    bottleneck: LinkId,
    conns: Vec<Conn>,
    open_conns: usize,
    cfg: SimConfig,
    scratch: Vec<TcpSegment>,
    last_sample_area: f64,
    report: MetricsReport,
}

impl Simulator {
    pub fn new(topology: &Topology, flows: Vec<FlowSpec>, cfg: SimConfig) -> Result<Self> {
        validate(topology, &flows, &cfg)?;
        let mut links = Vec::with_capacity(topology.links.len());
        for (id, spec) in topology.links.iter().enumerate() {
            let aqm = match &spec.rwndq {
                Some(params) => Aqm::Rwndq(Box::new(PortState::new(params.clone())?)),
                None => Aqm::DropTail,
            };
            links.push(Link {
                queue: OutQueue::new(spec.buffer_bytes, aqm),
                spec: spec.clone(),
                in_service: None,
                reverse: topology.reverse_of(id),
            });
        }
        let conns: Vec<Conn> = flows
            .into_iter()
            .enumerate()
            .map(|(id, spec)| {
                let key = FlowKey {
                    src: spec.src as u32,
                    dst: spec.dst as u32,
                    sport: 10_000 + id as u16,
                    dport: 5001,
                };
                let rkey = FlowKey { src: key.dst, dst: key.src, sport: key.dport, dport: key.sport };
                Conn {
                    sender: TcpSender::new(key, cfg.tcp.clone(), spec.size),
                    receiver: TcpReceiver::new(rkey, cfg.tcp.window_scale),
                    spec,
                    rto_event_at: None,
                    acked_bins: Vec::new(),
                    closed: false,
                }
            })
            .collect();

        let report = MetricsReport {
            bin: cfg.bin.as_secs_f64(),
            sample_interval: cfg.sample_interval.as_secs_f64(),
            bottleneck_bps: topology.links[topology.bottleneck].capacity_bps,
            ..MetricsReport::default()
        };
        Ok(Simulator {
            now: SimTime::ZERO,
            events: EventQueue::default(),
            next_hop: topology.next_hops(),
            bottleneck: topology.bottleneck,
            open_conns: conns.len(),
            links,
            conns,
            cfg,
            scratch: Vec::new(),
            last_sample_area: 0.0,
            report,
        })
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn bottleneck_queue(&self) -> &OutQueue {
        &self.links[self.bottleneck].queue
    }

    pub fn sender(&self, conn: ConnId) -> &TcpSender {
        &self.conns[conn].sender
    }

    /// Runs until the horizon or until every flow has closed.
    pub fn run(mut self) -> MetricsReport {
        if self.conns.is_empty() {
            return self.report;
        }
        for id in 0..self.conns.len() {
            let spec = &self.conns[id].spec;
            let (start, stop) = (spec.start, spec.stop);
            self.events.schedule(start, EventKind::FlowStart { conn: id });
            if let Some(stop) = stop {
                self.events.schedule(stop, EventKind::FlowStop { conn: id });
            }
        }
        for (id, link) in self.links.iter().enumerate() {
            if let Some(port) = link.queue.aqm.port() {
                self.events.schedule(port.params().interval, EventKind::PortTimer { link: id });
            }
        }
        self.events.schedule(self.cfg.sample_interval, EventKind::Sample);

        while let Some(ev) = self.events.pop() {
            if ev.time > self.cfg.horizon {
                self.now = self.cfg.horizon;
                break;
            }
            self.now = ev.time;
            if self.cfg.trace {
                self.trace(&ev);
            }
            self.dispatch(ev.kind);
            if self.cfg.check_invariants {
                self.check_invariants();
            }
            if self.open_conns == 0 {
                break;
            }
        }
        self.finish()
    }

    fn trace(&mut self, ev: &Event) {
        let flow = match &ev.kind {
            EventKind::Arrival { pkt, .. } => Some(pkt.conn),
            EventKind::TxComplete { link } => self.links[*link].in_service.as_ref().map(|p| p.conn),
            EventKind::FlowStart { conn } | EventKind::FlowStop { conn } | EventKind::Rto { conn } => Some(*conn),
            EventKind::PortTimer { .. } | EventKind::Sample => None,
        };
        self.report.trace.push(TraceRecord {
            t: ev.time.as_secs_f64(),
            kind: ev.kind.name(),
            flow,
            queue_bytes: self.links[self.bottleneck].queue.bytes(),
        });
    }

    fn dispatch(&mut self, kind: EventKind) {
        match kind {
            EventKind::TxComplete { link } => self.on_tx_complete(link),
            EventKind::Arrival { link, pkt } => self.on_arrival(link, pkt),
            EventKind::PortTimer { link } => self.on_port_timer(link),
            EventKind::FlowStart { conn } => {
                let mut out = std::mem::take(&mut self.scratch);
                self.conns[conn].sender.open(self.now, &mut out);
                self.emit_from_sender(conn, &mut out);
                self.scratch = out;
            }
            EventKind::FlowStop { conn } => {
                let mut out = std::mem::take(&mut self.scratch);
                self.conns[conn].sender.stop(self.now, &mut out);
                self.emit_from_sender(conn, &mut out);
                self.scratch = out;
                self.update_closed(conn);
            }
            EventKind::Rto { conn } => {
                if self.conns[conn].rto_event_at != Some(self.now) {
                    return;
                }
                self.conns[conn].rto_event_at = None;
                let mut out = std::mem::take(&mut self.scratch);
                self.conns[conn].sender.on_timeout(self.now, &mut out);
                self.emit_from_sender(conn, &mut out);
                self.scratch = out;
            }
            EventKind::Sample => self.on_sample(),
        }
    }

    fn on_tx_complete(&mut self, link_id: LinkId) {
        let link = &mut self.links[link_id];
        let pkt = link.in_service.take().expect("tx complete on idle link");
        let arrive = self.now + link.spec.prop_delay;
        self.events.schedule(arrive, EventKind::Arrival { link: link_id, pkt });
        self.start_tx(link_id);
    }

    /// Starts serializing the head of the queue if the link is idle.
    fn start_tx(&mut self, link_id: LinkId) {
        let now = self.now;
        let link = &mut self.links[link_id];
        if link.in_service.is_some() {
            return;
        }
        let Some(pkt) = link.queue.dequeue(now) else { return };
        if let Some(port) = link.queue.aqm.port_mut() {
            port.observe_payload(pkt.seg.payload_len);
        }
        let done = now + SimTime::serialization(pkt.wire_bytes as u64, link.spec.capacity_bps);
        if link_id == self.bottleneck {
            let bin = (now.as_picos() / self.cfg.bin.as_picos()) as usize;
            let bins = &mut self.report.bottleneck_tx_bins;
            if bins.len() <= bin {
                bins.resize(bin + 1, 0);
            }
            bins[bin] += pkt.wire_bytes as u64;
        }
        link.in_service = Some(pkt);
        self.events.schedule(done, EventKind::TxComplete { link: link_id });
    }

    fn send_on(&mut self, link_id: LinkId, pkt: Packet) {
        if self.links[link_id].queue.enqueue(self.now, pkt) == Enqueue::Accepted {
            self.start_tx(link_id);
        }
    }

    fn on_arrival(&mut self, link_id: LinkId, mut pkt: Packet) {
        let node = self.links[link_id].spec.to;
        if node == pkt.dst {
            self.deliver(pkt);
            return;
        }
        if let Some(rev) = self.links[link_id].reverse {
            if let Some(port) = self.links[rev].queue.aqm.port_mut() {
                port.on_packet_departure(&mut pkt.seg);
            }
        }
        let out = self.next_hop[node][pkt.dst].expect("validated topology has a route");
        self.send_on(out, pkt);
    }

    fn deliver(&mut self, pkt: Packet) {
        let id = pkt.conn;
        let mut out = std::mem::take(&mut self.scratch);
        if pkt.dst == self.conns[id].spec.dst {
            self.conns[id].receiver.on_segment(self.now, &pkt.seg, &mut out);
            let (src, dst) = (self.conns[id].spec.dst, self.conns[id].spec.src);
            self.inject(id, src, dst, &mut out);
        } else {
            let newly = self.conns[id].sender.on_segment(self.now, &pkt.seg, &mut out);
            if newly > 0 {
                let bin = (self.now.as_picos() / self.cfg.bin.as_picos()) as usize;
                let bins = &mut self.conns[id].acked_bins;
                if bins.len() <= bin {
                    bins.resize(bin + 1, 0);
                }
                bins[bin] += newly;
            }
            if self.cfg.record_windows && pkt.seg.flags.is_ack() {
                let s = &self.conns[id].sender;
                self.report.windows.push(WindowSample {
                    t: self.now.as_secs_f64(),
                    flow: id,
                    in_flight: s.in_flight(),
                    rwnd: s.rwnd_seen(),
                    cwnd: s.cwnd(),
                });
            }
            self.emit_from_sender(id, &mut out);
            self.update_closed(id);
        }
        self.scratch = out;
    }

    fn emit_from_sender(&mut self, id: ConnId, out: &mut Vec<TcpSegment>) {
        let (src, dst) = (self.conns[id].spec.src, self.conns[id].spec.dst);
        self.inject(id, src, dst, out);
        self.sync_rto(id);
    }

    fn inject(&mut self, id: ConnId, src: NodeId, dst: NodeId, out: &mut Vec<TcpSegment>) {
        let Some(link) = self.next_hop[src][dst] else {
            out.clear();
            return;
        };
        for seg in out.drain(..) {
            let pkt = Packet { wire_bytes: wire_size(&seg), seg, conn: id, dst };
            self.send_on(link, pkt);
        }
    }

    fn sync_rto(&mut self, id: ConnId) {
        let conn = &mut self.conns[id];
        if let Some(deadline) = conn.sender.rto_deadline() {
            if conn.rto_event_at.is_none_or(|at| deadline < at) {
                conn.rto_event_at = Some(deadline);
                self.events.schedule(deadline, EventKind::Rto { conn: id });
            }
        } else {
            conn.rto_event_at = None;
        }
        // a later deadline is picked up when the pending event fires early
        let conn = &mut self.conns[id];
        if conn.rto_event_at.is_none() {
            if let Some(deadline) = conn.sender.rto_deadline() {
                conn.rto_event_at = Some(deadline);
                self.events.schedule(deadline, EventKind::Rto { conn: id });
            }
        }
    }

    fn update_closed(&mut self, id: ConnId) {
        let conn = &mut self.conns[id];
        if !conn.closed && conn.sender.phase() == Phase::Closed {
            conn.closed = true;
            self.open_conns -= 1;
        }
    }

    fn on_port_timer(&mut self, link_id: LinkId) {
        let now = self.now;
        let queue = &mut self.links[link_id].queue;
        let q = queue.bytes();
        let Some(port) = queue.aqm.port_mut() else { return };
        port.on_timer_tick(q);
        let next = now + port.params().interval;
        if link_id == self.bottleneck {
            self.report.port.push(PortSample { t: now.as_secs_f64(), state: port.snapshot(q) });
        }
        self.events.schedule(next, EventKind::PortTimer { link: link_id });
    }

    fn on_sample(&mut self) {
        let now = self.now;
        let interval = self.cfg.sample_interval.as_secs_f64();
        let q = &mut self.links[self.bottleneck].queue;
        let area = q.occupancy_integral(now);
        self.report.queue.push(QueueSample {
            t: now.as_secs_f64(),
            bytes: q.bytes(),
            avg_bytes: (area - self.last_sample_area) / interval,
            drops_cum: q.drops(),
        });
        self.last_sample_area = area;
        self.events.schedule(now + self.cfg.sample_interval, EventKind::Sample);
    }

    fn check_invariants(&self) {
        for (id, link) in self.links.iter().enumerate() {
            assert!(link.queue.verify(), "queue law violated on link {id} at {}", self.now);
            if link.in_service.is_none() {
                assert!(link.queue.is_empty(), "link {id} idle with backlog at {}", self.now);
            }
        }
        for (id, c) in self.conns.iter().enumerate() {
            let s = &c.sender;
            let delivered = c.receiver.rcv_nxt();
            assert!(s.snd_una() <= delivered && delivered <= s.snd_max(), "flow {id} sequence accounting broken");
            if let Some(limit) = s.limit() {
                assert!(s.snd_max() <= limit.max(s.snd_una()), "flow {id} sent past its limit");
            }
        }
    }

    fn finish(mut self) -> MetricsReport {
        let end = self.now;
        self.report.duration = end.as_secs_f64();
        let horizon = end.as_secs_f64();
        let mut records = Vec::with_capacity(self.conns.len());
        let mut goodput = Vec::with_capacity(self.conns.len());
        for (id, c) in self.conns.iter_mut().enumerate() {
            let s = &c.sender;
            let start = c.spec.start.as_secs_f64();
            let fct = s.completed_at().map(|t| t.as_secs_f64() - start);
            let stop = c.spec.stop.map(SimTime::as_secs_f64);
            let active_end = fct.map(|d| start + d).or(stop).unwrap_or(horizon).min(horizon);
            let span = active_end - start;
            let bytes = s.snd_una();
            records.push(FlowRecord {
                id,
                key: s.key(),
                kind: c.spec.kind,
                start,
                stop,
                fct,
                bytes,
                goodput_bps: if span > 0.0 { bytes as f64 * 8.0 / span } else { 0.0 },
                retransmitted_bytes: s.retransmitted_bytes(),
                timeouts: s.timeouts(),
            });
            goodput.push(std::mem::take(&mut c.acked_bins));
        }
        let n_bins = self.report.num_bins();
        for bins in goodput.iter_mut() {
            bins.resize(n_bins.max(bins.len()), 0);
        }
        self.report.bottleneck_tx_bins.resize(n_bins.max(self.report.bottleneck_tx_bins.len()), 0);
        self.report.flows = records;
        self.report.goodput_bins = goodput;
        self.report.link_drops = self
            .links
            .iter()
            .map(|l| LinkDrops { name: l.spec.name.clone(), drops: l.queue.drops() })
            .collect();
        self.report.bottleneck_drops = self.links[self.bottleneck].queue.drops();
        self.report
    }
}

fn validate(topology: &Topology, flows: &[FlowSpec], cfg: &SimConfig) -> Result<()> {
    let invalid = |msg: String| Err(Error::ScenarioInvalid(msg));
    if topology.bottleneck >= topology.links.len() {
        return invalid("bottleneck link does not exist".into());
    }
    for l in &topology.links {
        if !(l.capacity_bps > 0.0 && l.capacity_bps.is_finite()) {
            return invalid(format!("link {} has capacity {}", l.name, l.capacity_bps));
        }
        if let Some(p) = &l.rwndq {
            p.validate()?;
        }
    }
    if cfg.bin == SimTime::ZERO || cfg.sample_interval == SimTime::ZERO {
        return invalid("bin and sample interval must be positive".into());
    }
    if flows.len() > (u16::MAX - 10_000) as usize {
        return invalid(format!("{} flows exceed the port space", flows.len()));
    }
    let hops = topology.next_hops();
    for (i, f) in flows.iter().enumerate() {
        if f.src >= topology.nodes.len() || f.dst >= topology.nodes.len() || f.src == f.dst {
            return invalid(format!("flow {i} has bad endpoints {} -> {}", f.src, f.dst));
        }
        if hops[f.src][f.dst].is_none() || hops[f.dst][f.src].is_none() {
            return invalid(format!("flow {i}: no route between {} and {}", f.src, f.dst));
        }
        if f.stop.is_some_and(|s| s < f.start) {
            return invalid(format!("flow {i} stops before it starts"));
        }
        if f.size == Some(0) {
            return invalid(format!("flow {i} has zero size"));
        }
    }
    Ok(())
}
