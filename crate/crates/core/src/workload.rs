//! Dumbbell topologies and the elephant/mouse traffic mixes run on them.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::metrics::{FlowKind, MetricsReport};
use crate::port::RwndqParams;
use crate::sim::{FlowSpec, LinkSpec, NodeKind, SimConfig, Simulator, TcpConfig, Topology};
use crate::time::SimTime;

/// Frame size used to derive the incast start spacing.
pub const DATA_FRAME_BYTES: f64 = 1500.0;

#[derive(Clone, Debug, PartialEq)]
pub struct DumbbellConfig {
    pub n_senders: usize,
    pub sender_link_bps: f64,
    pub bottleneck_bps: f64,
    /// Round-trip propagation delay; split evenly over the four hops.
    pub rtt: f64,
    /// Bottleneck port buffer `B`.
    pub buffer_bytes: u64,
    /// Buffer of every other port (host NICs, reverse path).
    pub host_buffer_bytes: u64,
}

impl Default for DumbbellConfig {
    fn default() -> Self {
        DumbbellConfig {
            n_senders: 1,
            sender_link_bps: 11e9,
            bottleneck_bps: 10e9,
            rtt: 100e-6,
            buffer_bytes: 125_000,
            host_buffer_bytes: 16 << 20,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AqmConfig {
    DropTail,
    Rwndq(RwndqParams),
}

impl AqmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AqmConfig::DropTail => "droptail",
            AqmConfig::Rwndq(_) => "rwndq",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElephantSpec {
    pub start: f64,
    /// `None` runs to the end of the scenario.
    pub stop: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MiceConfig {
    pub count: usize,
    pub transfer_size: u64,
    pub epochs: usize,
    pub epoch_start: f64,
    pub epoch_interval: f64,
}

impl Default for MiceConfig {
    fn default() -> Self {
        MiceConfig {
            count: 0,
            transfer_size: 10_000,
            epochs: 5,
            epoch_start: 0.0,
            epoch_interval: 0.15,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub topology: DumbbellConfig,
    pub aqm: AqmConfig,
    pub elephants: Vec<ElephantSpec>,
    pub mice: MiceConfig,
    pub tcp: TcpConfig,
    pub seed: u64,
    pub duration: f64,
    /// Goodput and utilization bin width.
    pub bin: f64,
    /// Queue sampling interval.
    pub sample_interval: f64,
    /// Queue statistics ignore samples before this time.
    pub warmup: f64,
    pub record_windows: bool,
    pub trace: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            topology: DumbbellConfig::default(),
            aqm: AqmConfig::Rwndq(RwndqParams::default()),
            elephants: Vec::new(),
            mice: MiceConfig::default(),
            tcp: TcpConfig::default(),
            seed: 1,
            duration: 1.0,
            bin: 0.01,
            sample_interval: 50e-6,
            warmup: 0.1,
            record_windows: false,
            trace: false,
        }
    }
}

impl ScenarioConfig {
    /// Five elephants joining every `phase` seconds and leaving, first in
    /// first out, after all five have run together for one phase.
    pub fn staggered_elephants(aqm: AqmConfig, phase: f64) -> Self {
        let n = 5;
        ScenarioConfig {
            topology: DumbbellConfig { n_senders: n, ..DumbbellConfig::default() },
            aqm,
            elephants: (0..n)
                .map(|k| ElephantSpec {
                    start: k as f64 * phase,
                    stop: Some((n + k) as f64 * phase),
                })
                .collect(),
            duration: (2 * n - 1) as f64 * phase,
            ..ScenarioConfig::default()
        }
    }

    /// `sources` hosts, half long-lived elephants and half mice repeating a
    /// 10 KB incast transfer every epoch. Everything starts at time zero.
    pub fn mixed(aqm: AqmConfig, sources: usize) -> Self {
        let elephants = sources / 2;
        let mice = sources - elephants;
        ScenarioConfig {
            topology: DumbbellConfig { n_senders: sources.max(1), ..DumbbellConfig::default() },
            aqm,
            elephants: vec![ElephantSpec { start: 0.0, stop: None }; elephants],
            mice: MiceConfig { count: mice, ..MiceConfig::default() },
            ..ScenarioConfig::default()
        }
    }

    /// Smoothing window of the persistent queue: ten window updates.
    pub fn persistent_window(&self) -> f64 {
        let p = match &self.aqm {
            AqmConfig::Rwndq(p) => p.clone(),
            AqmConfig::DropTail => RwndqParams::default(),
        };
        10.0 * p.intervals_per_update as f64 * p.interval.as_secs_f64()
    }

    pub fn with_aqm(&self, aqm: AqmConfig) -> Self {
        ScenarioConfig { aqm, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |msg: String| Err(Error::ScenarioInvalid(msg));
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return invalid(format!("duration {} must be positive", self.duration));
        }
        if !(self.bin > 0.0) || !(self.sample_interval > 0.0) {
            return invalid("bin and sample_interval must be positive".into());
        }
        if !(self.warmup >= 0.0) {
            return invalid(format!("warmup {} must be non-negative", self.warmup));
        }
        for (i, e) in self.elephants.iter().enumerate() {
            if !(e.start >= 0.0) {
                return invalid(format!("elephant {i} starts at {}", e.start));
            }
            if e.stop.is_some_and(|s| !(s > e.start)) {
                return invalid(format!("elephant {i} stops before it starts"));
            }
        }
        let m = &self.mice;
        if m.count > 0 && m.epochs > 0 {
            if m.transfer_size == 0 {
                return invalid("mice transfer_size must be positive".into());
            }
            if !(m.epoch_start >= 0.0) || !(m.epoch_interval >= 0.0) {
                return invalid("mice epoch timing must be non-negative".into());
            }
        }
        if self.tcp.mss == 0 || self.tcp.initial_cwnd == 0 {
            return invalid("tcp mss and initial_cwnd must be positive".into());
        }
        if self.tcp.window_scale > crate::packet::MAX_WINDOW_SCALE {
            return Err(Error::ScaleOutOfRange(self.tcp.window_scale));
        }
        if let AqmConfig::Rwndq(p) = &self.aqm {
            p.validate()?;
        }
        build_dumbbell(&self.topology, &self.aqm).map(|_| ())
    }

    fn sim_config(&self) -> SimConfig {
        SimConfig {
            tcp: self.tcp.clone(),
            horizon: SimTime::from_secs_f64(self.duration),
            bin: SimTime::from_secs_f64(self.bin),
            sample_interval: SimTime::from_secs_f64(self.sample_interval),
            record_windows: self.record_windows,
            trace: self.trace,
            check_invariants: false,
        }
    }

    /// Every flow of the scenario, elephants first, then mice by epoch.
    pub fn flows(&self, topo: &Topology) -> Vec<FlowSpec> {
        let hosts = &topo.senders;
        let mut flows: Vec<FlowSpec> = self
            .elephants
            .iter()
            .enumerate()
            .map(|(i, e)| FlowSpec {
                kind: FlowKind::Elephant,
                src: hosts[i % hosts.len()],
                dst: topo.receiver,
                start: SimTime::from_secs_f64(e.start),
                stop: e.stop.map(SimTime::from_secs_f64),
                size: None,
            })
            .collect();
        let m = &self.mice;
        if m.count == 0 {
            return flows;
        }
        let first_mouse_host = self.elephants.len();
        for epoch in 0..m.epochs {
            let start = m.epoch_start + epoch as f64 * m.epoch_interval;
            let seed = self.seed.wrapping_add((epoch as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            for s in gen_incast_epoch(m.count, m.transfer_size, start, self.topology.bottleneck_bps, seed) {
                flows.push(FlowSpec {
                    kind: FlowKind::Mouse,
                    src: hosts[(first_mouse_host + s.mouse) % hosts.len()],
                    dst: topo.receiver,
                    start: SimTime::from_secs_f64(s.start),
                    stop: None,
                    size: Some(s.size),
                });
            }
        }
        flows
    }
}

/// Builds `n` senders, one switch and one receiver. The switch port towards
/// the receiver is the bottleneck and carries the AQM.
pub fn build_dumbbell(cfg: &DumbbellConfig, aqm: &AqmConfig) -> Result<Topology> {
    let invalid = |msg: String| Err(Error::InvalidTopology(msg));
    if cfg.n_senders == 0 {
        return invalid("need at least one sender".into());
    }
    if !(cfg.sender_link_bps > 0.0 && cfg.sender_link_bps.is_finite())
        || !(cfg.bottleneck_bps > 0.0 && cfg.bottleneck_bps.is_finite())
    {
        return invalid("link capacities must be positive".into());
    }
    if !(cfg.rtt > 0.0 && cfg.rtt.is_finite()) {
        return invalid(format!("rtt {} must be positive", cfg.rtt));
    }
    if cfg.buffer_bytes == 0 || cfg.host_buffer_bytes == 0 {
        return invalid("buffers must be positive".into());
    }

    let n = cfg.n_senders;
    let switch = n;
    let receiver = n + 1;
    let mut nodes = vec![NodeKind::Host; n + 2];
    nodes[switch] = NodeKind::Switch;
    let hop = SimTime::from_secs_f64(cfg.rtt / 4.0);
    let rwndq = match aqm {
        AqmConfig::DropTail => None,
        AqmConfig::Rwndq(p) => Some(RwndqParams { buffer_bytes: cfg.buffer_bytes, ..p.clone() }),
    };

    let mut links = vec![
        LinkSpec {
            name: "sw->rx".into(),
            from: switch,
            to: receiver,
            capacity_bps: cfg.bottleneck_bps,
            prop_delay: hop,
            buffer_bytes: cfg.buffer_bytes,
            rwndq,
        },
        LinkSpec {
            name: "rx->sw".into(),
            from: receiver,
            to: switch,
            capacity_bps: cfg.bottleneck_bps,
            prop_delay: hop,
            buffer_bytes: cfg.host_buffer_bytes,
            rwndq: None,
        },
    ];
    for h in 0..n {
        for (from, to, name) in [(h, switch, format!("h{h}->sw")), (switch, h, format!("sw->h{h}"))] {
            links.push(LinkSpec {
                name,
                from,
                to,
                capacity_bps: cfg.sender_link_bps,
                prop_delay: hop,
                buffer_bytes: cfg.host_buffer_bytes,
                rwndq: None,
            });
        }
    }
    Ok(Topology {
        nodes,
        links,
        senders: (0..n).collect(),
        receiver,
        bottleneck: 0,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MouseStart {
    /// Which mouse source (0-based) starts.
    pub mouse: usize,
    pub start: f64,
    pub size: u64,
}

/// Start times for one incast epoch.
///
/// Consecutive starts are separated by exponential gaps whose mean is one
/// 1500-byte frame time on the bottleneck divided by `n_mice`; the mice are
/// assigned to those slots in a random order.
pub fn gen_incast_epoch(n_mice: usize, size: u64, epoch_start: f64, bottleneck_bps: f64, seed: u64) -> Vec<MouseStart> {
    if n_mice == 0 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = incast_mean_gap(n_mice, bottleneck_bps);
    let gaps = Exp::new(1.0 / mean).expect("positive rate");
    let mut order: Vec<usize> = (0..n_mice).collect();
    order.shuffle(&mut rng);
    let mut t = epoch_start;
    order
        .into_iter()
        .map(|mouse| {
            t += gaps.sample(&mut rng);
            MouseStart { mouse, start: t, size }
        })
        .collect()
}

/// Mean spacing between mouse starts: one frame time over the number of
/// mice.
pub fn incast_mean_gap(n_mice: usize, bottleneck_bps: f64) -> f64 {
    DATA_FRAME_BYTES * 8.0 / bottleneck_bps / n_mice as f64
}

/// Runs one scenario to completion.
pub fn run(scenario: &ScenarioConfig) -> Result<MetricsReport> {
    scenario.validate()?;
    let topo = build_dumbbell(&scenario.topology, &scenario.aqm)?;
    let flows = scenario.flows(&topo);
    if flows.is_empty() {
        return Ok(MetricsReport {
            bin: scenario.bin,
            sample_interval: scenario.sample_interval,
            bottleneck_bps: scenario.topology.bottleneck_bps,
            ..MetricsReport::default()
        });
    }
    Ok(Simulator::new(&topo, flows, scenario.sim_config())?.run())
}
