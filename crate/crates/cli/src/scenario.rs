//! Scenario files.
//!
//! A scenario file is a sequence of `[section]` headers followed by
//! `key = value` lines. Blank lines and lines starting with `#` or `;` are
//! skipped. Durations take `s`, `ms`, `us` or `ns`; rates take `bps`,
//! `Kbps`, `Mbps` or `Gbps`; sizes take `B`, `KB`, `MB`, `KiB`, `MiB` or
//! `pkts` (1500 B). Bare numbers are seconds, bits per second and bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use rwndq_core::fluid::FluidConfig;
use rwndq_core::port::RwndqParams;
use rwndq_core::sim::TcpConfig;
use rwndq_core::workload::{AqmConfig, DumbbellConfig, ElephantSpec, MiceConfig, ScenarioConfig};
use rwndq_core::{Error, Result, SimTime};

pub const DEFAULT_OUT_DIR: &str = "rwndq-out";

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["mode", "seed", "out"]),
    (
        "fluid",
        &["interval", "intervals_per_update", "buffer", "alpha", "capacity", "rtt", "mss", "slow_start", "horizon"],
    ),
    ("topology", &["senders", "sender_link", "bottleneck", "rtt", "buffer", "host_buffer"]),
    ("aqm", &["kind", "alpha", "interval", "intervals_per_update", "slow_start", "min_window"]),
    ("elephants", &["count", "start", "stagger", "lifetime", "schedule"]),
    ("mice", &["count", "size", "epochs", "epoch_start", "epoch_interval"]),
    (
        "tcp",
        &["mss", "initial_cwnd", "rto_min", "rto_max", "window_scale", "congestion_control", "dupack_threshold"],
    ),
    ("sim", &["duration", "bin", "sample_interval", "warmup", "record_windows", "trace"]),
];

const RWNDQ_KEYS: &[&str] = &["alpha", "interval", "intervals_per_update", "slow_start", "min_window"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Fluid,
    Sim,
    AbCompare,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Fluid => "fluid",
            Mode::Sim => "sim",
            Mode::AbCompare => "ab_compare",
        }
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fluid" => Ok(Mode::Fluid),
            "sim" => Ok(Mode::Sim),
            "ab_compare" | "ab" => Ok(Mode::AbCompare),
            _ => Err(format!("unknown mode `{s}` (expected fluid, sim or ab_compare)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunConfig {
    Fluid(FluidConfig),
    Scenario(ScenarioConfig),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub mode: Mode,
    pub config: RunConfig,
    pub out_dir: PathBuf,
    /// Seed of every random choice. Must equal the scenario's own seed.
    pub seed: u64,
}

impl RunSpec {
    /// Defaults for `mode`, as an empty file naming only the mode would give.
    pub fn defaults(mode: Mode) -> Self {
        parse_scenario_as("", Some(mode)).expect("defaults are valid")
    }

    pub fn scenario(&self) -> Option<&ScenarioConfig> {
        match &self.config {
            RunConfig::Scenario(s) => Some(s),
            RunConfig::Fluid(_) => None,
        }
    }

    /// Replaces the seed everywhere it is used.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let RunConfig::Scenario(s) = &mut self.config {
            s.seed = seed;
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.config, self.mode) {
            (RunConfig::Fluid(c), Mode::Fluid) => {
                c.validate().map_err(|e| Error::validation("fluid", e.to_string()))
            }
            (RunConfig::Scenario(s), Mode::Sim | Mode::AbCompare) => {
                if s.seed != self.seed {
                    return Err(Error::validation(
                        "seed",
                        format!("scenario seed {} differs from run seed {}", s.seed, self.seed),
                    ));
                }
                if self.mode == Mode::AbCompare && s.aqm == AqmConfig::DropTail {
                    return Err(Error::validation(
                        "aqm.kind",
                        "ab_compare runs both disciplines and needs the rwndq parameters",
                    ));
                }
                s.validate().map_err(|e| Error::validation("scenario", e.to_string()))
            }
            _ => Err(Error::validation(
                "run.mode",
                format!("configuration does not match mode {}", self.mode.as_str()),
            )),
        }
    }

    /// Canonical text form: every key spelled out, base units throughout.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let kv = |s: &mut String, k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(s, "{k} = {v}");
        };
        s.push_str("[run]\n");
        kv(&mut s, "mode", &self.mode.as_str());
        kv(&mut s, "seed", &self.seed);
        kv(&mut s, "out", &self.out_dir.display());
        match &self.config {
            RunConfig::Fluid(c) => {
                s.push_str("\n[fluid]\n");
                kv(&mut s, "interval", &c.interval);
                kv(&mut s, "intervals_per_update", &c.intervals_per_update);
                kv(&mut s, "buffer", &c.buffer_bytes);
                kv(&mut s, "alpha", &c.alpha);
                kv(&mut s, "capacity", &c.capacity_bps);
                kv(&mut s, "rtt", &c.rtt);
                kv(&mut s, "mss", &c.mss);
                kv(&mut s, "slow_start", &c.slow_start);
                kv(&mut s, "horizon", &c.horizon);
            }
            RunConfig::Scenario(c) => {
                let t = &c.topology;
                s.push_str("\n[topology]\n");
                kv(&mut s, "senders", &t.n_senders);
                kv(&mut s, "sender_link", &t.sender_link_bps);
                kv(&mut s, "bottleneck", &t.bottleneck_bps);
                kv(&mut s, "rtt", &t.rtt);
                kv(&mut s, "buffer", &t.buffer_bytes);
                kv(&mut s, "host_buffer", &t.host_buffer_bytes);

                s.push_str("\n[aqm]\n");
                kv(&mut s, "kind", &aqm_kind(&c.aqm));
                if let AqmConfig::Rwndq(p) = &c.aqm {
                    kv(&mut s, "alpha", &p.alpha);
                    kv(&mut s, "interval", &p.interval.as_secs_f64());
                    kv(&mut s, "intervals_per_update", &p.intervals_per_update);
                    kv(&mut s, "slow_start", &p.slow_start);
                    if let Some(m) = p.min_window {
                        kv(&mut s, "min_window", &m);
                    }
                }

                s.push_str("\n[elephants]\n");
                let schedule: Vec<String> = c
                    .elephants
                    .iter()
                    .map(|e| match e.stop {
                        Some(stop) => format!("{}..{}", e.start, stop),
                        None => format!("{}..", e.start),
                    })
                    .collect();
                if schedule.is_empty() {
                    s.push_str("schedule =\n");
                } else {
                    kv(&mut s, "schedule", &schedule.join(", "));
                }

                let m = &c.mice;
                s.push_str("\n[mice]\n");
                kv(&mut s, "count", &m.count);
                kv(&mut s, "size", &m.transfer_size);
                kv(&mut s, "epochs", &m.epochs);
                kv(&mut s, "epoch_start", &m.epoch_start);
                kv(&mut s, "epoch_interval", &m.epoch_interval);

                let tcp = &c.tcp;
                s.push_str("\n[tcp]\n");
                kv(&mut s, "mss", &tcp.mss);
                kv(&mut s, "initial_cwnd", &tcp.initial_cwnd);
                kv(&mut s, "rto_min", &tcp.rto_min.as_secs_f64());
                kv(&mut s, "rto_max", &tcp.rto_max.as_secs_f64());
                kv(&mut s, "window_scale", &tcp.window_scale);
                kv(&mut s, "congestion_control", &tcp.congestion_control);
                kv(&mut s, "dupack_threshold", &tcp.dupack_threshold);

                s.push_str("\n[sim]\n");
                kv(&mut s, "duration", &c.duration);
                kv(&mut s, "bin", &c.bin);
                kv(&mut s, "sample_interval", &c.sample_interval);
                kv(&mut s, "warmup", &c.warmup);
                kv(&mut s, "record_windows", &c.record_windows);
                kv(&mut s, "trace", &c.trace);
            }
        }
        s
    }
}

fn aqm_kind(aqm: &AqmConfig) -> &'static str {
    match aqm {
        AqmConfig::DropTail => "droptail",
        AqmConfig::Rwndq(_) => "rwndq",
    }
}

pub fn parse_scenario(text: &str) -> Result<RunSpec> {
    parse_scenario_as(text, None)
}

/// Parses `text`; `mode`, when given, takes precedence over `run.mode`.
pub fn parse_scenario_as(text: &str, mode: Option<Mode>) -> Result<RunSpec> {
    let doc = Doc::parse(text)?;
    let mode = match mode {
        Some(m) => m,
        None => doc.get("run", "mode", |v| v.parse::<Mode>())?.ok_or_else(|| {
            Error::validation("run.mode", "missing; expected fluid, sim or ab_compare")
        })?,
    };
    let seed = doc.get("run", "seed", parse_int::<u64>)?.unwrap_or(1);
    let out_dir = doc.get("run", "out", |v| Ok(PathBuf::from(v)))?.unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));

    let (allowed, other): (&[&str], &str) = match mode {
        Mode::Fluid => (&["run", "fluid"], "sim"),
        Mode::Sim | Mode::AbCompare => (&["run", "topology", "aqm", "elephants", "mice", "tcp", "sim"], "fluid"),
    };
    if let Some(section) = doc.sections.iter().find(|s| !allowed.contains(s)) {
        return Err(Error::validation(
            *section,
            format!("section is for {other} runs, not {}", mode.as_str()),
        ));
    }

    let config = match mode {
        Mode::Fluid => RunConfig::Fluid(fluid_config(&doc)?),
        Mode::Sim | Mode::AbCompare => RunConfig::Scenario(scenario_config(&doc, seed)?),
    };
    let spec = RunSpec { mode, config, out_dir, seed };
    spec.validate()?;
    Ok(spec)
}

fn fluid_config(doc: &Doc) -> Result<FluidConfig> {
    let mut c = FluidConfig::default();
    let sec = "fluid";
    set(doc, sec, "interval", parse_duration, &mut c.interval)?;
    set(doc, sec, "intervals_per_update", parse_int, &mut c.intervals_per_update)?;
    set(doc, sec, "buffer", parse_size_f64, &mut c.buffer_bytes)?;
    set(doc, sec, "alpha", parse_f64, &mut c.alpha)?;
    set(doc, sec, "capacity", parse_rate, &mut c.capacity_bps)?;
    set(doc, sec, "rtt", parse_duration, &mut c.rtt)?;
    set(doc, sec, "mss", parse_size_f64, &mut c.mss)?;
    set(doc, sec, "slow_start", parse_bool, &mut c.slow_start)?;
    set(doc, sec, "horizon", parse_duration, &mut c.horizon)?;

    positive("fluid.interval", c.interval)?;
    nonzero("fluid.intervals_per_update", c.intervals_per_update as u64)?;
    positive("fluid.buffer", c.buffer_bytes)?;
    fraction("fluid.alpha", c.alpha)?;
    positive("fluid.capacity", c.capacity_bps)?;
    positive("fluid.rtt", c.rtt)?;
    positive("fluid.mss", c.mss)?;
    positive("fluid.horizon", c.horizon)?;
    Ok(c)
}

fn scenario_config(doc: &Doc, seed: u64) -> Result<ScenarioConfig> {
    let mut c = ScenarioConfig { seed, ..ScenarioConfig::default() };

    let sec = "elephants";
    if let Some(schedule) = doc.get(sec, "schedule", parse_schedule)? {
        if let Some(k) = ["count", "start", "stagger", "lifetime"].iter().find(|k| doc.has(sec, k)) {
            return Err(Error::validation(format!("elephants.{k}"), "cannot be combined with schedule"));
        }
        c.elephants = schedule;
    } else {
        let count: usize = doc.get(sec, "count", parse_int)?.unwrap_or(0);
        let start = doc.get(sec, "start", parse_duration)?.unwrap_or(0.0);
        let stagger = doc.get(sec, "stagger", parse_duration)?.unwrap_or(0.0);
        let lifetime = doc.get(sec, "lifetime", parse_duration)?;
        non_negative("elephants.start", start)?;
        non_negative("elephants.stagger", stagger)?;
        if let Some(l) = lifetime {
            positive("elephants.lifetime", l)?;
        }
        c.elephants = (0..count)
            .map(|k| {
                let s = start + k as f64 * stagger;
                ElephantSpec { start: s, stop: lifetime.map(|l| s + l) }
            })
            .collect();
    }

    let mut m = MiceConfig::default();
    let sec = "mice";
    set(doc, sec, "count", parse_int, &mut m.count)?;
    set(doc, sec, "size", parse_size, &mut m.transfer_size)?;
    set(doc, sec, "epochs", parse_int, &mut m.epochs)?;
    set(doc, sec, "epoch_start", parse_duration, &mut m.epoch_start)?;
    set(doc, sec, "epoch_interval", parse_duration, &mut m.epoch_interval)?;
    if m.count > 0 {
        nonzero("mice.size", m.transfer_size)?;
    }
    non_negative("mice.epoch_start", m.epoch_start)?;
    non_negative("mice.epoch_interval", m.epoch_interval)?;
    c.mice = m;

    let mut t = DumbbellConfig { n_senders: (c.elephants.len() + c.mice.count).max(1), ..DumbbellConfig::default() };
    let sec = "topology";
    set(doc, sec, "senders", parse_int, &mut t.n_senders)?;
    set(doc, sec, "sender_link", parse_rate, &mut t.sender_link_bps)?;
    set(doc, sec, "bottleneck", parse_rate, &mut t.bottleneck_bps)?;
    set(doc, sec, "rtt", parse_duration, &mut t.rtt)?;
    set(doc, sec, "buffer", parse_size, &mut t.buffer_bytes)?;
    set(doc, sec, "host_buffer", parse_size, &mut t.host_buffer_bytes)?;
    nonzero("topology.senders", t.n_senders as u64)?;
    positive("topology.sender_link", t.sender_link_bps)?;
    positive("topology.bottleneck", t.bottleneck_bps)?;
    positive("topology.rtt", t.rtt)?;
    nonzero("topology.buffer", t.buffer_bytes)?;
    nonzero("topology.host_buffer", t.host_buffer_bytes)?;

    let sec = "aqm";
    let kind = doc.get(sec, "kind", |v| match v {
        "rwndq" => Ok(true),
        "droptail" => Ok(false),
        _ => Err(format!("unknown aqm `{v}` (expected rwndq or droptail)")),
    })?;
    c.aqm = if kind.unwrap_or(true) {
        let mut p = RwndqParams { buffer_bytes: t.buffer_bytes, ..RwndqParams::default() };
        set(doc, sec, "alpha", parse_f64, &mut p.alpha)?;
        if let Some(v) = doc.get(sec, "interval", parse_duration)? {
            positive("aqm.interval", v)?;
            p.interval = SimTime::from_secs_f64(v);
        }
        set(doc, sec, "intervals_per_update", parse_int, &mut p.intervals_per_update)?;
        set(doc, sec, "slow_start", parse_bool, &mut p.slow_start)?;
        p.min_window = doc.get(sec, "min_window", parse_size)?;
        fraction("aqm.alpha", p.alpha)?;
        nonzero("aqm.interval", p.interval.as_picos())?;
        nonzero("aqm.intervals_per_update", p.intervals_per_update as u64)?;
        AqmConfig::Rwndq(p)
    } else {
        if let Some(k) = RWNDQ_KEYS.iter().find(|k| doc.has(sec, k)) {
            return Err(Error::validation(format!("aqm.{k}"), "only used with kind = rwndq"));
        }
        AqmConfig::DropTail
    };
    c.topology = t;

    let mut tcp = TcpConfig::default();
    let sec = "tcp";
    set(doc, sec, "mss", parse_size, &mut tcp.mss)?;
    set(doc, sec, "initial_cwnd", parse_int, &mut tcp.initial_cwnd)?;
    set_time(doc, sec, "rto_min", &mut tcp.rto_min)?;
    set_time(doc, sec, "rto_max", &mut tcp.rto_max)?;
    set(doc, sec, "window_scale", parse_int, &mut tcp.window_scale)?;
    set(doc, sec, "congestion_control", parse_bool, &mut tcp.congestion_control)?;
    set(doc, sec, "dupack_threshold", parse_int, &mut tcp.dupack_threshold)?;
    nonzero("tcp.mss", tcp.mss as u64)?;
    nonzero("tcp.initial_cwnd", tcp.initial_cwnd as u64)?;
    nonzero("tcp.rto_min", tcp.rto_min.as_picos())?;
    if tcp.rto_max < tcp.rto_min {
        return Err(Error::validation("tcp.rto_max", "smaller than rto_min"));
    }
    if tcp.window_scale > rwndq_core::packet::MAX_WINDOW_SCALE {
        return Err(Error::validation("tcp.window_scale", format!("{} exceeds 14", tcp.window_scale)));
    }
    nonzero("tcp.dupack_threshold", tcp.dupack_threshold as u64)?;
    c.tcp = tcp;

    let sec = "sim";
    set(doc, sec, "duration", parse_duration, &mut c.duration)?;
    set(doc, sec, "bin", parse_duration, &mut c.bin)?;
    set(doc, sec, "sample_interval", parse_duration, &mut c.sample_interval)?;
    set(doc, sec, "warmup", parse_duration, &mut c.warmup)?;
    set(doc, sec, "record_windows", parse_bool, &mut c.record_windows)?;
    set(doc, sec, "trace", parse_bool, &mut c.trace)?;
    positive("sim.duration", c.duration)?;
    positive("sim.bin", c.bin)?;
    positive("sim.sample_interval", c.sample_interval)?;
    non_negative("sim.warmup", c.warmup)?;
    Ok(c)
}

struct Doc {
    entries: BTreeMap<(&'static str, &'static str), (String, usize)>,
    sections: Vec<&'static str>,
}

impl Doc {
    fn parse(text: &str) -> Result<Doc> {
        let mut doc = Doc { entries: BTreeMap::new(), sections: Vec::new() };
        let mut current: Option<(&'static str, &'static [&'static str])> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') || l.starts_with(';') {
                continue;
            }
            let err = |msg: String| Error::Parse { line, msg };
            if let Some(rest) = l.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(format!("unterminated section header `{l}`")))?
                    .trim();
                let &(name, keys) = SECTIONS
                    .iter()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| err(format!("unknown section [{name}]")))?;
                if !doc.sections.contains(&name) {
                    doc.sections.push(name);
                }
                current = Some((name, keys));
                continue;
            }
            let (key, value) = l.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{l}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let (section, keys) = current.ok_or_else(|| err(format!("key `{key}` outside any section")))?;
            let key = *keys
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| err(format!("unknown key `{key}` in [{section}]")))?;
            if let Some((_, first)) = doc.entries.insert((section, key), (value.to_string(), line)) {
                return Err(err(format!("duplicate key `{key}` (first set on line {first})")));
            }
        }
        Ok(doc)
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.entries.keys().any(|(s, k)| *s == section && *k == key)
    }

    fn get<T>(
        &self,
        section: &'static str,
        key: &'static str,
        parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    ) -> Result<Option<T>> {
        match self.entries.get(&(section, key)) {
            None => Ok(None),
            Some((value, line)) => parse(value)
                .map(Some)
                .map_err(|msg| Error::Parse { line: *line, msg: format!("{section}.{key}: {msg}") }),
        }
    }
}

fn set<T>(
    doc: &Doc,
    section: &'static str,
    key: &'static str,
    parse: impl FnOnce(&str) -> std::result::Result<T, String>,
    slot: &mut T,
) -> Result<()> {
    if let Some(v) = doc.get(section, key, parse)? {
        *slot = v;
    }
    Ok(())
}

fn set_time(doc: &Doc, section: &'static str, key: &'static str, slot: &mut SimTime) -> Result<()> {
    if let Some(v) = doc.get(section, key, parse_duration)? {
        non_negative(&format!("{section}.{key}"), v)?;
        *slot = SimTime::from_secs_f64(v);
    }
    Ok(())
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} must be positive")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} must be non-negative")))
    }
}

fn nonzero(field: &str, v: u64) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::validation(field, "must be positive"))
    }
}

fn fraction(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(Error::validation(field, format!("{v} not in (0, 1]")))
    }
}

/// Splits `"100us"` into `(100.0, "us")`.
fn split_unit(s: &str) -> std::result::Result<(f64, &str), String> {
    let idx = s.char_indices().rev().take_while(|(_, c)| c.is_alphabetic()).last().map_or(s.len(), |(i, _)| i);
    let (num, unit) = s.split_at(idx);
    let num = num.trim();
    let x: f64 = num.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok((x, unit))
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    match split_unit(s)? {
        (x, "") => Ok(x),
        (_, u) => Err(format!("unexpected unit `{u}`")),
    }
}

fn parse_int<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|_| format!("`{s}` is not a valid integer"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn parse_duration(s: &str) -> std::result::Result<f64, String> {
    let (x, unit) = split_unit(s)?;
    let div = match unit {
        "" | "s" => 1.0,
        "ms" => 1e3,
        "us" => 1e6,
        "ns" => 1e9,
        _ => return Err(format!("unknown time unit `{unit}`")),
    };
    Ok(x / div)
}

fn parse_rate(s: &str) -> std::result::Result<f64, String> {
    let (x, unit) = split_unit(s)?;
    let mul = match unit.to_ascii_lowercase().as_str() {
        "" | "bps" => 1.0,
        "kbps" => 1e3,
        "mbps" => 1e6,
        "gbps" => 1e9,
        _ => return Err(format!("unknown rate unit `{unit}`")),
    };
    Ok(x * mul)
}

/// A byte count; must come out as a whole, non-negative number.
fn parse_size<T: TryFrom<u64>>(s: &str) -> std::result::Result<T, String> {
    let (x, unit) = split_unit(s)?;
    let mul = match unit {
        "" | "B" => 1.0,
        "KB" => 1e3,
        "MB" => 1e6,
        "KiB" => 1024.0,
        "MiB" => 1024.0 * 1024.0,
        "pkt" | "pkts" => 1500.0,
        _ => return Err(format!("unknown size unit `{unit}`")),
    };
    let bytes = x * mul;
    if bytes < 0.0 || bytes.fract() != 0.0 || bytes > u64::MAX as f64 {
        return Err(format!("`{s}` is not a whole number of bytes"));
    }
    T::try_from(bytes as u64).map_err(|_| format!("`{s}` is out of range"))
}

fn parse_size_f64(s: &str) -> std::result::Result<f64, String> {
    parse_size::<u64>(s).map(|b| b as f64)
}

/// `start..stop` or `start..` items separated by commas.
fn parse_schedule(s: &str) -> std::result::Result<Vec<ElephantSpec>, String> {
    s.split(',')
        .map(str::trim)
        .filter(|item| !item.is_empty())
        .map(|item| {
            let (a, b) = item.split_once("..").ok_or_else(|| format!("`{item}` is not start..stop"))?;
            let start = parse_duration(a.trim())?;
            let stop = match b.trim() {
                "" => None,
                b => Some(parse_duration(b)?),
            };
            if start < 0.0 || stop.is_some_and(|e| e <= start) {
                return Err(format!("`{item}` is not a forward interval"));
            }
            Ok(ElephantSpec { start, stop })
        })
        .collect()
}
