//! CSV and text serialization of run results.
//!
//! Numbers are printed with Rust's shortest round-trip float formatting so
//! that identical runs produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::fluid::FluidSample;
use crate::metrics::{fct_stats, FctStats, FlowKind, MetricsReport};

const PACKET_BYTES: f64 = 1500.0;

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// `flow_id,type,start,fct,bytes,goodput`. `fct` is empty for flows that
/// did not complete; goodput is in bits per second.
pub fn write_flows<W: Write>(r: &MetricsReport, w: W) -> Result<()> {
    let mut out = writer(w, &["flow_id", "type", "start", "fct", "bytes", "goodput"])?;
    for f in &r.flows {
        out.write_record([
            f.id.to_string(),
            f.kind.as_str().to_string(),
            f.start.to_string(),
            opt(f.fct),
            f.bytes.to_string(),
            f.goodput_bps.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t,Q_bytes,drops_cum` for the bottleneck port.
pub fn write_queue<W: Write>(r: &MetricsReport, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "Q_bytes", "drops_cum"])?;
    for s in &r.queue {
        out.write_record([s.t.to_string(), s.bytes.to_string(), s.drops_cum.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t,Q_persistent_bytes`, the sliding-window mean occupancy.
pub fn write_persistent_queue<W: Write>(r: &MetricsReport, window: f64, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "Q_persistent_bytes"])?;
    for (t, q) in r.persistent_queue(window) {
        out.write_record([t.to_string(), q.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t,utilization`; `t` is the start of each bin.
pub fn write_util<W: Write>(r: &MetricsReport, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "utilization"])?;
    for (i, u) in r.utilization().iter().enumerate() {
        out.write_record([(i as f64 * r.bin).to_string(), u.to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t,flow_id,goodput`: one row per bin for every flow that sent in the bin
/// or was active for all of it.
pub fn write_goodput<W: Write>(r: &MetricsReport, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "flow_id", "goodput"])?;
    for i in 0..r.num_bins() {
        let active = r.active_in_bin(i, None);
        for f in &r.flows {
            let bytes = r.goodput_bins[f.id].get(i).copied().unwrap_or(0);
            if bytes > 0 || active.binary_search(&f.id).is_ok() {
                out.write_record([(i as f64 * r.bin).to_string(), f.id.to_string(), r.goodput_bps(f.id, i).to_string()])?;
            }
        }
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t,rwnd,flows,gamma,slow_start,Q_bytes`, one row per RWNDQ timer tick.
pub fn write_port<W: Write>(r: &MetricsReport, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "rwnd", "flows", "gamma", "slow_start", "Q_bytes"])?;
    for p in &r.port {
        let s = &p.state;
        out.write_record([
            p.t.to_string(),
            s.rwnd.to_string(),
            s.flows.to_string(),
            s.gamma.to_string(),
            s.slow_start.to_string(),
            s.queue_bytes.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t,flow_id,in_flight,rwnd,cwnd`, sampled on every ACK a sender takes.
pub fn write_windows<W: Write>(r: &MetricsReport, w: W) -> Result<()> {
    let mut out = writer(w, &["t", "flow_id", "in_flight", "rwnd", "cwnd"])?;
    for s in &r.windows {
        out.write_record([
            s.t.to_string(),
            s.flow.to_string(),
            s.in_flight.to_string(),
            s.rwnd.to_string(),
            s.cwnd.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `time,kind,flow,queue_Q`.
pub fn write_trace<W: Write>(r: &MetricsReport, w: W) -> Result<()> {
    let mut out = writer(w, &["time", "kind", "flow", "queue_Q"])?;
    for e in &r.trace {
        out.write_record([
            e.t.to_string(),
            e.kind.to_string(),
            e.flow.map(|f| f.to_string()).unwrap_or_default(),
            e.queue_bytes.to_string(),
        ])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// `t_seconds,w_bytes,q_bytes,q_packets`.
pub fn write_fluid<W: Write>(samples: &[FluidSample], w: W) -> Result<()> {
    let mut out = writer(w, &["t_seconds", "w_bytes", "q_bytes", "q_packets"])?;
    for s in samples {
        out.write_record([s.t.to_string(), s.w.to_string(), s.q.to_string(), (s.q / PACKET_BYTES).to_string()])?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Headline numbers of one packet-level run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub flows: usize,
    pub mice: usize,
    pub unfinished_mice: usize,
    pub bottleneck_drops: u64,
    pub total_drops: u64,
    /// Time-averaged bottleneck occupancy after the warmup.
    pub mean_queue_bytes: f64,
    pub mean_utilization: f64,
    /// Mean and minimum per-bin Jain index over the elephants after the
    /// warmup.
    pub jain_mean: Option<f64>,
    pub jain_min: Option<f64>,
    pub fct: Option<FctStats>,
}

impl RunSummary {
    pub fn new(r: &MetricsReport, warmup: f64) -> Self {
        let jain: Vec<f64> = r
            .jain_series(Some(FlowKind::Elephant))
            .into_iter()
            .filter(|(t, _)| *t >= warmup)
            .map(|(_, j)| j)
            .collect();
        let util = r.utilization();
        let util_after: Vec<f64> = util
            .iter()
            .enumerate()
            .filter(|(i, _)| *i as f64 * r.bin >= warmup)
            .map(|(_, u)| *u)
            .collect();
        RunSummary {
            flows: r.flows.len(),
            mice: r.flows.iter().filter(|f| f.kind == FlowKind::Mouse).count(),
            unfinished_mice: r.unfinished_mice(),
            bottleneck_drops: r.bottleneck_drops,
            total_drops: r.link_drops.iter().map(|l| l.drops).sum(),
            mean_queue_bytes: r.mean_queue_after(warmup),
            mean_utilization: mean(&util_after).unwrap_or(0.0),
            jain_mean: mean(&jain),
            jain_min: jain.iter().copied().reduce(f64::min),
            fct: fct_stats(&r.mouse_fcts()).ok(),
        }
    }

    /// Fraction of all mice, finished or not, that completed in under
    /// `threshold` seconds.
    pub fn mice_below(&self, threshold: f64) -> f64 {
        match &self.fct {
            Some(s) if self.mice > 0 => s.fraction_below(threshold) * s.count as f64 / self.mice as f64,
            _ => 0.0,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "flows            {}", self.flows);
        let _ = writeln!(s, "bottleneck drops {}", self.bottleneck_drops);
        let _ = writeln!(s, "total drops      {}", self.total_drops);
        let _ = writeln!(
            s,
            "mean queue       {:.0} B ({:.2} pkts)",
            self.mean_queue_bytes,
            self.mean_queue_bytes / PACKET_BYTES
        );
        let _ = writeln!(s, "mean utilization {:.4}", self.mean_utilization);
        match (self.jain_mean, self.jain_min) {
            (Some(m), Some(lo)) => {
                let _ = writeln!(s, "jain (elephants) mean {m:.4} min {lo:.4}");
            }
            _ => {
                let _ = writeln!(s, "jain (elephants) n/a");
            }
        }
        let _ = writeln!(s, "mice             {} ({} unfinished)", self.mice, self.unfinished_mice);
        if let Some(f) = &self.fct {
            let _ = writeln!(
                s,
                "mice fct         mean {:.6} s  var {:.3e} s^2  p99 {:.6} s  max {:.6} s",
                f.mean, f.variance, f.p99, f.max
            );
        }
        s
    }
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, std::io::BufWriter<fs::File>)> {
    let path = dir.join(name);
    let file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, std::io::BufWriter::new(file)))
}

/// Writes every CSV for `r` plus `summary.txt` into `dir` and returns the
/// paths written. Optional series are written only when recorded.
pub fn write_run_dir(r: &MetricsReport, summary: &RunSummary, persistent_window: f64, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    macro_rules! emit {
        ($name:expr, $f:expr) => {{
            let (path, w) = create(dir, $name)?;
            $f(w)?;
            written.push(path);
        }};
    }
    emit!("flows.csv", |w| write_flows(r, w));
    emit!("queue.csv", |w| write_queue(r, w));
    emit!("persistent_queue.csv", |w| write_persistent_queue(r, persistent_window, w));
    emit!("util.csv", |w| write_util(r, w));
    emit!("goodput.csv", |w| write_goodput(r, w));
    if !r.port.is_empty() {
        emit!("port.csv", |w| write_port(r, w));
    }
    if !r.windows.is_empty() {
        emit!("windows.csv", |w| write_windows(r, w));
    }
    if !r.trace.is_empty() {
        emit!("trace.csv", |w| write_trace(r, w));
    }
    let path = dir.join("summary.txt");
    fs::write(&path, summary.to_text()).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

/// Writes `fluid.csv` into `dir`.
pub fn write_fluid_dir(samples: &[FluidSample], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let (path, w) = create(dir, "fluid.csv")?;
    write_fluid(samples, w)?;
    Ok(vec![path])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{FlowRecord, QueueSample};
    use crate::packet::FlowKey;

    fn tiny() -> MetricsReport {
        let key = FlowKey { src: 0, dst: 1, sport: 10000, dport: 5001 };
        MetricsReport {
            duration: 0.02,
            bin: 0.01,
            sample_interval: 0.01,
            bottleneck_bps: 10e9,
            flows: vec![
                FlowRecord {
                    id: 0,
                    key,
                    kind: FlowKind::Mouse,
                    start: 0.0,
                    stop: None,
                    fct: Some(0.0005),
                    bytes: 10_000,
                    goodput_bps: 1.6e8,
                    retransmitted_bytes: 0,
                    timeouts: 0,
                },
                FlowRecord {
                    id: 1,
                    key,
                    kind: FlowKind::Mouse,
                    start: 0.001,
                    stop: None,
                    fct: None,
                    bytes: 2920,
                    goodput_bps: 0.0,
                    retransmitted_bytes: 1460,
                    timeouts: 1,
                },
            ],
            goodput_bins: vec![vec![10_000, 0], vec![2920, 0]],
            bottleneck_tx_bins: vec![15_000, 0],
            queue: vec![
                QueueSample { t: 0.01, bytes: 3000, avg_bytes: 1500.0, drops_cum: 1 },
                QueueSample { t: 0.02, bytes: 0, avg_bytes: 0.0, drops_cum: 1 },
            ],
            bottleneck_drops: 1,
            ..MetricsReport::default()
        }
    }

    #[test]
    fn flows_csv_leaves_unfinished_fct_blank() {
        let mut buf = Vec::new();
        write_flows(&tiny(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "flow_id,type,start,fct,bytes,goodput\n0,mouse,0,0.0005,10000,160000000\n1,mouse,0.001,,2920,0\n"
        );
    }

    #[test]
    fn queue_and_util_csv() {
        let mut q = Vec::new();
        write_queue(&tiny(), &mut q).unwrap();
        assert_eq!(String::from_utf8(q).unwrap(), "t,Q_bytes,drops_cum\n0.01,3000,1\n0.02,0,1\n");
        let mut u = Vec::new();
        write_util(&tiny(), &mut u).unwrap();
        assert_eq!(String::from_utf8(u).unwrap(), "t,utilization\n0,0.0012\n0.01,0\n");
    }

    #[test]
    fn fluid_csv_reports_packets() {
        let mut buf = Vec::new();
        write_fluid(&[FluidSample { t: 0.0, w: 25_000.0, q: 3000.0 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t_seconds,w_bytes,q_bytes,q_packets\n0,25000,3000,2\n");
    }

    #[test]
    fn summary_counts_unfinished_mice_against_the_fraction() {
        let s = RunSummary::new(&tiny(), 0.0);
        assert_eq!(s.mice, 2);
        assert_eq!(s.unfinished_mice, 1);
        assert_eq!(s.mice_below(0.2), 0.5);
        assert!(s.to_text().contains("bottleneck drops 1"));
        assert_eq!(s.jain_mean, None);
    }

    #[test]
    fn run_dir_lists_its_files() {
        let dir = tempfile::tempdir().unwrap();
        let r = tiny();
        let files = write_run_dir(&r, &RunSummary::new(&r, 0.0), 0.005, dir.path()).unwrap();
        let names: Vec<_> = files.iter().map(|p| p.file_name().unwrap().to_str().unwrap().to_string()).collect();
        assert_eq!(
            names,
            ["flows.csv", "queue.csv", "persistent_queue.csv", "util.csv", "goodput.csv", "summary.txt"]
        );
        assert!(files.iter().all(|p| p.exists()));
    }
}
