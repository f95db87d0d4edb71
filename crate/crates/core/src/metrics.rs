//! Run statistics: per-flow goodput and FCT, queue occupancy, utilization
//! and fairness.

use crate::error::{Error, Result};
use crate::packet::FlowKey;
use crate::port::PortSnapshot;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FlowKind {
    Elephant,
    Mouse,
}

impl FlowKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FlowKind::Elephant => "elephant",
            FlowKind::Mouse => "mouse",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowRecord {
    pub id: usize,
    pub key: FlowKey,
    pub kind: FlowKind,
    pub start: f64,
    pub stop: Option<f64>,
    /// Start of transfer to last byte acknowledged; `None` if unfinished.
    pub fct: Option<f64>,
    /// Application bytes acknowledged.
    pub bytes: u64,
    /// `bytes` over the flow's active span, bits per second.
    pub goodput_bps: f64,
    pub retransmitted_bytes: u64,
    pub timeouts: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QueueSample {
    pub t: f64,
    pub bytes: u64,
    /// Time-weighted mean occupancy over the interval ending at `t`.
    pub avg_bytes: f64,
    pub drops_cum: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortSample {
    pub t: f64,
    pub state: PortSnapshot,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSample {
    pub t: f64,
    pub flow: usize,
    pub in_flight: u64,
    pub rwnd: u64,
    pub cwnd: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub kind: &'static str,
    pub flow: Option<usize>,
    pub queue_bytes: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkDrops {
    pub name: String,
    pub drops: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricsReport {
    /// Simulated time covered.
    pub duration: f64,
    pub bin: f64,
    pub sample_interval: f64,
    pub bottleneck_bps: f64,
    pub flows: Vec<FlowRecord>,
    /// Acknowledged bytes per flow per bin.
    pub goodput_bins: Vec<Vec<u64>>,
    /// Bytes put on the bottleneck wire per bin.
    pub bottleneck_tx_bins: Vec<u64>,
    pub queue: Vec<QueueSample>,
    pub port: Vec<PortSample>,
    pub windows: Vec<WindowSample>,
    pub link_drops: Vec<LinkDrops>,
    pub bottleneck_drops: u64,
    pub trace: Vec<TraceRecord>,
}

impl MetricsReport {
    pub fn is_empty(&self) -> bool {
        self.flows.is_empty()
    }

    /// Goodput of `flow` in bin `i`, bits per second.
    pub fn goodput_bps(&self, flow: usize, bin: usize) -> f64 {
        let bytes = self.goodput_bins[flow].get(bin).copied().unwrap_or(0);
        bytes as f64 * 8.0 / self.bin
    }

    /// Goodput of `flow` over `[from, to)`, bits per second. Bin-aligned.
    pub fn goodput_between(&self, flow: usize, from: f64, to: f64) -> f64 {
        let (a, b) = self.bin_range(from, to);
        if b <= a {
            return 0.0;
        }
        let bytes: u64 = (a..b).map(|i| self.goodput_bins[flow].get(i).copied().unwrap_or(0)).sum();
        bytes as f64 * 8.0 / ((b - a) as f64 * self.bin)
    }

    fn bin_range(&self, from: f64, to: f64) -> (usize, usize) {
        let a = (from / self.bin - 1e-9).ceil().max(0.0) as usize;
        let b = (to / self.bin + 1e-9).floor().max(0.0) as usize;
        (a, b)
    }

    pub fn num_bins(&self) -> usize {
        (self.duration / self.bin + 1e-9).ceil() as usize
    }

    /// Flows transferring data during the whole of bin `i`.
    pub fn active_in_bin(&self, bin: usize, kind: Option<FlowKind>) -> Vec<usize> {
        let (lo, hi) = (bin as f64 * self.bin, (bin + 1) as f64 * self.bin);
        self.flows
            .iter()
            .filter(|f| kind.is_none_or(|k| f.kind == k))
            .filter(|f| {
                let end = f.fct.map(|d| f.start + d).or(f.stop).unwrap_or(f64::INFINITY);
                f.start <= lo && end >= hi
            })
            .map(|f| f.id)
            .collect()
    }

    /// Jain index of per-bin goodput over the flows of `kind` active in
    /// each bin; bins with no active flow are skipped.
    pub fn jain_series(&self, kind: Option<FlowKind>) -> Vec<(f64, f64)> {
        (0..self.num_bins())
            .filter_map(|i| {
                let active = self.active_in_bin(i, kind);
                let rates: Vec<f64> = active.iter().map(|&f| self.goodput_bps(f, i)).collect();
                jain_index(&rates).ok().map(|j| (i as f64 * self.bin, j))
            })
            .collect()
    }

    /// Completion times of finished mice.
    pub fn mouse_fcts(&self) -> Vec<f64> {
        self.flows
            .iter()
            .filter(|f| f.kind == FlowKind::Mouse)
            .filter_map(|f| f.fct)
            .collect()
    }

    pub fn unfinished_mice(&self) -> usize {
        self.flows
            .iter()
            .filter(|f| f.kind == FlowKind::Mouse && f.fct.is_none())
            .count()
    }

    /// Time-weighted mean bottleneck occupancy over `(after, end]`.
    pub fn mean_queue_after(&self, after: f64) -> f64 {
        let tail: Vec<f64> = self.queue.iter().filter(|s| s.t > after).map(|s| s.avg_bytes).collect();
        if tail.is_empty() {
            0.0
        } else {
            tail.iter().sum::<f64>() / tail.len() as f64
        }
    }

    pub fn utilization(&self) -> Vec<f64> {
        utilization(&self.bottleneck_tx_bins, self.bottleneck_bps, self.bin)
    }

    pub fn persistent_queue(&self, window: f64) -> Vec<(f64, f64)> {
        persistent_queue(&self.queue, window)
    }
}

/// `(sum x)^2 / (n * sum x^2)`. All-zero input counts as an equal split.
pub fn jain_index(throughputs: &[f64]) -> Result<f64> {
    if throughputs.is_empty() {
        return Err(Error::EmptyInput);
    }
    if let Some(x) = throughputs.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::validation("throughputs", format!("{x} is not a non-negative rate")));
    }
    let sum: f64 = throughputs.iter().sum();
    let sum_sq: f64 = throughputs.iter().map(|x| x * x).sum();
    if sum_sq == 0.0 {
        return Ok(1.0);
    }
    Ok(sum * sum / (throughputs.len() as f64 * sum_sq))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FctStats {
    pub count: usize,
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    /// Nearest-rank 99th percentile.
    pub p99: f64,
    pub max: f64,
    /// Sorted `(value, cumulative fraction)` pairs.
    pub cdf: Vec<(f64, f64)>,
}

impl FctStats {
    pub fn fraction_below(&self, threshold: f64) -> f64 {
        self.cdf.iter().filter(|(v, _)| *v < threshold).count() as f64 / self.count as f64
    }
}

pub fn fct_stats(fcts: &[f64]) -> Result<FctStats> {
    if fcts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut sorted = fcts.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let variance = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    let rank = ((0.99 * n as f64).ceil() as usize).clamp(1, n);
    let cdf = sorted
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, (i + 1) as f64 / n as f64))
        .collect();
    Ok(FctStats {
        count: n,
        mean,
        variance,
        p99: sorted[rank - 1],
        max: sorted[n - 1],
        cdf,
    })
}

/// Bytes dequeued per bin over `capacity * bin`, capped at 1.
pub fn utilization(dequeued_per_bin: &[u64], capacity_bps: f64, bin: f64) -> Vec<f64> {
    let per_bin = capacity_bps / 8.0 * bin;
    dequeued_per_bin
        .iter()
        .map(|&b| (b as f64 / per_bin).min(1.0))
        .collect()
}

/// Sliding time-weighted mean of queue occupancy over `window` seconds.
pub fn persistent_queue(samples: &[QueueSample], window: f64) -> Vec<(f64, f64)> {
    if samples.is_empty() {
        return Vec::new();
    }
    let interval = if samples.len() > 1 { samples[1].t - samples[0].t } else { samples[0].t };
    let width = ((window / interval).round() as usize).max(1);
    let mut sum = 0.0;
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            sum += s.avg_bytes;
            if i >= width {
                sum -= samples[i - width].avg_bytes;
            }
            (s.t, sum / (i + 1).min(width) as f64)
        })
        .collect()
}
