//! Discrete-time fluid model of the switch window and queue.
//!
//! Time advances in steps of the increment interval `T`. The local window
//! `w` only changes once every `M` steps, by the increment accumulated from
//! the `M` queue samples of that epoch (or by two MSS while slow start is
//! on). The queue integrates the window-limited arrival rate, `w/rtt`,
//! delayed by half an RTT, against the link drain `C`, and is clipped at zero
//! but not at the buffer size.
//!
//! Congestion control at the sources is assumed off: every source sends
//! exactly one window per RTT.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FluidConfig {
    /// Increment interval `T`, seconds.
    pub interval: f64,
    pub intervals_per_update: u32,
    pub buffer_bytes: f64,
    pub alpha: f64,
    /// Link capacity in bits per second.
    pub capacity_bps: f64,
    pub rtt: f64,
    pub mss: f64,
    pub slow_start: bool,
    /// Simulated span, seconds.
    pub horizon: f64,
}

impl Default for FluidConfig {
    fn default() -> Self {
        FluidConfig {
            interval: 50e-6,
            intervals_per_update: 10,
            buffer_bytes: 83.0 * 1500.0,
            alpha: 0.2,
            capacity_bps: 10e9,
            rtt: 100e-6,
            mss: 1500.0,
            slow_start: true,
            horizon: 1.0,
        }
    }
}

impl FluidConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.interval > 0.0 && self.interval.is_finite()) {
            return bad(format!("T = {} must be positive", self.interval));
        }
        if self.intervals_per_update == 0 {
            return bad("M must be at least 1".into());
        }
        if !(self.buffer_bytes > 0.0 && self.buffer_bytes.is_finite()) {
            return bad(format!("B = {} must be positive", self.buffer_bytes));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha = {} not in (0, 1]", self.alpha));
        }
        if !(self.capacity_bps > 0.0) {
            return bad(format!("C = {} must be positive", self.capacity_bps));
        }
        if !(self.rtt > 0.0 && self.rtt.is_finite()) {
            return bad(format!("rtt = {} must be positive", self.rtt));
        }
        if !(self.mss > 0.0 && self.mss.is_finite()) {
            return bad(format!("mss = {} must be positive", self.mss));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon = {} must be non-negative", self.horizon));
        }
        Ok(())
    }

    pub fn target_bytes(&self) -> f64 {
        self.alpha * self.buffer_bytes
    }

    /// Half-RTT feedback delay in whole steps.
    pub fn delay_steps(&self) -> usize {
        (self.rtt / (2.0 * self.interval)).round() as usize
    }

    /// Bytes drained per step, `C * T`.
    fn drain_per_step(&self) -> f64 {
        self.capacity_bps / 8.0 * self.interval
    }

    pub fn steps(&self) -> usize {
        (self.horizon / self.interval + 1e-9).floor() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FluidSample {
    pub t: f64,
    pub w: f64,
    pub q: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    pub step: u64,
    pub w: f64,
    pub q: f64,
    pub gamma: f64,
    pub ticks: u32,
    pub slow_start: bool,
    /// `w` at steps `step - delay ..= step`, oldest first.
    w_history: VecDeque<f64>,
}

impl FluidState {
    /// `w(0) = alpha * B`, `q(0) = 0`.
    pub fn new(cfg: &FluidConfig) -> Self {
        let w0 = cfg.target_bytes();
        FluidState {
            step: 0,
            w: w0,
            q: 0.0,
            gamma: 0.0,
            ticks: 0,
            slow_start: cfg.slow_start,
            w_history: std::iter::repeat_n(w0, cfg.delay_steps() + 1).collect(),
        }
    }

    pub fn sample(&self, cfg: &FluidConfig) -> FluidSample {
        FluidSample {
            t: self.step as f64 * cfg.interval,
            w: self.w,
            q: self.q,
        }
    }

    /// Advances the state by one interval.
    pub fn step(&mut self, cfg: &FluidConfig) {
        let target = cfg.target_bytes();
        let m = cfg.intervals_per_update;

        // increment from the previous queue sample, q(t - T)
        self.gamma += cfg.mss / m as f64 * (1.0 - self.q / target);
        self.ticks += 1;
        if self.ticks == m {
            if self.slow_start {
                self.w += 2.0 * cfg.mss;
            } else {
                self.w += self.gamma;
            }
            if self.q >= target {
                self.slow_start = false;
            }
            self.gamma = 0.0;
            self.ticks = 0;
        }

        self.w_history.pop_front();
        self.w_history.push_back(self.w);
        let delayed_w = self.w_history[0];
        let arrivals = cfg.interval / cfg.rtt * delayed_w;
        self.q = (self.q + arrivals - cfg.drain_per_step()).max(0.0);
        self.step += 1;
    }
}

/// Advances `state` by one step and returns it.
pub fn fluid_step(mut state: FluidState, cfg: &FluidConfig) -> FluidState {
    state.step(cfg);
    state
}

/// Runs the model from its initial state, one sample per interval over
/// `[0, horizon)`.
pub fn run_fluid(cfg: &FluidConfig) -> Result<Vec<FluidSample>> {
    cfg.validate()?;
    let n = cfg.steps();
    let mut state = FluidState::new(cfg);
    let mut series = Vec::with_capacity(n);
    for i in 0..n {
        if i > 0 {
            state.step(cfg);
        }
        series.push(state.sample(cfg));
    }
    Ok(series)
}

/// The epoch increment computed in one go from `M` queue samples:
/// `MSS * (1 - mean(q) / target)`. Summing the per-interval increments
/// gives the same value.
pub fn batch_increment(queue_samples: &[f64], mss: f64, target: f64) -> f64 {
    let mean = queue_samples.iter().sum::<f64>() / queue_samples.len() as f64;
    mss * (1.0 - mean / target)
}

/// Cumulative time average of the queue, `(t, mean q over [0, t])`.
pub fn mean_queue(series: &[FluidSample]) -> Vec<(f64, f64)> {
    let mut sum = 0.0;
    series
        .iter()
        .enumerate()
        .map(|(i, s)| {
            sum += s.q;
            (s.t, sum / (i + 1) as f64)
        })
        .collect()
}

/// First time after which `value` stays within `target * (1 ± band)` until
/// the end of the series.
pub fn convergence_time<I>(series: I, target: f64, band: f64) -> Result<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    if !(band > 0.0 && band < 1.0) {
        return Err(Error::InvalidConfig(format!("band {band} not in (0, 1)")));
    }
    let (lo, hi) = (target * (1.0 - band), target * (1.0 + band));
    let mut settled_at = None;
    for (t, v) in series {
        if (lo..=hi).contains(&v) {
            settled_at.get_or_insert(t);
        } else {
            settled_at = None;
        }
    }
    settled_at.ok_or(Error::NotConverged)
}

/// First time the value reaches `level` or above.
pub fn first_reach<I>(series: I, level: f64) -> Option<f64>
where
    I: IntoIterator<Item = (f64, f64)>,
{
    series.into_iter().find(|&(_, v)| v >= level).map(|(t, _)| t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queue_stays_empty_until_pipe_fills() {
        let cfg = FluidConfig { horizon: 0.01, ..FluidConfig::default() };
        let series = run_fluid(&cfg).unwrap();
        // w(0) = 24900 B is far below the 125000 B pipe
        assert!(series.iter().all(|s| s.q == 0.0));
        assert!(series.last().unwrap().w > series[0].w);
    }

    #[test]
    fn on_target_queue_is_a_fixed_point() {
        let cfg = FluidConfig { slow_start: false, ..FluidConfig::default() };
        let target = cfg.target_bytes();
        // pick w so that arrivals match the drain exactly, q held at target
        let mut st = FluidState::new(&cfg);
        st.q = target;
        st.w = cfg.capacity_bps / 8.0 * cfg.rtt;
        st.w_history.iter_mut().for_each(|w| *w = st.w);
        for _ in 0..100 {
            st.step(&cfg);
        }
        assert!((st.q - target).abs() < 1e-6);
        assert!((st.w - cfg.capacity_bps / 8.0 * cfg.rtt).abs() < 1e-6);
    }

    #[test]
    fn empty_horizon() {
        let cfg = FluidConfig { horizon: 0.0, ..FluidConfig::default() };
        assert!(run_fluid(&cfg).unwrap().is_empty());
    }

    #[test]
    fn infinite_capacity_drains_everything() {
        let cfg = FluidConfig {
            capacity_bps: f64::INFINITY,
            slow_start: false,
            horizon: 0.01,
            ..FluidConfig::default()
        };
        let series = run_fluid(&cfg).unwrap();
        assert!(series.iter().all(|s| s.q == 0.0));
        // 200 steps = 20 epochs, each adding one MSS
        let last = series.last().unwrap();
        assert_eq!(series.len(), 200);
        assert!((last.w - (cfg.target_bytes() + 19.0 * cfg.mss)).abs() < 1e-6);
    }

    #[test]
    fn delay_rounds_to_steps() {
        assert_eq!(FluidConfig::default().delay_steps(), 1);
        let cfg = FluidConfig { rtt: 10e-6, ..FluidConfig::default() };
        assert_eq!(cfg.delay_steps(), 0);
        assert!(run_fluid(&cfg).is_ok());
    }

    #[test]
    fn invalid_configs() {
        for cfg in [
            FluidConfig { interval: 0.0, ..FluidConfig::default() },
            FluidConfig { intervals_per_update: 0, ..FluidConfig::default() },
            FluidConfig { alpha: 1.5, ..FluidConfig::default() },
            FluidConfig { capacity_bps: 0.0, ..FluidConfig::default() },
            FluidConfig { horizon: -1.0, ..FluidConfig::default() },
        ] {
            assert!(matches!(run_fluid(&cfg), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn convergence_examples() {
        let flat: Vec<_> = (0..10).map(|i| (i as f64, 5.0)).collect();
        assert_eq!(convergence_time(flat, 5.0, 0.1).unwrap(), 0.0);
        let never: Vec<_> = (0..10).map(|i| (i as f64, 0.0)).collect();
        assert!(matches!(convergence_time(never, 5.0, 0.1), Err(Error::NotConverged)));
        let late = vec![(0.0, 5.0), (1.0, 9.0), (2.0, 5.1), (3.0, 4.9)];
        assert_eq!(convergence_time(late, 5.0, 0.1).unwrap(), 2.0);
        assert!(convergence_time(Vec::new(), 5.0, 0.1).is_err());
        assert!(matches!(convergence_time(vec![(0.0, 1.0)], 1.0, 1.0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn deterministic() {
        let cfg = FluidConfig { horizon: 0.05, ..FluidConfig::default() };
        assert_eq!(run_fluid(&cfg).unwrap(), run_fluid(&cfg).unwrap());
    }
}
