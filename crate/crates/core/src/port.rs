//! Per-output-port RWNDQ state.
//!
//! Each port keeps one window shared by every flow crossing it. Flows are
//! counted from SYN-ACK and FIN segments, the shared window is rescaled when
//! the count changes, and a periodic timer nudges it up or down in
//! proportion to how far the queue sits from its target. ACKs crossing the
//! port have their receive window clamped to the shared value.
//!
//! The state stores the *aggregate* window (per-flow window times the number
//! of flows) rather than the per-flow value. Rescaling by `n/(n+1)` on a join
//! and `(n+1)/n` on a leave then leaves the aggregate untouched, so joins and
//! leaves are exactly reversible in integer arithmetic, and the per-flow
//! window is `aggregate / flows` rounded down.

use crate::error::{Error, Result};
use crate::packet::TcpSegment;
use crate::time::SimTime;

#[derive(Clone, Debug, PartialEq)]
pub struct RwndqParams {
    /// Increment interval `T`.
    pub interval: SimTime,
    /// Increment intervals per window update, `M`.
    pub intervals_per_update: u32,
    /// Port buffer `B` in bytes.
    pub buffer_bytes: u64,
    /// Target occupancy as a fraction of the buffer, `alpha`.
    pub alpha: f64,
    pub slow_start: bool,
    /// Lower bound on the per-flow window. `None` means one MSS as observed
    /// on the port.
    pub min_window: Option<u64>,
}

impl Default for RwndqParams {
    fn default() -> Self {
        RwndqParams {
            interval: SimTime::from_micros(50),
            intervals_per_update: 10,
            buffer_bytes: 125_000,
            alpha: 0.2,
            slow_start: true,
            min_window: None,
        }
    }
}

impl RwndqParams {
    pub fn validate(&self) -> Result<()> {
        if self.interval == SimTime::ZERO {
            return Err(Error::InvalidParams("T must be positive".into()));
        }
        if self.intervals_per_update == 0 {
            return Err(Error::InvalidParams("M must be at least 1".into()));
        }
        if self.buffer_bytes == 0 {
            return Err(Error::InvalidParams("B must be positive".into()));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::InvalidParams(format!("alpha {} not in (0, 1]", self.alpha)));
        }
        Ok(())
    }

    /// `alpha * B` in whole bytes.
    pub fn target_bytes(&self) -> u64 {
        (self.alpha * self.buffer_bytes as f64).floor() as u64
    }
}

/// Values exported once per timer tick for the time series.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PortSnapshot {
    pub rwnd: u64,
    pub flows: u64,
    pub gamma: i64,
    pub slow_start: bool,
    pub queue_bytes: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PortState {
    params: RwndqParams,
    target: u64,
    aggregate: u64,
    flows: u64,
    /// Accumulated increment of the current update epoch, in bytes.
    gamma: i64,
    ticks: u32,
    mss: u32,
    slow_start: bool,
}

impl PortState {
    pub fn new(params: RwndqParams) -> Result<Self> {
        params.validate()?;
        let target = params.target_bytes();
        Ok(PortState {
            slow_start: params.slow_start,
            params,
            target,
            aggregate: target,
            flows: 0,
            gamma: 0,
            ticks: 0,
            mss: 0,
        })
    }

    /// A port already carrying `flows` flows at per-flow window `rwnd`.
    pub fn with_flows(params: RwndqParams, flows: u64, rwnd: u64) -> Result<Self> {
        let mut state = PortState::new(params)?;
        state.flows = flows;
        state.aggregate = rwnd * flows.max(1);
        Ok(state)
    }

    pub fn params(&self) -> &RwndqParams {
        &self.params
    }

    /// Per-flow window in bytes; this is the fair share conveyed to senders.
    pub fn rwnd(&self) -> u64 {
        self.aggregate / self.flows.max(1)
    }

    pub fn fair_share(&self) -> u64 {
        self.rwnd()
    }

    pub fn flows(&self) -> u64 {
        self.flows
    }

    pub fn gamma(&self) -> i64 {
        self.gamma
    }

    pub fn ticks(&self) -> u32 {
        self.ticks
    }

    pub fn mss(&self) -> u32 {
        self.mss
    }

    pub fn slow_start(&self) -> bool {
        self.slow_start
    }

    pub fn target(&self) -> u64 {
        self.target
    }

    pub fn min_window(&self) -> u64 {
        self.params.min_window.unwrap_or(self.mss as u64).max(1)
    }

    pub fn snapshot(&self, queue_bytes: u64) -> PortSnapshot {
        PortSnapshot {
            rwnd: self.rwnd(),
            flows: self.flows,
            gamma: self.gamma,
            slow_start: self.slow_start,
            queue_bytes,
        }
    }

    /// Feeds the MSS estimate without touching flow accounting. Used for
    /// data segments leaving through the port's egress queue.
    pub fn observe_payload(&mut self, payload_len: u32) {
        self.mss = self.mss.max(payload_len);
    }

    fn reset_window(&mut self) {
        self.aggregate = self.target;
    }

    /// Processes a segment of the reverse (ACK) path crossing this port.
    ///
    /// Returns true if the receive window was rewritten. The segment's
    /// effective window never increases.
    pub fn on_packet_departure(&mut self, segment: &mut TcpSegment) -> bool {
        self.observe_payload(segment.payload_len);

        if segment.flags.is_synack() {
            if self.flows == 0 {
                self.reset_window();
            }
            // aggregate is unchanged: rwnd * n/(n+1) per flow over n+1 flows
            self.flows += 1;
        }

        if segment.flags.is_fin() {
            self.flows = self.flows.saturating_sub(1);
            if self.flows == 0 {
                self.reset_window();
                self.slow_start = self.params.slow_start;
            }
        }

        let rwnd = self.rwnd();
        if segment.flags.is_ack() && rwnd <= segment.effective_rwnd() {
            let before = segment.rwnd_field;
            segment.rewrite_effective_rwnd(rwnd);
            return segment.rwnd_field != before;
        }
        false
    }

    /// One increment interval elapsed with `queue_bytes` in the queue.
    pub fn on_timer_tick(&mut self, queue_bytes: u64) {
        let m = self.params.intervals_per_update as i128;
        let target = self.target.max(1) as i128;
        // kappa * mss / M with kappa = 1 - Q / target, floored.
        let num = (target - queue_bytes as i128) * self.mss as i128;
        let step = num.div_euclid(target * m);
        self.gamma = self.gamma.saturating_add(step.clamp(i64::MIN as i128, i64::MAX as i128) as i64);
        self.ticks += 1;

        if self.ticks >= self.params.intervals_per_update {
            let flows = self.flows.max(1);
            let delta = if self.slow_start {
                2 * self.mss as i128 * flows as i128
            } else {
                // per-flow increment gamma / flows, over `flows` flows
                self.gamma as i128
            };
            let aggregate = (self.aggregate as i128 + delta).max(0);
            self.aggregate = aggregate.min(u64::MAX as i128) as u64;
            if queue_bytes >= self.target {
                self.slow_start = false;
            }
            self.gamma = 0;
            self.ticks = 0;
        }

        let floor = self.min_window() * self.flows.max(1);
        if self.aggregate < floor {
            self.aggregate = floor;
        }
    }
}
