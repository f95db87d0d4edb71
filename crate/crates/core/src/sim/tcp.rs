//! Reno/NewReno TCP endpoints.
//!
//! The sender never puts more than `min(cwnd, rwnd)` bytes in flight, where
//! `rwnd` is the effective receive window of the most recent ACK. The
//! receiver acknowledges every segment immediately (no delayed ACKs) and
//! always advertises the largest window its scale allows, so in practice the
//! window a sender sees is whatever the switches along the path left in it.
//!
//! SYN and FIN do not consume sequence space here; data occupies bytes
//! `0..limit`.

use std::collections::BTreeMap;

use crate::packet::{Flags, FlowKey, TcpSegment};
use crate::time::SimTime;

#[derive(Clone, Debug, PartialEq)]
pub struct TcpConfig {
    /// Payload bytes per full segment.
    pub mss: u32,
    /// Initial congestion window in segments.
    pub initial_cwnd: u32,
    pub rto_min: SimTime,
    pub rto_max: SimTime,
    /// Window scale the receiver advertises with (carried in reserved bits).
    pub window_scale: u8,
    /// When false, cwnd is pinned to infinity and the send window is the
    /// advertised receive window alone.
    pub congestion_control: bool,
    pub dupack_threshold: u32,
}

impl Default for TcpConfig {
    fn default() -> Self {
        TcpConfig {
            mss: 1460,
            initial_cwnd: 2,
            rto_min: SimTime::from_millis(2),
            rto_max: SimTime::from_millis(2000),
            window_scale: 7,
            congestion_control: true,
            dupack_threshold: 3,
        }
    }
}

/// Value used for cwnd when congestion control is off.
const UNLIMITED: u64 = u64::MAX >> 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Phase {
    Idle,
    SynSent,
    Established,
    FinSent,
    Closed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CcState {
    SlowStart,
    CongestionAvoidance,
    FastRecovery,
}

#[derive(Clone, Debug)]
pub struct TcpSender {
    key: FlowKey,
    cfg: TcpConfig,
    phase: Phase,
    cc_state: CcState,
    cwnd: u64,
    ssthresh: u64,
    rwnd_seen: u64,
    snd_una: u64,
    snd_nxt: u64,
    snd_max: u64,
    /// Bytes the application will hand over; `None` while unbounded.
    limit: Option<u64>,
    dupacks: u32,
    recover: Option<u64>,
    srtt: Option<f64>,
    rttvar: f64,
    backoff: u32,
    rto_deadline: Option<SimTime>,
    completed_at: Option<SimTime>,
    retransmitted_bytes: u64,
    timeouts: u64,
    fast_retransmits: u64,
}

impl TcpSender {
    pub fn new(key: FlowKey, cfg: TcpConfig, limit: Option<u64>) -> Self {
        let cwnd = if cfg.congestion_control {
            cfg.initial_cwnd as u64 * cfg.mss as u64
        } else {
            UNLIMITED
        };
        TcpSender {
            key,
            phase: Phase::Idle,
            cc_state: CcState::SlowStart,
            cwnd,
            ssthresh: UNLIMITED,
            rwnd_seen: 0,
            snd_una: 0,
            snd_nxt: 0,
            snd_max: 0,
            limit,
            dupacks: 0,
            recover: None,
            srtt: None,
            rttvar: 0.0,
            backoff: 0,
            rto_deadline: None,
            completed_at: None,
            retransmitted_bytes: 0,
            timeouts: 0,
            fast_retransmits: 0,
            cfg,
        }
    }

    pub fn key(&self) -> FlowKey {
        self.key
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn cc_state(&self) -> CcState {
        self.cc_state
    }

    pub fn cwnd(&self) -> u64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> u64 {
        self.ssthresh
    }

    pub fn rwnd_seen(&self) -> u64 {
        self.rwnd_seen
    }

    /// `min(cwnd, rwnd)`.
    pub fn swnd(&self) -> u64 {
        self.cwnd.min(self.rwnd_seen)
    }

    pub fn in_flight(&self) -> u64 {
        self.snd_nxt - self.snd_una
    }

    pub fn snd_una(&self) -> u64 {
        self.snd_una
    }

    pub fn snd_max(&self) -> u64 {
        self.snd_max
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }

    pub fn completed_at(&self) -> Option<SimTime> {
        self.completed_at
    }

    pub fn rto_deadline(&self) -> Option<SimTime> {
        self.rto_deadline
    }

    pub fn retransmitted_bytes(&self) -> u64 {
        self.retransmitted_bytes
    }

    pub fn timeouts(&self) -> u64 {
        self.timeouts
    }

    pub fn fast_retransmits(&self) -> u64 {
        self.fast_retransmits
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    /// Current timeout: `max(rto_min, srtt + 4 rttvar)`, doubled per
    /// consecutive expiry, capped at `rto_max`.
    pub fn rto(&self) -> SimTime {
        let base = match self.srtt {
            Some(srtt) => SimTime::from_secs_f64(srtt + 4.0 * self.rttvar).max(self.cfg.rto_min),
            None => self.cfg.rto_min,
        };
        base.saturating_mul(1u64 << self.backoff.min(32)).min(self.cfg.rto_max)
    }

    fn data_limit(&self) -> u64 {
        self.limit.unwrap_or(u64::MAX)
    }

    fn segment(&self, now: SimTime, flags: Flags, seq: u64, len: u32) -> TcpSegment {
        let mut seg = TcpSegment::new(self.key, flags);
        seg.seq = seq;
        seg.payload_len = len;
        seg.send_time = now;
        seg.seal();
        seg
    }

    fn arm_rto(&mut self, now: SimTime) {
        self.rto_deadline = Some(now + self.rto());
    }

    /// Sends the SYN.
    pub fn open(&mut self, now: SimTime, out: &mut Vec<TcpSegment>) {
        if self.phase != Phase::Idle {
            return;
        }
        self.phase = Phase::SynSent;
        out.push(self.segment(now, Flags::SYN, 0, 0));
        self.arm_rto(now);
    }

    /// The application stops producing data; whatever is already handed to
    /// TCP is still delivered.
    pub fn stop(&mut self, now: SimTime, out: &mut Vec<TcpSegment>) {
        let sent = self.snd_max;
        self.limit = Some(self.limit.map_or(sent, |l| l.min(sent)));
        if self.phase == Phase::Idle || self.phase == Phase::SynSent {
            self.phase = Phase::Closed;
            self.rto_deadline = None;
            return;
        }
        self.maybe_finish(now, out);
    }

    fn sample_rtt(&mut self, now: SimTime, echo: SimTime) {
        if echo > now {
            return;
        }
        let r = (now - echo).as_secs_f64();
        match self.srtt {
            None => {
                self.srtt = Some(r);
                self.rttvar = r / 2.0;
            }
            Some(srtt) => {
                self.rttvar = 0.75 * self.rttvar + 0.25 * (srtt - r).abs();
                self.srtt = Some(0.875 * srtt + 0.125 * r);
            }
        }
    }

    /// Handles a segment from the receiver. Returns the number of data bytes
    /// newly acknowledged.
    pub fn on_segment(&mut self, now: SimTime, seg: &TcpSegment, out: &mut Vec<TcpSegment>) -> u64 {
        if seg.flags.is_ack() {
            self.rwnd_seen = seg.effective_rwnd();
        }
        match self.phase {
            Phase::SynSent if seg.flags.is_synack() => {
                self.sample_rtt(now, seg.ts_echo);
                self.backoff = 0;
                self.rto_deadline = None;
                self.phase = Phase::Established;
                self.transmit(now, out);
                0
            }
            Phase::Established if seg.flags.is_ack() && !seg.flags.is_synack() => {
                let acked = self.on_ack(now, seg, out);
                self.transmit(now, out);
                acked
            }
            Phase::FinSent if seg.flags.is_fin() => {
                self.phase = Phase::Closed;
                self.rto_deadline = None;
                0
            }
            _ => 0,
        }
    }

    fn on_ack(&mut self, now: SimTime, seg: &TcpSegment, out: &mut Vec<TcpSegment>) -> u64 {
        let mss = self.cfg.mss as u64;
        if seg.ack > self.snd_una {
            let newly = seg.ack - self.snd_una;
            self.snd_una = seg.ack;
            self.snd_nxt = self.snd_nxt.max(self.snd_una);
            self.sample_rtt(now, seg.ts_echo);
            self.backoff = 0;
            self.dupacks = 0;

            if self.cfg.congestion_control {
                match self.cc_state {
                    CcState::FastRecovery => {
                        if self.recover.is_some_and(|r| seg.ack >= r) {
                            self.cwnd = self.ssthresh.max(mss);
                            self.cc_state = CcState::CongestionAvoidance;
                        } else {
                            // partial ACK: next hole is lost too
                            self.retransmit_head(now, out);
                            self.cwnd = self.cwnd.saturating_sub(newly).max(mss) + mss;
                        }
                    }
                    CcState::SlowStart => {
                        self.cwnd += mss;
                        if self.cwnd >= self.ssthresh {
                            self.cc_state = CcState::CongestionAvoidance;
                        }
                    }
                    CcState::CongestionAvoidance => {
                        self.cwnd += (mss * mss / self.cwnd).max(1);
                    }
                }
            } else if self.cc_state == CcState::FastRecovery {
                if self.recover.is_some_and(|r| seg.ack >= r) {
                    self.cc_state = CcState::CongestionAvoidance;
                } else {
                    self.retransmit_head(now, out);
                }
            }

            if self.in_flight() > 0 {
                self.arm_rto(now);
            } else {
                self.rto_deadline = None;
            }
            self.maybe_finish(now, out);
            return newly;
        }

        let is_dup = seg.ack == self.snd_una
            && seg.payload_len == 0
            && self.snd_max > self.snd_una
            && !seg.flags.is_fin();
        if !is_dup {
            return 0;
        }
        self.dupacks += 1;
        if self.cc_state == CcState::FastRecovery {
            if self.cfg.congestion_control {
                self.cwnd += mss;
            }
        } else if self.dupacks == self.cfg.dupack_threshold
            && self.recover.is_none_or(|r| self.snd_una > r)
        {
            let flight = self.in_flight();
            self.recover = Some(self.snd_max);
            if self.cfg.congestion_control {
                self.ssthresh = (flight / 2).max(2 * mss);
                self.cwnd = self.ssthresh + 3 * mss;
            }
            self.cc_state = CcState::FastRecovery;
            self.fast_retransmits += 1;
            self.retransmit_head(now, out);
            self.arm_rto(now);
        }
        0
    }

    fn retransmit_head(&mut self, now: SimTime, out: &mut Vec<TcpSegment>) {
        let end = self.snd_max.min(self.data_limit());
        if self.snd_una >= end {
            return;
        }
        let len = (end - self.snd_una).min(self.cfg.mss as u64) as u32;
        self.retransmitted_bytes += len as u64;
        out.push(self.segment(now, Flags::NONE, self.snd_una, len));
    }

    fn maybe_finish(&mut self, now: SimTime, out: &mut Vec<TcpSegment>) {
        let Some(limit) = self.limit else { return };
        if self.phase != Phase::Established || self.snd_una < limit {
            return;
        }
        if self.completed_at.is_none() {
            self.completed_at = Some(now);
        }
        self.phase = Phase::FinSent;
        self.backoff = 0;
        out.push(self.segment(now, Flags::FIN, limit, 0));
        self.arm_rto(now);
    }

    /// Emits new (or go-back-N) data allowed by the send window.
    fn transmit(&mut self, now: SimTime, out: &mut Vec<TcpSegment>) {
        if self.phase != Phase::Established {
            return;
        }
        let mss = self.cfg.mss as u64;
        let limit = self.data_limit();
        while self.snd_nxt < limit {
            let flight = self.in_flight();
            let usable = self.swnd().saturating_sub(flight);
            let full = (limit - self.snd_nxt).min(mss);
            // sub-MSS segments only when nothing is outstanding, so a window
            // rounded below one MSS cannot stall the flow
            let len = if usable >= full {
                full
            } else if flight == 0 && usable > 0 {
                usable
            } else {
                break;
            };
            self.send_data(now, len as u32, out);
        }
        if self.rto_deadline.is_none() && (self.in_flight() > 0 || self.snd_nxt < limit) {
            // with nothing in flight this doubles as a persist timer
            self.arm_rto(now);
        }
    }

    fn send_data(&mut self, now: SimTime, len: u32, out: &mut Vec<TcpSegment>) {
        if self.snd_nxt < self.snd_max {
            self.retransmitted_bytes += len as u64;
        }
        out.push(self.segment(now, Flags::NONE, self.snd_nxt, len));
        self.snd_nxt += len as u64;
        self.snd_max = self.snd_max.max(self.snd_nxt);
    }

    /// The retransmission timer fired at `now`.
    pub fn on_timeout(&mut self, now: SimTime, out: &mut Vec<TcpSegment>) {
        if self.rto_deadline.is_none_or(|d| d > now) {
            return;
        }
        self.rto_deadline = None;
        let mss = self.cfg.mss as u64;
        match self.phase {
            Phase::SynSent => {
                self.backoff += 1;
                out.push(self.segment(now, Flags::SYN, 0, 0));
                self.arm_rto(now);
            }
            Phase::FinSent => {
                self.backoff += 1;
                let limit = self.data_limit();
                out.push(self.segment(now, Flags::FIN, limit, 0));
                self.arm_rto(now);
            }
            Phase::Established => {
                let flight = self.in_flight();
                self.backoff += 1;
                if flight == 0 {
                    // window probe
                    let limit = self.data_limit();
                    if self.snd_nxt < limit {
                        let len = (limit - self.snd_nxt).min(mss) as u32;
                        self.send_data(now, len, out);
                    }
                    self.arm_rto(now);
                    return;
                }
                self.timeouts += 1;
                if self.cfg.congestion_control {
                    self.ssthresh = (flight / 2).max(2 * mss);
                    self.cwnd = mss;
                }
                self.cc_state = CcState::SlowStart;
                self.recover = Some(self.snd_max);
                self.dupacks = 0;
                self.snd_nxt = self.snd_una;
                let before = out.len();
                self.transmit(now, out);
                if out.len() == before {
                    // window closed below one segment: resend the head anyway
                    let len = (self.snd_max - self.snd_una).min(mss) as u32;
                    self.send_data(now, len, out);
                }
                self.arm_rto(now);
            }
            Phase::Idle | Phase::Closed => {}
        }
    }
}

#[derive(Clone, Debug)]
pub struct TcpReceiver {
    key: FlowKey,
    window_scale: u8,
    rcv_nxt: u64,
    out_of_order: BTreeMap<u64, u64>,
    fin_replied: bool,
}

impl TcpReceiver {
    /// `key` is the receiver's own orientation (source = receiver).
    pub fn new(key: FlowKey, window_scale: u8) -> Self {
        TcpReceiver {
            key,
            window_scale,
            rcv_nxt: 0,
            out_of_order: BTreeMap::new(),
            fin_replied: false,
        }
    }

    pub fn rcv_nxt(&self) -> u64 {
        self.rcv_nxt
    }

    fn reply(&self, now: SimTime, flags: Flags, echo: SimTime) -> TcpSegment {
        let mut seg = TcpSegment::new(self.key, flags);
        seg.ack = self.rcv_nxt;
        seg.rwnd_field = u16::MAX;
        seg.scale_bits = self.window_scale;
        seg.send_time = now;
        seg.ts_echo = echo;
        seg.seal();
        seg
    }

    pub fn on_segment(&mut self, now: SimTime, seg: &TcpSegment, out: &mut Vec<TcpSegment>) {
        if seg.flags.is_syn() {
            out.push(self.reply(now, Flags::SYNACK, seg.send_time));
            return;
        }
        if seg.flags.is_fin() {
            let flags = if self.fin_replied { Flags::ACK } else { Flags::FINACK };
            self.fin_replied = true;
            out.push(self.reply(now, flags, seg.send_time));
            return;
        }
        if seg.payload_len == 0 {
            return;
        }
        let (start, end) = (seg.seq, seg.seq + seg.payload_len as u64);
        if start <= self.rcv_nxt {
            self.rcv_nxt = self.rcv_nxt.max(end);
            while let Some((&s, &e)) = self.out_of_order.first_key_value() {
                if s > self.rcv_nxt {
                    break;
                }
                self.rcv_nxt = self.rcv_nxt.max(e);
                self.out_of_order.pop_first();
            }
        } else {
            let e = self.out_of_order.entry(start).or_insert(end);
            *e = (*e).max(end);
        }
        out.push(self.reply(now, Flags::ACK, seg.send_time));
    }
}
