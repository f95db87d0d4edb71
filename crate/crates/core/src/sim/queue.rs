//! FIFO output queues with a tail-drop limit and an optional RWNDQ port.

use std::collections::VecDeque;

use crate::port::PortState;
use crate::time::SimTime;

use super::Packet;

#[derive(Clone, Debug)]
pub enum Aqm {
    DropTail,
    Rwndq(Box<PortState>),
}

impl Aqm {
    pub fn port(&self) -> Option<&PortState> {
        match self {
            Aqm::DropTail => None,
            Aqm::Rwndq(p) => Some(p),
        }
    }

    pub fn port_mut(&mut self) -> Option<&mut PortState> {
        match self {
            Aqm::DropTail => None,
            Aqm::Rwndq(p) => Some(p),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Enqueue {
    Accepted,
    Dropped,
}

#[derive(Clone, Debug)]
pub struct OutQueue {
    limit: u64,
    backlog: VecDeque<Packet>,
    bytes: u64,
    pub aqm: Aqm,
    drops: u64,
    dequeued_bytes: u64,
    // time integral of the occupancy, byte-picoseconds
    area: u128,
    last_change: SimTime,
}

impl OutQueue {
    pub fn new(limit: u64, aqm: Aqm) -> Self {
        OutQueue {
            limit,
            backlog: VecDeque::new(),
            bytes: 0,
            aqm,
            drops: 0,
            dequeued_bytes: 0,
            area: 0,
            last_change: SimTime::ZERO,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Occupancy `Q` in bytes.
    pub fn bytes(&self) -> u64 {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.backlog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.backlog.is_empty()
    }

    pub fn drops(&self) -> u64 {
        self.drops
    }

    pub fn dequeued_bytes(&self) -> u64 {
        self.dequeued_bytes
    }

    fn advance(&mut self, now: SimTime) {
        if now > self.last_change {
            self.area += self.bytes as u128 * (now - self.last_change).as_picos() as u128;
            self.last_change = now;
        }
    }

    /// Occupancy integrated over time up to `now`, in byte-seconds.
    pub fn occupancy_integral(&mut self, now: SimTime) -> f64 {
        self.advance(now);
        self.area as f64 / 1e12
    }

    pub fn enqueue(&mut self, now: SimTime, pkt: Packet) -> Enqueue {
        let size = pkt.wire_bytes as u64;
        if self.bytes + size > self.limit {
            self.drops += 1;
            return Enqueue::Dropped;
        }
        self.advance(now);
        self.bytes += size;
        self.backlog.push_back(pkt);
        self.check();
        Enqueue::Accepted
    }

    pub fn dequeue(&mut self, now: SimTime) -> Option<Packet> {
        let pkt = self.backlog.pop_front()?;
        self.advance(now);
        self.bytes -= pkt.wire_bytes as u64;
        self.dequeued_bytes += pkt.wire_bytes as u64;
        self.check();
        Some(pkt)
    }

    #[inline]
    fn check(&self) {
        debug_assert!(self.bytes <= self.limit);
    }

    /// Queue law: the occupancy counter equals the backlog's byte sum and
    /// respects the limit. O(backlog), so the engine only calls it when
    /// invariant checking is switched on.
    pub fn verify(&self) -> bool {
        self.bytes <= self.limit
            && self.bytes == self.backlog.iter().map(|p| p.wire_bytes as u64).sum::<u64>()
    }
}
