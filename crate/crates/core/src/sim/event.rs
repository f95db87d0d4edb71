use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::time::SimTime;

use super::{ConnId, LinkId, Packet};

#[derive(Debug)]
pub enum EventKind {
    /// Serialization of the head packet on a link finished.
    TxComplete { link: LinkId },
    /// A packet reached the far end of a link.
    Arrival { link: LinkId, pkt: Packet },
    /// RWNDQ increment interval on a link's port.
    PortTimer { link: LinkId },
    FlowStart { conn: ConnId },
    FlowStop { conn: ConnId },
    Rto { conn: ConnId },
    Sample,
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::TxComplete { .. } => "packet_departure",
            EventKind::Arrival { .. } => "packet_arrival",
            EventKind::PortTimer { .. } => "timer",
            EventKind::FlowStart { .. } => "flow_start",
            EventKind::FlowStop { .. } => "flow_stop",
            EventKind::Rto { .. } => "timeout",
            EventKind::Sample => "sample",
        }
    }
}

#[derive(Debug)]
pub struct Event {
    pub time: SimTime,
    pub seq: u64,
    pub kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        (self.time, self.seq) == (other.time, other.seq)
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        (other.time, other.seq).cmp(&(self.time, self.seq))
    }
}

/// Pending events ordered by `(time, seq)`; `seq` is a global insertion
/// counter so simultaneous events pop in scheduling order.
#[derive(Debug, Default)]
pub struct EventQueue {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl EventQueue {
    pub fn schedule(&mut self, time: SimTime, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, kind });
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}
