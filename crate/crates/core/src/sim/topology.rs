use std::collections::VecDeque;

use crate::port::RwndqParams;
use crate::time::SimTime;

pub type NodeId = usize;
pub type LinkId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Host,
    Switch,
}

/// One direction of a physical link together with the output queue that
/// feeds it.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSpec {
    pub name: String,
    pub from: NodeId,
    pub to: NodeId,
    pub capacity_bps: f64,
    pub prop_delay: SimTime,
    pub buffer_bytes: u64,
    /// RWNDQ on this output port; `None` is plain DropTail.
    pub rwndq: Option<RwndqParams>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub nodes: Vec<NodeKind>,
    pub links: Vec<LinkSpec>,
    pub senders: Vec<NodeId>,
    pub receiver: NodeId,
    pub bottleneck: LinkId,
}

impl Topology {
    /// The link running the opposite direction between the same two nodes.
    pub fn reverse_of(&self, link: LinkId) -> Option<LinkId> {
        let l = &self.links[link];
        self.links.iter().position(|r| r.from == l.to && r.to == l.from)
    }

    /// `next_hop[node][dst]`: outgoing link on a shortest path, by BFS from
    /// each destination over reversed links. Ties break towards the lower
    /// link id, so routing is deterministic.
    pub fn next_hops(&self) -> Vec<Vec<Option<LinkId>>> {
        let n = self.nodes.len();
        let mut table = vec![vec![None; n]; n];
        for dst in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[dst] = 0;
            let mut frontier = VecDeque::from([dst]);
            while let Some(v) = frontier.pop_front() {
                for (id, l) in self.links.iter().enumerate() {
                    if l.to == v && dist[l.from] == usize::MAX {
                        dist[l.from] = dist[v] + 1;
                        table[l.from][dst] = Some(id);
                        frontier.push_back(l.from);
                    }
                }
            }
        }
        table
    }

    /// One-way propagation delay from `src` to `dst` along the routed path.
    pub fn path_delay(&self, src: NodeId, dst: NodeId) -> Option<SimTime> {
        let hops = self.next_hops();
        let mut at = src;
        let mut total = SimTime::ZERO;
        while at != dst {
            let link = hops[at][dst]?;
            total += self.links[link].prop_delay;
            at = self.links[link].to;
        }
        Some(total)
    }
}
