//! Node aliveness, belief stores and access accounting.
//!
//! Beliefs live in one flat array indexed by *slot*: node `i`'s slots are
//! `offsets[i]..offsets[i+1]`, in the same order as its out-list, so the key
//! set of every belief store is its subscription list by construction.
//! Each node also keeps a running count of wrong beliefs, updated whenever a
//! belief or a target's aliveness changes, which makes the per-second probe
//! O(n).

use std::ops::Range;

use crate::topology::{NodeId, SubscriptionGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefRecord {
    pub target: NodeId,
    pub believed_alive: bool,
    /// Time of the direct observation this belief derives from; forwarding
    /// keeps it unchanged. `-inf` marks a record the holder must re-learn.
    pub observed_at: f64,
}

impl BeliefRecord {
    pub fn age(&self, now: f64) -> f64 {
        now - self.observed_at
    }
}

/// An aliveness observation held by infrastructure (monitors, aggregators).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub alive: bool,
    pub at: f64,
}

impl Observation {
    pub const INITIAL: Observation = Observation { alive: true, at: 0.0 };
}

#[derive(Debug, Clone)]
pub struct World {
    n: usize,
    offsets: Vec<usize>,
    beliefs: Vec<BeliefRecord>,
    // (holder, slot) pairs for every subscription to a target, CSR by target
    in_offsets: Vec<usize>,
    in_slots: Vec<(NodeId, u32)>,
    alive: Vec<bool>,
    wrong: Vec<u32>,
    alive_list: Vec<NodeId>,
    alive_pos: Vec<u32>,
    accesses_total: Vec<u64>,
    interval_node_accesses: u64,
    interval_infra_accesses: u64,
    interval_exchanges: u64,
    total_exchanges: u64,
    phase: Vec<f64>,
}

impl World {
    /// All nodes alive, every belief correct and observed at t = 0.
    pub fn new(graph: &SubscriptionGraph) -> Self {
        let n = graph.n;
        let mut offsets = Vec::with_capacity(n + 1);
        let mut beliefs = Vec::with_capacity(graph.edge_count());
        offsets.push(0);
        for targets in &graph.out_edges {
            beliefs.extend(targets.iter().map(|&t| BeliefRecord {
                target: t,
                believed_alive: true,
                observed_at: 0.0,
            }));
            offsets.push(beliefs.len());
        }

        let mut in_offsets = vec![0usize; n + 1];
        for b in &beliefs {
            in_offsets[b.target as usize + 1] += 1;
        }
        for i in 0..n {
            in_offsets[i + 1] += in_offsets[i];
        }
        let mut fill = in_offsets.clone();
        let mut in_slots = vec![(0, 0); beliefs.len()];
        for holder in 0..n {
            for slot in offsets[holder]..offsets[holder + 1] {
                let t = beliefs[slot].target as usize;
                in_slots[fill[t]] = (holder as NodeId, slot as u32);
                fill[t] += 1;
            }
        }

        World {
            n,
            offsets,
            beliefs,
            in_offsets,
            in_slots,
            alive: vec![true; n],
            wrong: vec![0; n],
            alive_list: (0..n as NodeId).collect(),
            alive_pos: (0..n as u32).collect(),
            accesses_total: vec![0; n],
            interval_node_accesses: 0,
            interval_infra_accesses: 0,
            interval_exchanges: 0,
            total_exchanges: 0,
            phase: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_alive(&self, node: NodeId) -> bool {
        self.alive[node as usize]
    }

    pub fn alive_count(&self) -> usize {
        self.alive_list.len()
    }

    /// The `i`-th currently alive node, in unspecified but deterministic order.
    pub fn alive_at(&self, i: usize) -> NodeId {
        self.alive_list[i]
    }

    pub fn slots(&self, node: NodeId) -> Range<usize> {
        self.offsets[node as usize]..self.offsets[node as usize + 1]
    }

    pub fn slot_range_all(&self) -> Range<usize> {
        0..self.beliefs.len()
    }

    pub fn record(&self, slot: usize) -> &BeliefRecord {
        &self.beliefs[slot]
    }

    pub fn beliefs_of(&self, node: NodeId) -> &[BeliefRecord] {
        &self.beliefs[self.slots(node)]
    }

    /// The node's belief about `target`, if it subscribes to it.
    pub fn belief(&self, node: NodeId, target: NodeId) -> Option<&BeliefRecord> {
        self.beliefs_of(node).iter().find(|b| b.target == target)
    }

    /// Subscribers of `target` as `(holder, slot)` pairs.
    pub fn subscribers(&self, target: NodeId) -> &[(NodeId, u32)] {
        &self.in_slots[self.in_offsets[target as usize]..self.in_offsets[target as usize + 1]]
    }

    pub fn phase(&self, node: NodeId) -> f64 {
        self.phase[node as usize]
    }

    pub(crate) fn set_phases(&mut self, phases: Vec<f64>) {
        debug_assert_eq!(phases.len(), self.n);
        self.phase = phases;
    }

    pub fn accesses_total(&self, node: NodeId) -> u64 {
        self.accesses_total[node as usize]
    }

    pub fn total_exchanges(&self) -> u64 {
        self.total_exchanges
    }

    pub fn wrong_count(&self, node: NodeId) -> u32 {
        self.wrong[node as usize]
    }

    #[inline]
    fn is_wrong(&self, slot: usize) -> bool {
        let b = &self.beliefs[slot];
        b.believed_alive != self.alive[b.target as usize]
    }

    /// Overwrites `holder`'s belief at `slot`.
    #[inline]
    pub fn set_belief(&mut self, holder: NodeId, slot: usize, believed_alive: bool, observed_at: f64) {
        let was = self.is_wrong(slot);
        let b = &mut self.beliefs[slot];
        b.believed_alive = believed_alive;
        b.observed_at = observed_at;
        let now_wrong = self.is_wrong(slot);
        if was != now_wrong {
            let w = &mut self.wrong[holder as usize];
            if now_wrong {
                *w += 1;
            } else {
                *w -= 1;
            }
        }
    }

    /// Direct observation of the target's true aliveness at `now`.
    #[inline]
    pub fn observe(&mut self, holder: NodeId, slot: usize, now: f64) {
        let t = self.beliefs[slot].target;
        let alive = self.alive[t as usize];
        self.set_belief(holder, slot, alive, now);
    }

    /// Adopts `obs` at `slot` iff it is strictly newer than the held record.
    #[inline]
    pub fn merge(&mut self, holder: NodeId, slot: usize, obs: Observation) -> bool {
        if obs.at > self.beliefs[slot].observed_at {
            self.set_belief(holder, slot, obs.alive, obs.at);
            true
        } else {
            false
        }
    }

    /// Flips `node`'s aliveness. A node that comes back marks its whole
    /// belief store stale. Returns the new state.
    pub fn toggle(&mut self, node: NodeId) -> bool {
        let i = node as usize;
        let now_alive = !self.alive[i];
        self.alive[i] = now_alive;
        // every subscriber's correctness about `node` flips
        for idx in self.in_offsets[i]..self.in_offsets[i + 1] {
            let (holder, slot) = self.in_slots[idx];
            if self.is_wrong(slot as usize) {
                self.wrong[holder as usize] += 1;
            } else {
                self.wrong[holder as usize] -= 1;
            }
        }
        if now_alive {
            for slot in self.slots(node) {
                self.beliefs[slot].observed_at = f64::NEG_INFINITY;
            }
            self.alive_pos[i] = self.alive_list.len() as u32;
            self.alive_list.push(node);
        } else {
            let pos = self.alive_pos[i] as usize;
            let last = *self.alive_list.last().expect("node was alive");
            self.alive_list.swap_remove(pos);
            if last != node {
                self.alive_pos[last as usize] = pos as u32;
            }
        }
        now_alive
    }

    /// One request/response between two subscriber nodes.
    #[inline]
    pub fn exchange(&mut self, a: NodeId, b: NodeId) {
        self.accesses_total[a as usize] += 1;
        self.accesses_total[b as usize] += 1;
        self.interval_node_accesses += 2;
        self.interval_exchanges += 1;
        self.total_exchanges += 1;
    }

    /// One exchange between a subscriber node and an infrastructure entity;
    /// the entity's own counter is kept by the protocol.
    #[inline]
    pub fn exchange_with_infra(&mut self, node: NodeId) {
        self.accesses_total[node as usize] += 1;
        self.interval_node_accesses += 1;
        self.interval_infra_accesses += 1;
        self.interval_exchanges += 1;
        self.total_exchanges += 1;
    }

    /// One exchange between two infrastructure entities.
    #[inline]
    pub fn exchange_infra_pair(&mut self) {
        self.interval_infra_accesses += 2;
        self.interval_exchanges += 1;
        self.total_exchanges += 1;
    }

    /// Alive nodes holding at least one wrong belief.
    pub fn inconsistent_count(&self) -> usize {
        self.alive.iter().zip(&self.wrong).filter(|(&a, &w)| a && w > 0).count()
    }

    /// Same as [`inconsistent_count`](Self::inconsistent_count), recomputed
    /// from scratch without the incremental counters.
    pub fn inconsistent_count_brute(&self) -> usize {
        (0..self.n)
            .filter(|&i| {
                self.alive[i]
                    && self.beliefs[self.offsets[i]..self.offsets[i + 1]]
                        .iter()
                        .any(|b| b.believed_alive != self.alive[b.target as usize])
            })
            .count()
    }

    /// Returns `(node accesses, infra accesses, exchanges)` since the last
    /// call and resets them.
    pub fn take_interval(&mut self) -> IntervalCounts {
        let c = IntervalCounts {
            node_accesses: self.interval_node_accesses,
            infra_accesses: self.interval_infra_accesses,
            exchanges: self.interval_exchanges,
        };
        self.interval_node_accesses = 0;
        self.interval_infra_accesses = 0;
        self.interval_exchanges = 0;
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IntervalCounts {
    pub node_accesses: u64,
    pub infra_accesses: u64,
    pub exchanges: u64,
}
