//! Central monitors.
//!
//! Monitors sweep their share of the nodes every tick and answer queries:
//! on its own tick a node asks the monitor(s) owning its targets and adopts
//! any record newer than the one it holds.

use crate::sim::world::{Observation, World};
use crate::topology::NodeId;

#[derive(Debug, Clone)]
pub struct Centralised {
    n: usize,
    monitors: usize,
    // latest record per node, kept by the node's owning monitor
    records: Vec<Observation>,
    interval: Vec<u64>,
    totals: Vec<u64>,
    seen: Vec<bool>,
}

impl Centralised {
    pub fn new(n: usize, monitors: usize) -> Self {
        assert!(monitors >= 1);
        Centralised {
            n,
            monitors,
            records: vec![Observation::INITIAL; n],
            interval: vec![0; monitors],
            totals: vec![0; monitors],
            seen: vec![false; monitors],
        }
    }

    pub fn monitor_count(&self) -> usize {
        self.monitors
    }

    /// Monitor responsible for `node`: ids are split into contiguous,
    /// near-equal ranges.
    pub fn owner(&self, node: NodeId) -> usize {
        (node as usize * self.monitors) / self.n
    }

    pub fn range(&self, monitor: usize) -> std::ops::Range<usize> {
        let start = (monitor * self.n).div_ceil(self.monitors);
        let end = ((monitor + 1) * self.n).div_ceil(self.monitors);
        start..end
    }

    pub fn record(&self, node: NodeId) -> Observation {
        self.records[node as usize]
    }

    pub fn accesses_total(&self, monitor: usize) -> u64 {
        self.totals[monitor]
    }

    pub fn sweep(&mut self, world: &mut World, monitor: usize, now: f64) {
        let range = self.range(monitor);
        let polled = range.len() as u64;
        for node in range {
            self.records[node] = Observation {
                alive: world.is_alive(node as NodeId),
                at: now,
            };
            world.exchange_with_infra(node as NodeId);
        }
        self.interval[monitor] += polled;
        self.totals[monitor] += polled;
    }

    pub fn node_query(&mut self, world: &mut World, node: NodeId) {
        if !world.is_alive(node) {
            return;
        }
        self.seen.fill(false);
        for slot in world.slots(node) {
            let target = world.record(slot).target;
            let m = self.owner(target);
            if !self.seen[m] {
                self.seen[m] = true;
                world.exchange_with_infra(node);
                self.interval[m] += 1;
                self.totals[m] += 1;
            }
            world.merge(node, slot, self.records[target as usize]);
        }
    }

    /// Accesses of the busiest monitor since the last call.
    pub fn take_peak(&mut self) -> u64 {
        let peak = self.interval.iter().copied().max().unwrap_or(0);
        self.interval.fill(0);
        peak
    }
}
