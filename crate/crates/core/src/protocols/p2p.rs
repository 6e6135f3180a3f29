//! Peer-to-peer heartbeats.
//!
//! Simple: every tick a node polls each of its targets directly.
//!
//! Transitive: a node only polls targets whose record is at least `t_fresh`
//! old, and every answered poll also carries the responder's records for
//! the requester's other subscriptions. Forwarded records keep their
//! original observation time and are adopted only when strictly newer than
//! what the requester holds and no older than `max_age`.

use crate::rng;
use crate::sim::world::World;

use super::config::ForwardStamp;
use crate::topology::NodeId;

/// Tolerance on the freshness gate so a record observed exactly one poll
/// interval ago is re-polled despite float rounding in tick times.
const FRESH_EPS: f64 = 1e-9;

pub fn simple_p2p_tick(world: &mut World, node: NodeId, now: f64) {
    if !world.is_alive(node) {
        return;
    }
    for slot in world.slots(node) {
        let target = world.record(slot).target;
        world.exchange(node, target);
        world.observe(node, slot, now);
    }
}

/// Shared subscriptions between each requester and each of its targets.
#[derive(Debug, Clone)]
pub struct Overlap {
    offsets: Vec<usize>,
    // (responder slot, requester slot) for a target both of them track
    pairs: Vec<(u32, u32)>,
}

impl Overlap {
    pub fn build(world: &World) -> Self {
        let n = world.n() as NodeId;
        let sorted: Vec<Vec<(NodeId, u32)>> = (0..n)
            .map(|i| {
                let mut v: Vec<_> = world.slots(i).map(|s| (world.record(s).target, s as u32)).collect();
                v.sort_unstable();
                v
            })
            .collect();

        let total = world.slot_range_all().len();
        let mut offsets = Vec::with_capacity(total + 1);
        let mut pairs = Vec::new();
        offsets.push(0);
        for requester in 0..n {
            let mine = &sorted[requester as usize];
            for slot in world.slots(requester) {
                let theirs = &sorted[world.record(slot).target as usize];
                let (mut a, mut b) = (0, 0);
                while a < mine.len() && b < theirs.len() {
                    match mine[a].0.cmp(&theirs[b].0) {
                        std::cmp::Ordering::Less => a += 1,
                        std::cmp::Ordering::Greater => b += 1,
                        std::cmp::Ordering::Equal => {
                            pairs.push((theirs[b].1, mine[a].1));
                            a += 1;
                            b += 1;
                        }
                    }
                }
                offsets.push(pairs.len());
            }
        }
        Overlap { offsets, pairs }
    }

    pub fn shared(&self, slot: usize) -> &[(u32, u32)] {
        &self.pairs[self.offsets[slot]..self.offsets[slot + 1]]
    }

    /// Mean number of shared subscriptions per edge.
    pub fn mean_shared(&self) -> f64 {
        let edges = self.offsets.len().saturating_sub(1);
        if edges == 0 {
            0.0
        } else {
            self.pairs.len() as f64 / edges as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct Transitive {
    pub overlap: Overlap,
    pub t_fresh: f64,
    pub max_age: f64,
    pub stamp: ForwardStamp,
    salt: u64,
    polls: u64,
    adopted: u64,
}

impl Transitive {
    pub fn new(world: &World, t_fresh: f64, max_age: f64, stamp: ForwardStamp, salt: u64) -> Self {
        Transitive {
            overlap: Overlap::build(world),
            t_fresh,
            max_age,
            stamp,
            salt,
            polls: 0,
            adopted: 0,
        }
    }

    /// Direct polls made so far.
    pub fn polls(&self) -> u64 {
        self.polls
    }

    /// Records adopted from piggybacked replies so far.
    pub fn adopted(&self) -> u64 {
        self.adopted
    }

    pub fn tick(&mut self, world: &mut World, node: NodeId, now: f64) {
        if !world.is_alive(node) {
            return;
        }
        let range = world.slots(node);
        let len = range.len();
        if len == 0 {
            return;
        }
        // start the sweep at a different target every tick
        let start = (rng::mix(self.salt ^ node as u64, now.to_bits()) % len as u64) as usize;
        self.sweep(world, node, now, start);
    }

    /// Visits the node's targets in out-list order beginning at index `start`.
    pub fn sweep(&mut self, world: &mut World, node: NodeId, now: f64, start: usize) {
        let range = world.slots(node);
        let len = range.len();
        for j in 0..len {
            let slot = range.start + (start + j) % len;
            let rec = *world.record(slot);
            if rec.age(now) < self.t_fresh - FRESH_EPS {
                continue;
            }
            world.exchange(node, rec.target);
            world.observe(node, slot, now);
            self.polls += 1;
            if !world.is_alive(rec.target) {
                continue;
            }
            for &(theirs, mine) in self.overlap.shared(slot) {
                let offered = *world.record(theirs as usize);
                if now - offered.observed_at > self.max_age {
                    continue;
                }
                if offered.observed_at > world.record(mine as usize).observed_at {
                    let at = match self.stamp {
                        ForwardStamp::Original => offered.observed_at,
                        ForwardStamp::Receipt => now,
                    };
                    world.set_belief(node, mine as usize, offered.believed_alive, at);
                    self.adopted += 1;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{gen_lattice, gen_random, GenParams, SubscriptionGraph, TopologyKind};

    fn orig(w: &World, t_fresh: f64, max_age: f64) -> Transitive {
        Transitive::new(w, t_fresh, max_age, ForwardStamp::Original, 0)
    }

    fn graph(n: usize, out_edges: Vec<Vec<u32>>) -> SubscriptionGraph {
        SubscriptionGraph {
            n,
            out_edges,
            kind: TopologyKind::ScaleFree,
            params: GenParams::new(1),
            seed: 0,
        }
    }

    #[test]
    fn simple_tick_polls_every_target_once() {
        let g = gen_random(50, 10, 4).unwrap();
        let mut w = World::new(&g);
        simple_p2p_tick(&mut w, 3, 1.0);
        assert_eq!(w.accesses_total(3), 10);
        for &t in &g.out_edges[3] {
            assert_eq!(w.belief(3, t).unwrap().observed_at, 1.0);
        }
        let c = w.take_interval();
        assert_eq!(c.exchanges, 10);
        assert_eq!(c.node_accesses, 20);
    }

    #[test]
    fn simple_tick_sees_dead_target() {
        let g = graph(3, vec![vec![1, 2], vec![], vec![]]);
        let mut w = World::new(&g);
        w.toggle(2);
        assert_eq!(w.inconsistent_count(), 1);
        simple_p2p_tick(&mut w, 0, 4.9);
        assert!(!w.belief(0, 2).unwrap().believed_alive);
        assert_eq!(w.inconsistent_count(), 0);
        // answering a poll is one access even when dead
        assert_eq!(w.accesses_total(2), 1);
    }

    #[test]
    fn dead_nodes_do_not_poll() {
        let g = gen_random(10, 3, 4).unwrap();
        let mut w = World::new(&g);
        w.toggle(5);
        simple_p2p_tick(&mut w, 5, 1.0);
        let mut t = orig(&w, 1.0, f64::INFINITY);
        t.tick(&mut w, 5, 1.0);
        assert_eq!(w.total_exchanges(), 0);
    }

    #[test]
    fn fresh_records_are_not_polled() {
        let g = gen_random(30, 5, 1).unwrap();
        let mut w = World::new(&g);
        let mut t = orig(&w, 1.0, f64::INFINITY);
        // every record observed at 0, age 0.5 < t_fresh
        t.tick(&mut w, 0, 0.5);
        assert_eq!(w.total_exchanges(), 0);
        // age exactly t_fresh is polled
        t.tick(&mut w, 0, 1.0);
        assert!(w.total_exchanges() >= 1);
    }

    #[test]
    fn piggyback_adopts_newer_shared_record() {
        // 0 subscribes to 1 and 2; 1 subscribes to 2
        let g = graph(3, vec![vec![1, 2], vec![2], vec![]]);
        let mut w = World::new(&g);
        let mut t = orig(&w, 1.0, f64::INFINITY);
        assert_eq!(t.overlap.shared(0), &[(2, 1)]);
        w.toggle(2);
        // 1 learns 2 is dead at t=1.2
        t.tick(&mut w, 1, 1.2);
        assert!(!w.belief(1, 2).unwrap().believed_alive);
        // 0 polls 1 at 1.5 and adopts the forwarded record without polling 2
        t.sweep(&mut w, 0, 1.5, 0);
        let b = *w.belief(0, 2).unwrap();
        assert!(!b.believed_alive);
        assert_eq!(b.observed_at, 1.2);
        assert_eq!(w.accesses_total(2), 1);
        assert_eq!(t.polls(), 2);
        assert_eq!(t.adopted(), 1);
    }

    #[test]
    fn older_forwarded_record_is_ignored() {
        let g = graph(3, vec![vec![1, 2], vec![2], vec![]]);
        let mut w = World::new(&g);
        let mut t = orig(&w, 0.0, f64::INFINITY);
        t.tick(&mut w, 0, 2.0); // 0 polls 1 and 2 directly at 2.0
        t.tick(&mut w, 1, 2.0); // 1 observes 2 at 2.0: not newer
        assert_eq!(w.belief(0, 2).unwrap().observed_at, 2.0);
        t.tick(&mut w, 0, 3.0);
        assert_eq!(w.belief(0, 2).unwrap().observed_at, 3.0);
    }

    #[test]
    fn max_age_blocks_stale_forwarding() {
        let g = graph(3, vec![vec![1, 2], vec![2], vec![]]);
        let mut w = World::new(&g);
        let mut t = orig(&w, 1.0, 0.2);
        w.toggle(2);
        t.tick(&mut w, 1, 1.0);
        // record is 0.5 s old when offered: rejected, so 0 polls 2 itself
        t.sweep(&mut w, 0, 1.5, 0);
        assert_eq!(w.belief(0, 2).unwrap().observed_at, 1.5);
        assert_eq!(t.adopted(), 0);
    }

    #[test]
    fn receipt_stamp_hides_forwarding_delay() {
        let g = graph(3, vec![vec![1, 2], vec![2], vec![]]);
        let mut w = World::new(&g);
        let mut t = Transitive::new(&w, 1.0, f64::INFINITY, ForwardStamp::Receipt, 0);
        w.toggle(2);
        t.tick(&mut w, 1, 1.2);
        t.sweep(&mut w, 0, 1.5, 0);
        let b = *w.belief(0, 2).unwrap();
        assert!(!b.believed_alive);
        assert_eq!(b.observed_at, 1.5);
        // the relayed record now looks fresh, so 0 skips 2 at 2.2
        t.sweep(&mut w, 0, 2.2, 1);
        assert_eq!(w.accesses_total(2), 1);
    }

    #[test]
    fn zero_overlap_polls_every_target() {
        // a directed cycle: no two nodes share a target
        let n = 12;
        let g = graph(
            n,
            (0..n as u32)
                .map(|i| vec![(i + 1) % n as u32, (i + 5) % n as u32])
                .collect(),
        );
        let mut w = World::new(&g);
        let mut t = Transitive::new(&w, 1.0, f64::INFINITY, ForwardStamp::Receipt, 3);
        assert_eq!(t.overlap.mean_shared(), 0.0);
        for step in 1..=10 {
            for i in 0..n as u32 {
                t.tick(&mut w, i, step as f64 + 0.25);
            }
        }
        assert_eq!(t.polls(), 10 * 2 * n as u64);
    }

    #[test]
    fn lattice_shares_far_more_than_random() {
        let lat = Overlap::build(&World::new(&gen_lattice(400, 20, 0).unwrap()));
        let rnd = Overlap::build(&World::new(&gen_random(400, 20, 0).unwrap()));
        assert!(
            lat.mean_shared() > 5.0 * rnd.mean_shared(),
            "{} {}",
            lat.mean_shared(),
            rnd.mean_shared()
        );
    }
}
