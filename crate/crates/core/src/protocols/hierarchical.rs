//! Aggregation tree.
//!
//! Leaf aggregators poll their member nodes; every aggregator pushes the
//! records of its subtree to its parent and pulls the parent's view back
//! down. Pushed records land in the parent's inbox and only become part of
//! its view on the parent's next tick, so information climbs and descends
//! one level per tick. Members query their leaf for their subscriptions.
//!
//! All views are indexed by *position*: nodes are laid out in a fixed order
//! (by id, or a seeded shuffle) and every aggregator covers a contiguous
//! range of positions.

use rand::seq::SliceRandom;

use crate::rng::SimRng;
use crate::sim::world::{Observation, World};
use crate::topology::NodeId;

use super::config::GroupLayout;

#[derive(Debug, Clone)]
pub struct Aggregator {
    pub level: usize,
    /// Positions covered by this aggregator's subtree.
    pub lo: usize,
    pub hi: usize,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

impl Aggregator {
    pub fn is_leaf(&self) -> bool {
        self.level == 0
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }
}

/// Shape of the tree. Aggregator ids are level-major, leaves first.
#[derive(Debug, Clone)]
pub struct HierarchyTree {
    pub n: usize,
    pub branching: usize,
    pub aggregators: Vec<Aggregator>,
    /// First aggregator id of each level; the root level has one entry.
    pub level_starts: Vec<usize>,
    /// Node at each position, and the inverse.
    pub order: Vec<NodeId>,
    pub position: Vec<u32>,
}

impl HierarchyTree {
    pub fn levels(&self) -> usize {
        self.level_starts.len()
    }

    pub fn root(&self) -> usize {
        self.aggregators.len() - 1
    }

    pub fn leaf_count(&self) -> usize {
        self.level_starts.get(1).copied().unwrap_or(self.aggregators.len())
    }

    pub fn leaf_of(&self, node: NodeId) -> usize {
        self.position[node as usize] as usize / self.branching
    }

    pub fn members(&self, leaf: usize) -> &[NodeId] {
        let a = &self.aggregators[leaf];
        &self.order[a.lo..a.hi]
    }
}

pub fn build_hierarchy(n: usize, branching: usize) -> HierarchyTree {
    build_with_order(n, branching, (0..n as NodeId).collect())
}

pub fn build_shuffled(n: usize, branching: usize, rng: &mut SimRng) -> HierarchyTree {
    let mut order: Vec<NodeId> = (0..n as NodeId).collect();
    order.shuffle(rng);
    build_with_order(n, branching, order)
}

fn build_with_order(n: usize, branching: usize, order: Vec<NodeId>) -> HierarchyTree {
    assert!(branching >= 2, "branching must be >= 2");
    assert!(n >= 1);
    let mut position = vec![0u32; n];
    for (p, &node) in order.iter().enumerate() {
        position[node as usize] = p as u32;
    }

    let mut aggregators: Vec<Aggregator> = (0..n.div_ceil(branching))
        .map(|g| Aggregator {
            level: 0,
            lo: g * branching,
            hi: ((g + 1) * branching).min(n),
            parent: None,
            children: Vec::new(),
        })
        .collect();
    let mut level_starts = vec![0];
    let mut below = 0..aggregators.len();
    let mut level = 0;
    while below.len() > 1 {
        level += 1;
        let start = aggregators.len();
        level_starts.push(start);
        let kids: Vec<usize> = below.clone().collect();
        for chunk in kids.chunks(branching) {
            let id = aggregators.len();
            for &c in chunk {
                aggregators[c].parent = Some(id);
            }
            aggregators.push(Aggregator {
                level,
                lo: aggregators[chunk[0]].lo,
                hi: aggregators[*chunk.last().unwrap()].hi,
                parent: None,
                children: chunk.to_vec(),
            });
        }
        below = start..aggregators.len();
    }
    HierarchyTree {
        n,
        branching,
        aggregators,
        level_starts,
        order,
        position,
    }
}

#[derive(Debug, Clone)]
pub struct Hierarchical {
    pub tree: HierarchyTree,
    views: Vec<Vec<Observation>>,
    // records pushed up by children, indexed by position - lo
    inboxes: Vec<Vec<Observation>>,
    interval: Vec<u64>,
    totals: Vec<u64>,
}

impl Hierarchical {
    pub fn new(tree: HierarchyTree) -> Self {
        let n = tree.n;
        let count = tree.aggregators.len();
        let inboxes = tree
            .aggregators
            .iter()
            .map(|a| {
                if a.is_leaf() {
                    Vec::new()
                } else {
                    vec![Observation::INITIAL; a.len()]
                }
            })
            .collect();
        Hierarchical {
            views: vec![vec![Observation::INITIAL; n]; count],
            inboxes,
            interval: vec![0; count],
            totals: vec![0; count],
            tree,
        }
    }

    pub fn aggregator_count(&self) -> usize {
        self.tree.aggregators.len()
    }

    pub fn view(&self, agg: usize, node: NodeId) -> Observation {
        self.views[agg][self.tree.position[node as usize] as usize]
    }

    pub fn accesses_total(&self, agg: usize) -> u64 {
        self.totals[agg]
    }

    fn touch(&mut self, agg: usize, count: u64) {
        self.interval[agg] += count;
        self.totals[agg] += count;
    }

    pub fn tick(&mut self, world: &mut World, agg: usize, now: f64) {
        let (lo, hi, parent, leaf) = {
            let a = &self.tree.aggregators[agg];
            (a.lo, a.hi, a.parent, a.is_leaf())
        };

        if !leaf {
            let view = &mut self.views[agg][lo..hi];
            for (v, inc) in view.iter_mut().zip(&self.inboxes[agg]) {
                if inc.at > v.at {
                    *v = *inc;
                }
            }
        }

        if let Some(p) = parent {
            // push the subtree's records into the parent's inbox
            let plo = self.tree.aggregators[p].lo;
            let (src, dst) = (&self.views[agg], &mut self.inboxes[p]);
            for (inc, v) in dst[lo - plo..hi - plo].iter_mut().zip(&src[lo..hi]) {
                if v.at > inc.at {
                    *inc = *v;
                }
            }
            world.exchange_infra_pair();
            self.touch(agg, 1);
            self.touch(p, 1);

            // pull the parent's view
            let (mine, theirs) = pair_mut(&mut self.views, agg, p);
            for (v, pv) in mine.iter_mut().zip(theirs.iter()) {
                if pv.at > v.at {
                    *v = *pv;
                }
            }
            world.exchange_infra_pair();
            self.touch(agg, 1);
            self.touch(p, 1);
        }

        if leaf {
            for pos in lo..hi {
                let node = self.tree.order[pos];
                self.views[agg][pos] = Observation {
                    alive: world.is_alive(node),
                    at: now,
                };
                world.exchange_with_infra(node);
            }
            self.touch(agg, (hi - lo) as u64);
        }
    }

    pub fn node_query(&mut self, world: &mut World, node: NodeId) {
        if !world.is_alive(node) {
            return;
        }
        let leaf = self.tree.leaf_of(node);
        world.exchange_with_infra(node);
        self.touch(leaf, 1);
        let view = &self.views[leaf];
        for slot in world.slots(node) {
            let target = world.record(slot).target;
            world.merge(node, slot, view[self.tree.position[target as usize] as usize]);
        }
    }

    pub fn take_peak(&mut self) -> u64 {
        let peak = self.interval.iter().copied().max().unwrap_or(0);
        self.interval.fill(0);
        peak
    }
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (x, y) = v.split_at_mut(b);
        (&mut x[a], &mut y[0])
    } else {
        let (x, y) = v.split_at_mut(a);
        (&mut y[0], &mut x[b])
    }
}

/// Builds the tree for `layout`, drawing from `rng` only when shuffling.
pub fn layout_tree(n: usize, branching: usize, layout: GroupLayout, rng: &mut SimRng) -> HierarchyTree {
    match layout {
        GroupLayout::ById => build_hierarchy(n, branching),
        GroupLayout::Shuffled => build_shuffled(n, branching, rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{GenParams, SubscriptionGraph, TopologyKind};
    use rand::SeedableRng;

    #[test]
    fn shapes() {
        let t = build_hierarchy(4, 2);
        assert_eq!((t.leaf_count(), t.aggregators.len(), t.levels()), (2, 3, 2));

        let t = build_hierarchy(100, 10);
        assert_eq!((t.leaf_count(), t.aggregators.len(), t.levels()), (10, 11, 2));
        assert_eq!(t.members(3), &(30..40).collect::<Vec<_>>()[..]);

        let t = build_hierarchy(10_000, 100);
        assert_eq!((t.leaf_count(), t.aggregators.len()), (100, 101));

        let t = build_hierarchy(5, 10);
        assert_eq!((t.leaf_count(), t.aggregators.len(), t.levels()), (1, 1, 1));

        let t = build_hierarchy(27, 3);
        assert_eq!(t.level_starts, vec![0, 9, 12]);
        assert_eq!(t.aggregators[t.root()].children, vec![9, 10, 11]);
    }

    #[test]
    fn every_node_in_exactly_one_leaf() {
        for (n, b) in [(1000, 32), (17, 4), (101, 10), (10, 2)] {
            let mut rng = SimRng::seed_from_u64(3);
            for t in [build_hierarchy(n, b), build_shuffled(n, b, &mut rng)] {
                let mut hits = vec![0; n];
                for leaf in 0..t.leaf_count() {
                    assert!(t.members(leaf).len() <= b);
                    for &m in t.members(leaf) {
                        hits[m as usize] += 1;
                        assert_eq!(t.leaf_of(m), leaf);
                    }
                }
                assert!(hits.iter().all(|&h| h == 1));
                for a in &t.aggregators {
                    assert!(a.children.len() <= b);
                }
                assert_eq!(t.aggregators[t.root()].len(), n);
            }
        }
    }

    fn pair_graph() -> SubscriptionGraph {
        // node 3 (group 1) subscribes to node 0 (group 0)
        let mut out_edges = vec![vec![]; 4];
        out_edges[3] = vec![0];
        SubscriptionGraph {
            n: 4,
            out_edges,
            kind: TopologyKind::ScaleFree,
            params: GenParams::new(1),
            seed: 0,
        }
    }

    #[test]
    fn one_level_per_tick() {
        let mut w = World::new(&pair_graph());
        let mut h = Hierarchical::new(build_hierarchy(4, 2));
        let root = h.tree.root();
        let tick_all = |h: &mut Hierarchical, w: &mut World, t: f64| {
            h.node_query(w, 3);
            for a in 0..h.aggregator_count() {
                h.tick(w, a, t);
            }
        };
        tick_all(&mut h, &mut w, 0.0);
        w.toggle(0);
        tick_all(&mut h, &mut w, 1.0);
        assert!(!h.view(0, 0).alive);
        assert!(h.view(root, 0).alive);
        tick_all(&mut h, &mut w, 2.0);
        assert!(!h.view(root, 0).alive);
        assert!(h.view(1, 0).alive);
        tick_all(&mut h, &mut w, 3.0);
        assert!(!h.view(1, 0).alive);
        assert_eq!(w.inconsistent_count(), 1);
        tick_all(&mut h, &mut w, 4.0);
        assert_eq!(w.inconsistent_count(), 0);
        assert_eq!(w.belief(3, 0).unwrap().observed_at, 1.0);
    }

    #[test]
    fn access_accounting() {
        let mut w = World::new(&pair_graph());
        let mut h = Hierarchical::new(build_hierarchy(4, 2));
        h.tick(&mut w, 0, 0.5);
        // two members polled, one push and one pull with the root
        assert_eq!(h.accesses_total(0), 4);
        assert_eq!(h.accesses_total(2), 2);
        let c = w.take_interval();
        assert_eq!(c.node_accesses, 2);
        assert_eq!(c.exchanges, 4);
        assert_eq!(c.infra_accesses, 2 + 4);
        h.node_query(&mut w, 3);
        assert_eq!(h.take_peak(), 4);
        assert_eq!(h.take_peak(), 0);
    }
}
