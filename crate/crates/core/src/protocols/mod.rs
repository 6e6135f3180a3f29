//! The four heartbeat protocols as handlers over a shared [`World`].

pub mod centralised;
pub mod config;
pub mod hierarchical;
pub mod p2p;

pub use centralised::Centralised;
pub use config::{ForwardStamp, GroupLayout, ProtocolConfig, ProtocolKind};
pub use hierarchical::{build_hierarchy, Aggregator, Hierarchical, HierarchyTree};
pub use p2p::{simple_p2p_tick, Overlap, Transitive};

use rand::Rng;

use crate::rng::SimRng;
use crate::sim::world::World;
use crate::topology::NodeId;

/// Per-run protocol state.
#[derive(Debug, Clone)]
pub enum Protocol {
    Centralised(Centralised),
    Hierarchical(Hierarchical),
    SimpleP2P,
    TransitiveP2P(Transitive),
}

impl Protocol {
    /// `rng` seeds the transitive poll order and a shuffled hierarchy layout.
    pub fn new(cfg: &ProtocolConfig, world: &World, rng: &mut SimRng) -> Self {
        let n = world.n();
        match cfg.kind {
            ProtocolKind::Centralised => Protocol::Centralised(Centralised::new(n, cfg.monitor_count)),
            ProtocolKind::Hierarchical => {
                let tree = hierarchical::layout_tree(n, cfg.branching_for(n), cfg.group_layout, rng);
                Protocol::Hierarchical(Hierarchical::new(tree))
            }
            ProtocolKind::SimpleP2P => Protocol::SimpleP2P,
            ProtocolKind::TransitiveP2P => {
                let salt = rng.random();
                Protocol::TransitiveP2P(Transitive::new(
                    world,
                    cfg.t_fresh(),
                    cfg.max_age,
                    cfg.forward_stamp,
                    salt,
                ))
            }
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        match self {
            Protocol::Centralised(_) => ProtocolKind::Centralised,
            Protocol::Hierarchical(_) => ProtocolKind::Hierarchical,
            Protocol::SimpleP2P => ProtocolKind::SimpleP2P,
            Protocol::TransitiveP2P(_) => ProtocolKind::TransitiveP2P,
        }
    }

    /// Monitors or aggregators, each ticking on its own phase.
    pub fn infra_count(&self) -> usize {
        match self {
            Protocol::Centralised(c) => c.monitor_count(),
            Protocol::Hierarchical(h) => h.aggregator_count(),
            _ => 0,
        }
    }

    pub fn node_tick(&mut self, world: &mut World, node: NodeId, now: f64) {
        match self {
            Protocol::Centralised(c) => c.node_query(world, node),
            Protocol::Hierarchical(h) => h.node_query(world, node),
            Protocol::SimpleP2P => simple_p2p_tick(world, node, now),
            Protocol::TransitiveP2P(t) => t.tick(world, node, now),
        }
    }

    pub fn infra_tick(&mut self, world: &mut World, entity: usize, now: f64) {
        match self {
            Protocol::Centralised(c) => c.sweep(world, entity, now),
            Protocol::Hierarchical(h) => h.tick(world, entity, now),
            _ => unreachable!("peer-to-peer protocols have no infrastructure"),
        }
    }

    /// Accesses of the busiest infrastructure entity since the last call;
    /// `None` for peer-to-peer protocols.
    pub fn take_infra_peak(&mut self) -> Option<u64> {
        match self {
            Protocol::Centralised(c) => Some(c.take_peak()),
            Protocol::Hierarchical(h) => Some(h.take_peak()),
            _ => None,
        }
    }
}
