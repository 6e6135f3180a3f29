//! Directed subscription networks.
//!
//! Node `i`'s out-list holds the nodes whose aliveness `i` polls. Four
//! families are generated: uniform random targets, a 2-D grid lattice, a
//! rewired directed ring (small world) and a grown directed scale-free graph.

mod edgelist;
mod lattice;
mod metrics;
mod random;
mod scale_free;
mod small_world;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

pub use edgelist::{read_edge_list, write_edge_list};
pub use lattice::{gen_lattice, lattice_offsets};
pub use metrics::{clustering_coefficient, degree_stats, degree_stats_sampled, GraphMetrics, PathStats};
pub use random::gen_random;
pub use scale_free::{gen_scale_free, gen_scale_free_tagged};
pub use small_world::{gen_small_world, ring_lattice_targets};

pub type NodeId = u32;

/// Rewiring probability used for the small-world family by default.
pub const DEFAULT_P_REWIRE: f64 = 0.1;
/// Edge inversion probability used for the scale-free family by default.
pub const DEFAULT_P_INVERT: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopologyKind {
    Random,
    Lattice,
    SmallWorld,
    ScaleFree,
}

impl TopologyKind {
    pub const ALL: [TopologyKind; 4] = [
        TopologyKind::Random,
        TopologyKind::Lattice,
        TopologyKind::SmallWorld,
        TopologyKind::ScaleFree,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TopologyKind::Random => "random",
            TopologyKind::Lattice => "lattice",
            TopologyKind::SmallWorld => "small-world",
            TopologyKind::ScaleFree => "scale-free",
        }
    }

    /// Every node has exactly `k` subscriptions.
    pub fn fixed_degree(self) -> bool {
        !matches!(self, TopologyKind::ScaleFree)
    }
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(TopologyKind::Random),
            "lattice" | "grid" => Ok(TopologyKind::Lattice),
            "small-world" | "smallworld" | "small_world" => Ok(TopologyKind::SmallWorld),
            "scale-free" | "scalefree" | "scale_free" => Ok(TopologyKind::ScaleFree),
            other => Err(Error::InvalidTopology(format!("unknown topology `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub k: usize,
    pub p_rewire: f64,
    pub p_invert: f64,
}

impl GenParams {
    pub fn new(k: usize) -> Self {
        GenParams {
            k,
            p_rewire: DEFAULT_P_REWIRE,
            p_invert: DEFAULT_P_INVERT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidTopology("k must be at least 1".into()));
        }
        for (name, p) in [("p_rewire", self.p_rewire), ("p_invert", self.p_invert)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidTopology(format!("{name}={p} is not in [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubscriptionGraph {
    pub n: usize,
    pub out_edges: Vec<Vec<NodeId>>,
    pub kind: TopologyKind,
    pub params: GenParams,
    pub seed: u64,
}

impl SubscriptionGraph {
    pub fn edge_count(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_edges[i].len()
    }

    pub fn in_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for targets in &self.out_edges {
            for &t in targets {
                deg[t as usize] += 1;
            }
        }
        deg
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.out_edges
            .iter()
            .enumerate()
            .flat_map(|(i, ts)| ts.iter().map(move |&t| (i as NodeId, t)))
    }

    /// Checks the structural invariants: no self-edges, no duplicates,
    /// targets in range and, for fixed-degree kinds, out-degree `k`.
    pub fn validate(&self) -> Result<()> {
        if self.out_edges.len() != self.n {
            return Err(Error::InvalidTopology(format!(
                "{} out-lists for {} nodes",
                self.out_edges.len(),
                self.n
            )));
        }
        let mut seen = vec![u32::MAX; self.n];
        for (i, targets) in self.out_edges.iter().enumerate() {
            if self.kind.fixed_degree() && targets.len() != self.params.k {
                return Err(Error::InvalidTopology(format!(
                    "node {i} has {} subscriptions, expected {}",
                    targets.len(),
                    self.params.k
                )));
            }
            for &t in targets {
                let t = t as usize;
                if t >= self.n {
                    return Err(Error::InvalidTopology(format!("node {i} targets {t} >= n")));
                }
                if t == i {
                    return Err(Error::InvalidTopology(format!("self-edge at node {i}")));
                }
                if seen[t] == i as u32 {
                    return Err(Error::InvalidTopology(format!("duplicate edge {i}->{t}")));
                }
                seen[t] = i as u32;
            }
        }
        Ok(())
    }
}

/// Generates a graph of the given family.
pub fn generate(kind: TopologyKind, n: usize, params: &GenParams, seed: u64) -> Result<SubscriptionGraph> {
    params.validate()?;
    let mut g = match kind {
        TopologyKind::Random => gen_random(n, params.k, seed)?,
        TopologyKind::Lattice => gen_lattice(n, params.k, seed)?,
        TopologyKind::SmallWorld => gen_small_world(n, params.k, params.p_rewire, seed)?,
        TopologyKind::ScaleFree => gen_scale_free(n, params.k, params.p_invert, seed)?,
    };
    g.params = *params;
    Ok(g)
}

pub(crate) fn check_degree(n: usize, k: usize) -> Result<()> {
    if k < 1 || k >= n {
        return Err(Error::InvalidTopology(format!("need 1 <= k < n, got n={n} k={k}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_round_trips_through_str() {
        for kind in TopologyKind::ALL {
            assert_eq!(kind.as_str().parse::<TopologyKind>().unwrap(), kind);
        }
        assert!("torus".parse::<TopologyKind>().is_err());
    }

    #[test]
    fn validate_catches_bad_graphs() {
        let base = SubscriptionGraph {
            n: 3,
            out_edges: vec![vec![1], vec![2], vec![0]],
            kind: TopologyKind::Random,
            params: GenParams::new(1),
            seed: 0,
        };
        assert!(base.validate().is_ok());

        let mut g = base.clone();
        g.out_edges[0] = vec![0];
        assert!(g.validate().is_err());
        g.out_edges[0] = vec![3];
        assert!(g.validate().is_err());
        g.out_edges[0] = vec![1, 1];
        g.kind = TopologyKind::ScaleFree;
        assert!(g.validate().is_err());
        g.out_edges[0] = vec![1, 2];
        assert!(g.validate().is_ok());
        g.kind = TopologyKind::Lattice;
        assert!(g.validate().is_err());
    }

    #[test]
    fn params_reject_bad_probabilities() {
        let mut p = GenParams::new(4);
        p.p_rewire = 1.5;
        assert!(p.validate().is_err());
        p.p_rewire = 0.0;
        p.p_invert = -0.1;
        assert!(p.validate().is_err());
    }
}
