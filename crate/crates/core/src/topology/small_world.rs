//! Directed Watts-Strogatz style small world.
//!
//! Start from a directed ring where node `i` points at its `k/2` nearest
//! neighbours on each side, then rewire every edge independently with
//! probability `p`: the origin stays, the destination is redrawn uniformly
//! from nodes the origin is not yet connected to. Edges are visited
//! origin-major, ring-offset-minor.

use rand::{Rng, SeedableRng};

use super::{GenParams, NodeId, SubscriptionGraph, TopologyKind};
use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Ring lattice out-list of node `i`: `i+1, i-1, i+2, i-2, ...` (mod n).
pub fn ring_lattice_targets(n: usize, k: usize, i: usize) -> Vec<NodeId> {
    (1..=k / 2)
        .flat_map(|d| [(i + d) % n, (i + n - d) % n])
        .map(|t| t as NodeId)
        .collect()
}

pub fn gen_small_world(n: usize, k: usize, p_rewire: f64, seed: u64) -> Result<SubscriptionGraph> {
    if k < 2 || k % 2 != 0 {
        return Err(Error::InvalidTopology(format!(
            "small world needs an even k >= 2, got {k}"
        )));
    }
    if k >= n.saturating_sub(1) {
        return Err(Error::InvalidTopology(format!(
            "small world needs k < n - 1, got n={n} k={k}"
        )));
    }
    if !(0.0..=1.0).contains(&p_rewire) {
        return Err(Error::InvalidTopology(format!("p_rewire={p_rewire} is not in [0, 1]")));
    }

    let mut rng = SimRng::seed_from_u64(seed);
    let mut connected = vec![false; n];
    let mut out_edges = Vec::with_capacity(n);
    for i in 0..n {
        let mut targets = ring_lattice_targets(n, k, i);
        if p_rewire > 0.0 {
            connected[i] = true;
            for &t in &targets {
                connected[t as usize] = true;
            }
            for slot in 0..targets.len() {
                if rng.random::<f64>() >= p_rewire {
                    continue;
                }
                // n - 1 - k >= 1 candidates remain, so rejection terminates
                let new = loop {
                    let j = rng.random_range(0..n);
                    if !connected[j] {
                        break j;
                    }
                };
                connected[targets[slot] as usize] = false;
                connected[new] = true;
                targets[slot] = new as NodeId;
            }
            connected[i] = false;
            for &t in &targets {
                connected[t as usize] = false;
            }
        }
        out_edges.push(targets);
    }

    let params = GenParams {
        k,
        p_rewire,
        ..GenParams::new(k)
    };
    Ok(SubscriptionGraph {
        n,
        out_edges,
        kind: TopologyKind::SmallWorld,
        params,
        seed,
    })
}
