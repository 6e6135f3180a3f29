//! Directed scale-free growth with occasional edge inversion.
//!
//! The seed is a complete directed graph on `k` vertices. Each later vertex
//! attaches `k` edges toward distinct existing vertices picked with
//! probability proportional to their total degree; each new edge is flipped
//! with probability `p_invert` so that cycles can form.

use rand::{Rng, SeedableRng};

use super::{GenParams, NodeId, SubscriptionGraph, TopologyKind};
use crate::error::{Error, Result};
use crate::rng::SimRng;

pub fn gen_scale_free(n: usize, k: usize, p_invert: f64, seed: u64) -> Result<SubscriptionGraph> {
    gen_scale_free_tagged(n, k, p_invert, seed).map(|(g, _)| g)
}

/// Same as [`gen_scale_free`], also returning how many growth edges were
/// inverted.
pub fn gen_scale_free_tagged(n: usize, k: usize, p_invert: f64, seed: u64) -> Result<(SubscriptionGraph, usize)> {
    // k == n is accepted and yields just the seed clique
    if k < 2 || k > n {
        return Err(Error::InvalidTopology(format!(
            "scale free needs 2 <= k <= n, got n={n} k={k}"
        )));
    }
    if !(0.0..=1.0).contains(&p_invert) {
        return Err(Error::InvalidTopology(format!("p_invert={p_invert} is not in [0, 1]")));
    }

    let mut rng = SimRng::seed_from_u64(seed);
    let mut out_edges: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    // one entry per edge endpoint: uniform draws are degree-proportional
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * n * k);

    for i in 0..k {
        for j in 0..k {
            if i != j {
                out_edges[i].push(j as NodeId);
                endpoints.push(i as NodeId);
                endpoints.push(j as NodeId);
            }
        }
    }

    let mut chosen = Vec::with_capacity(k);
    let mut picked = vec![usize::MAX; n];
    let mut inverted = 0;
    for v in k..n {
        chosen.clear();
        while chosen.len() < k {
            let u = endpoints[rng.random_range(0..endpoints.len())];
            if picked[u as usize] != v {
                picked[u as usize] = v;
                chosen.push(u);
            }
        }
        for &u in &chosen {
            if rng.random::<f64>() < p_invert {
                out_edges[u as usize].push(v as NodeId);
                inverted += 1;
            } else {
                out_edges[v].push(u);
            }
            endpoints.push(u);
            endpoints.push(v as NodeId);
        }
    }

    let params = GenParams {
        k,
        p_invert,
        ..GenParams::new(k)
    };
    Ok((
        SubscriptionGraph {
            n,
            out_edges,
            kind: TopologyKind::ScaleFree,
            params,
            seed,
        },
        inverted,
    ))
}
