use rand::seq::index;
use rand::SeedableRng;

use super::{check_degree, GenParams, NodeId, SubscriptionGraph, TopologyKind};
use crate::error::Result;
use crate::rng::SimRng;

/// Each node subscribes to `k` targets drawn uniformly without replacement
/// from the other `n - 1` nodes.
pub fn gen_random(n: usize, k: usize, seed: u64) -> Result<SubscriptionGraph> {
    check_degree(n, k)?;
    let mut rng = SimRng::seed_from_u64(seed);
    let out_edges = (0..n)
        .map(|i| {
            index::sample(&mut rng, n - 1, k)
                .into_iter()
                // skip over i itself
                .map(|j| if j < i { j as NodeId } else { (j + 1) as NodeId })
                .collect()
        })
        .collect();
    Ok(SubscriptionGraph {
        n,
        out_edges,
        kind: TopologyKind::Random,
        params: GenParams::new(k),
        seed,
    })
}
