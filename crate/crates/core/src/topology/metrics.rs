//! Structural metrics used to explain simulation results.

use std::collections::{BTreeMap, VecDeque};

use super::SubscriptionGraph;

#[derive(Debug, Clone, PartialEq)]
pub struct PathStats {
    /// Mean directed hop distance over ordered pairs that are reachable.
    pub mean_reachable: f64,
    /// Ordered pairs `(s, t)`, `s != t`, with no directed path.
    pub unreachable_pairs: u64,
    pub sources: usize,
}

impl PathStats {
    pub fn is_connected(&self) -> bool {
        self.unreachable_pairs == 0
    }

    /// Mean path length, or `None` when some pair is unreachable.
    pub fn mean_path_length(&self) -> Option<f64> {
        self.is_connected().then_some(self.mean_reachable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphMetrics {
    pub clustering: f64,
    pub mean_out_degree: f64,
    pub mean_in_degree: f64,
    pub max_in_degree: usize,
    pub in_degree_histogram: BTreeMap<usize, usize>,
    pub out_degree_histogram: BTreeMap<usize, usize>,
    pub paths: PathStats,
}

/// Sorted, deduplicated neighbour lists of the undirected projection.
fn undirected_adjacency(g: &SubscriptionGraph) -> Vec<Vec<u32>> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); g.n];
    for (s, t) in g.edges() {
        adj[s as usize].push(t);
        adj[t as usize].push(s);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Transitivity of the undirected projection: `3 * triangles / connected
/// triples`, 0 when there are no triples.
pub fn clustering_coefficient(g: &SubscriptionGraph) -> f64 {
    let adj = undirected_adjacency(g);
    let mut triangles: u64 = 0;
    for (u, nu) in adj.iter().enumerate() {
        let u = u as u32;
        for &v in nu.iter().filter(|&&v| v > u) {
            // count common neighbours w > v, so each triangle is seen once
            let nv = &adj[v as usize];
            let (mut a, mut b) = (nu.partition_point(|&x| x <= v), nv.partition_point(|&x| x <= v));
            while a < nu.len() && b < nv.len() {
                match nu[a].cmp(&nv[b]) {
                    std::cmp::Ordering::Less => a += 1,
                    std::cmp::Ordering::Greater => b += 1,
                    std::cmp::Ordering::Equal => {
                        triangles += 1;
                        a += 1;
                        b += 1;
                    }
                }
            }
        }
    }
    let triples: u64 = adj
        .iter()
        .map(|l| (l.len() as u64) * (l.len() as u64).saturating_sub(1) / 2)
        .sum();
    if triples == 0 {
        0.0
    } else {
        3.0 * triangles as f64 / triples as f64
    }
}

fn bfs_from(g: &SubscriptionGraph, src: usize, dist: &mut [u32], queue: &mut VecDeque<usize>) -> (u64, u64) {
    dist.fill(u32::MAX);
    dist[src] = 0;
    queue.clear();
    queue.push_back(src);
    let (mut sum, mut reached) = (0u64, 0u64);
    while let Some(u) = queue.pop_front() {
        for &t in &g.out_edges[u] {
            let t = t as usize;
            if dist[t] == u32::MAX {
                dist[t] = dist[u] + 1;
                sum += dist[t] as u64;
                reached += 1;
                queue.push_back(t);
            }
        }
    }
    (sum, reached)
}

fn path_stats(g: &SubscriptionGraph, sources: impl Iterator<Item = usize>) -> PathStats {
    let mut dist = vec![u32::MAX; g.n];
    let mut queue = VecDeque::with_capacity(g.n);
    let (mut sum, mut reached, mut unreachable, mut count) = (0u64, 0u64, 0u64, 0usize);
    for s in sources {
        let (d, r) = bfs_from(g, s, &mut dist, &mut queue);
        sum += d;
        reached += r;
        unreachable += (g.n as u64 - 1) - r;
        count += 1;
    }
    let mean_reachable = if reached == 0 { 0.0 } else { sum as f64 / reached as f64 };
    PathStats {
        mean_reachable,
        unreachable_pairs: unreachable,
        sources: count,
    }
}

fn histogram(values: impl Iterator<Item = usize>) -> BTreeMap<usize, usize> {
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_insert(0) += 1;
    }
    h
}

fn stats_with_paths(g: &SubscriptionGraph, paths: PathStats) -> GraphMetrics {
    let in_deg = g.in_degrees();
    let n = g.n.max(1) as f64;
    let edges = g.edge_count() as f64;
    GraphMetrics {
        clustering: clustering_coefficient(g),
        mean_out_degree: edges / n,
        mean_in_degree: edges / n,
        max_in_degree: in_deg.iter().copied().max().unwrap_or(0),
        in_degree_histogram: histogram(in_deg.into_iter()),
        out_degree_histogram: histogram(g.out_edges.iter().map(Vec::len)),
        paths,
    }
}

/// Degree histograms, clustering, and path lengths by BFS from every node.
pub fn degree_stats(g: &SubscriptionGraph) -> GraphMetrics {
    stats_with_paths(g, path_stats(g, 0..g.n))
}

/// Like [`degree_stats`] but BFS only from `sources` evenly spaced nodes;
/// for graphs where all-pairs BFS is too slow.
pub fn degree_stats_sampled(g: &SubscriptionGraph, sources: usize) -> GraphMetrics {
    let s = sources.clamp(1, g.n.max(1));
    stats_with_paths(g, path_stats(g, (0..s).map(|i| i * g.n / s)))
}
