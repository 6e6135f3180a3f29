//! Nearest-neighbour subscriptions on a periodic 2-D grid.
//!
//! Nodes are laid out row-major on a grid `floor(sqrt(n))` columns wide; the
//! last row may be partial. Candidate cells are visited in shells of
//! increasing Euclidean distance, each shell swept clockwise starting from
//! the cell directly above. Coordinates wrap in both directions; a wrapped
//! coordinate that lands past the end of a short last row is skipped.

use std::cmp::Ordering;

use super::{check_degree, GenParams, NodeId, SubscriptionGraph, TopologyKind};
use crate::error::{Error, Result};

/// Grid `(columns, rows)` for `n` nodes.
pub fn grid_shape(n: usize) -> (usize, usize) {
    let w = n.isqrt().max(1);
    (w, n.div_ceil(w))
}

/// Clockwise angle of `(dr, dc)` measured from "up" (row index grows downward).
fn clockwise_angle(dr: i64, dc: i64) -> f64 {
    let a = (dc as f64).atan2(-dr as f64);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Every `(row, column)` offset within the grid extent, ordered by distance
/// and then clockwise from "up".
pub fn lattice_offsets(rows: usize, cols: usize) -> Vec<(i64, i64)> {
    let (h, w) = (rows as i64, cols as i64);
    let mut offsets: Vec<(i64, i64)> = (-h..=h)
        .flat_map(|dr| (-w..=w).map(move |dc| (dr, dc)))
        .filter(|&o| o != (0, 0))
        .collect();
    offsets.sort_by(|a, b| {
        let da = a.0 * a.0 + a.1 * a.1;
        let db = b.0 * b.0 + b.1 * b.1;
        da.cmp(&db).then_with(|| {
            clockwise_angle(a.0, a.1)
                .partial_cmp(&clockwise_angle(b.0, b.1))
                .unwrap_or(Ordering::Equal)
        })
    });
    offsets
}

pub fn gen_lattice(n: usize, k: usize, seed: u64) -> Result<SubscriptionGraph> {
    check_degree(n, k)?;
    if n < 4 {
        return Err(Error::InvalidTopology(format!("lattice needs n >= 4, got {n}")));
    }
    let (w, h) = grid_shape(n);
    let offsets = lattice_offsets(h, w);
    let mut mark = vec![usize::MAX; n];
    let mut out_edges = Vec::with_capacity(n);

    for i in 0..n {
        let (r, c) = ((i / w) as i64, (i % w) as i64);
        let mut targets = Vec::with_capacity(k);
        mark[i] = i;
        for &(dr, dc) in &offsets {
            let rr = (r + dr).rem_euclid(h as i64) as usize;
            let cc = (c + dc).rem_euclid(w as i64) as usize;
            let cell = rr * w + cc;
            if cell >= n || mark[cell] == i {
                continue;
            }
            mark[cell] = i;
            targets.push(cell as NodeId);
            if targets.len() == k {
                break;
            }
        }
        debug_assert_eq!(targets.len(), k);
        out_edges.push(targets);
    }

    Ok(SubscriptionGraph {
        n,
        out_edges,
        kind: TopologyKind::Lattice,
        params: GenParams::new(k),
        seed,
    })
}
