//! Plain-text edge lists: a `# n=<n> kind=<kind> k=<k> seed=<seed>` header
//! followed by one `source<TAB>target` line per edge.

use std::io::{self, BufRead, Write};

use super::{GenParams, NodeId, SubscriptionGraph, TopologyKind};
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &SubscriptionGraph, mut w: W) -> io::Result<()> {
    writeln!(w, "# n={} kind={} k={} seed={}", g.n, g.kind, g.params.k, g.seed)?;
    for (s, t) in g.edges() {
        writeln!(w, "{s}\t{t}")?;
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::EdgeList { line, msg: msg.into() }
}

/// Reads an edge list back. Generator probabilities are not stored in the
/// header and come back as defaults.
pub fn read_edge_list<R: BufRead>(r: R) -> Result<SubscriptionGraph> {
    let mut lines = r.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let header = header.map_err(|e| parse_err(1, e.to_string()))?;
    let body = header
        .strip_prefix("# ")
        .ok_or_else(|| parse_err(1, "header must start with `# `"))?;

    let (mut n, mut kind, mut k, mut seed) = (None, None, None, None);
    for field in body.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("bad field `{field}`")))?;
        let bad = |_| parse_err(1, format!("bad value for {key}"));
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(bad)?),
            "k" => k = Some(value.parse::<usize>().map_err(bad)?),
            "seed" => seed = Some(value.parse::<u64>().map_err(bad)?),
            "kind" => kind = Some(value.parse::<TopologyKind>().map_err(|e| parse_err(1, e.to_string()))?),
            _ => return Err(parse_err(1, format!("unknown header key `{key}`"))),
        }
    }
    let n = n.ok_or_else(|| parse_err(1, "header lacks n"))?;
    let mut out_edges: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (idx, line) in lines {
        let line = line.map_err(|e| parse_err(idx + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let (s, t) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(idx + 1, "expected source<TAB>target"))?;
        let s: usize = s.parse().map_err(|_| parse_err(idx + 1, "bad source"))?;
        let t: NodeId = t.parse().map_err(|_| parse_err(idx + 1, "bad target"))?;
        if s >= n || t as usize >= n {
            return Err(parse_err(idx + 1, "node id out of range"));
        }
        out_edges[s].push(t);
    }
    let g = SubscriptionGraph {
        n,
        out_edges,
        kind: kind.ok_or_else(|| parse_err(1, "header lacks kind"))?,
        params: GenParams::new(k.ok_or_else(|| parse_err(1, "header lacks k"))?),
        seed: seed.ok_or_else(|| parse_err(1, "header lacks seed"))?,
    };
    g.validate()?;
    Ok(g)
}
