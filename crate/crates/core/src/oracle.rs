//! Exhaustive reference procedures used by the test suites.
//!
//! Everything here recomputes results from first principles — explicit
//! strategy enumeration and a private breadth-first reachability — so that it
//! stays independent of the fixpoint implementations it is used to check.
//! All entry points are guarded by instance-size limits.

use crate::graph::{MdpGraph, VertexId};
use crate::set::VertexSet;
use crate::{Error, Result};

/// Default ceiling on the number of enumerated strategies.
pub const DEFAULT_STRATEGY_LIMIT: u64 = 1_000_000;

/// Ceiling on player-1 vertices for full enumeration.
pub const MAX_ENUM_PLAYER1: usize = 12;

/// A strategy in plain adjacency form: per vertex, the chosen successors
/// (empty for probabilistic vertices).
pub type RawStrategy = Vec<Vec<VertexId>>;

fn raw_reach(g: &MdpGraph, s: &RawStrategy, start: VertexId) -> VertexSet {
    let mut seen = VertexSet::new(g.vertex_count());
    seen.insert(start);
    let mut queue = vec![start];
    while let Some(v) = queue.pop() {
        let nexts: &[VertexId] = if g.is_player1(v) {
            &s[v]
        } else {
            g.successors(v)
        };
        for &w in nexts {
            if seen.insert(w) {
                queue.push(w);
            }
        }
    }
    seen
}

/// Enumerates every strategy (every function from player-1 vertices to
/// subsets of their successors) and calls `f` on each.
pub fn for_each_strategy(g: &MdpGraph, limit: u64, mut f: impl FnMut(&RawStrategy)) -> Result<()> {
    let p1: Vec<VertexId> = g.player1_vertices().collect();
    if p1.len() > MAX_ENUM_PLAYER1 {
        return Err(Error::guard(
            "player-1 vertices for strategy enumeration",
            p1.len() as u64,
            MAX_ENUM_PLAYER1 as u64,
        ));
    }
    let mut total: u64 = 1;
    for &v in &p1 {
        let deg = g.successors(v).len() as u32;
        total = total.saturating_mul(1u64 << deg.min(63));
        if total > limit {
            return Err(Error::guard("strategy count", total, limit));
        }
    }

    // Odometer over per-vertex subset masks.
    let mut masks: Vec<u32> = vec![0; p1.len()];
    let mut strategy: RawStrategy = vec![Vec::new(); g.vertex_count()];
    loop {
        for (k, &v) in p1.iter().enumerate() {
            let succs = g.successors(v);
            strategy[v] = succs
                .iter()
                .enumerate()
                .filter(|(b, _)| masks[k] & (1 << b) != 0)
                .map(|(_, &w)| w)
                .collect();
        }
        f(&strategy);

        let mut k = 0;
        loop {
            if k == p1.len() {
                return Ok(());
            }
            let max = 1u32 << g.successors(p1[k]).len();
            masks[k] += 1;
            if masks[k] < max {
                break;
            }
            masks[k] = 0;
            k += 1;
        }
    }
}

/// Checks the acceptance definition directly: under `s`, every vertex
/// reachable from `i` can itself reach the target.
pub fn satisfies_objective(g: &MdpGraph, s: &RawStrategy, i: VertexId, target: &VertexSet) -> bool {
    let r = raw_reach(g, s, i);
    let ok = r.iter().all(|v| raw_reach(g, s, v).intersects(target));
    ok
}

/// Winning region for an arbitrary target set by strategy enumeration: a
/// player-1 vertex is in the result iff some strategy satisfies the
/// objective from it.
pub fn winning_region_by_enumeration(g: &MdpGraph, target: &VertexSet) -> Result<VertexSet> {
    let mut win = VertexSet::new(g.vertex_count());
    for_each_strategy(g, DEFAULT_STRATEGY_LIMIT, |s| {
        for i in g.player1_vertices() {
            if !win.contains(i) && satisfies_objective(g, s, i, target) {
                win.insert(i);
            }
        }
    })?;
    Ok(win)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexKind;

    #[test]
    fn enumeration_counts_all_strategies() {
        // i1 has 2 successors, so 4 choice sets; other vertices fixed.
        let mut g = MdpGraph::new();
        let i1 = g.add_vertex(VertexKind::Player1, "i1");
        let o1 = g.add_vertex(VertexKind::Player1, "o1");
        let p = g.add_vertex(VertexKind::Probabilistic, "p");
        let q = g.add_vertex(VertexKind::Probabilistic, "q");
        g.add_edge(i1, p).unwrap();
        g.add_edge(i1, q).unwrap();
        g.add_edge(p, o1).unwrap();
        g.add_edge(q, o1).unwrap();
        let mut n = 0;
        for_each_strategy(&g, 1_000, |_| n += 1).unwrap();
        assert_eq!(n, 4);
    }

    #[test]
    fn guard_rejects_huge_instances() {
        let mut g = MdpGraph::new();
        let hub = g.add_vertex(VertexKind::Probabilistic, "hub");
        for k in 0..13 {
            let v = g.add_vertex(VertexKind::Player1, format!("v{k}"));
            g.add_edge(hub, v).unwrap();
        }
        let err = for_each_strategy(&g, 1_000, |_| {}).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
    }
}
