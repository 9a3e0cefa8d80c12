//! Rightward-open MDPs and their three composition operations.
//!
//! An roMDP is an MDP graph with ordered entrance and exit lists. Entrances
//! have no predecessors and exits no successors. Sequential composition glues
//! positionally (exit k of the left feeds entrance k of the right and the
//! left exits are deleted), sum is disjoint union, and trace loops the last
//! exit back to the last entrance through a fresh probabilistic vertex.
//!
//! Composed graphs renumber vertices deterministically: the left operand's
//! surviving vertices first in their original order, then the right's. Trace
//! keeps all ids and appends the fresh loop vertex last. Every composition
//! returns the remapping so strategies and vertex sets can be transported.

use crate::graph::{MdpGraph, VertexId, VertexKind};
use crate::set::MAX_EXITS;
use crate::{ModelError, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct RoMdp {
    graph: MdpGraph,
    entrances: Vec<VertexId>,
    exits: Vec<VertexId>,
}

impl RoMdp {
    pub fn new(graph: MdpGraph, entrances: Vec<VertexId>, exits: Vec<VertexId>) -> Result<Self> {
        let mut seen = vec![false; graph.vertex_count()];
        for &v in entrances.iter().chain(&exits) {
            if v >= graph.vertex_count() {
                return Err(ModelError::UnknownVertexId { id: v }.into());
            }
            if !graph.is_player1(v) {
                return Err(ModelError::OpenEndNotPlayer1 {
                    vertex: graph.label(v).to_string(),
                }
                .into());
            }
        }
        for &v in &entrances {
            if seen[v] {
                return Err(ModelError::OpenEndDuplicate {
                    vertex: graph.label(v).to_string(),
                }
                .into());
            }
            seen[v] = true;
        }
        for &v in &exits {
            if entrances.contains(&v) {
                return Err(ModelError::OpenEndOverlap {
                    vertex: graph.label(v).to_string(),
                }
                .into());
            }
            if exits.iter().filter(|&&w| w == v).count() > 1 {
                return Err(ModelError::OpenEndDuplicate {
                    vertex: graph.label(v).to_string(),
                }
                .into());
            }
        }
        for &v in &entrances {
            if !graph.predecessors(v).is_empty() {
                return Err(ModelError::EntranceHasPredecessor {
                    vertex: graph.label(v).to_string(),
                }
                .into());
            }
        }
        for &v in &exits {
            if !graph.successors(v).is_empty() {
                return Err(ModelError::ExitHasSuccessor {
                    vertex: graph.label(v).to_string(),
                }
                .into());
            }
        }
        if exits.len() > MAX_EXITS {
            return Err(ModelError::TooManyExits {
                count: exits.len(),
                max: MAX_EXITS,
            }
            .into());
        }
        Ok(RoMdp {
            graph,
            entrances,
            exits,
        })
    }

    pub fn graph(&self) -> &MdpGraph {
        &self.graph
    }

    pub fn entrances(&self) -> &[VertexId] {
        &self.entrances
    }

    pub fn exits(&self) -> &[VertexId] {
        &self.exits
    }

    /// Arity `m -> n`.
    pub fn arity(&self) -> (usize, usize) {
        (self.entrances.len(), self.exits.len())
    }

    pub fn entrance_vertex(&self, idx: usize) -> Result<VertexId> {
        self.entrances.get(idx).copied().ok_or_else(|| {
            ModelError::EntranceOutOfRange {
                index: idx,
                count: self.entrances.len(),
            }
            .into()
        })
    }

    pub fn exit_vertex(&self, idx: usize) -> Result<VertexId> {
        self.exits.get(idx).copied().ok_or_else(|| {
            ModelError::ExitOutOfRange {
                index: idx,
                count: self.exits.len(),
            }
            .into()
        })
    }

    /// 0-based exit index of a vertex, if it is an exit.
    pub fn exit_index_of(&self, v: VertexId) -> Option<usize> {
        self.exits.iter().position(|&e| e == v)
    }

    /// Re-checks every structural invariant; composition outputs are audited
    /// with this in tests.
    pub fn validate(&self) -> Result<()> {
        let g = self.graph.clone();
        RoMdp::new(g, self.entrances.clone(), self.exits.clone()).map(|_| ())
    }

    /// Prefixes every vertex label, e.g. with the leaf occurrence it came
    /// from. Presentation only; no structural invariant can change.
    pub fn prefix_labels(&mut self, prefix: &str) {
        for v in 0..self.graph.vertex_count() {
            let l = format!("{prefix}.{}", self.graph.label(v));
            self.graph.set_label(v, l);
        }
    }

    /// A copy with all Büchi vertices (and their incident edges) removed.
    /// Open ends are player-1, so they survive. Used to decide
    /// Büchi-avoiding achievability.
    pub fn without_buchi(&self) -> RoMdp {
        let g = &self.graph;
        let mut out = MdpGraph::new();
        let mut remap: Vec<Option<VertexId>> = vec![None; g.vertex_count()];
        for (v, slot) in remap.iter_mut().enumerate() {
            if g.buchi().contains(v) {
                continue;
            }
            *slot = Some(out.add_vertex(g.kind(v), g.label(v)));
        }
        for (u, v) in g.edges() {
            if let (Some(nu), Some(nv)) = (remap[u], remap[v]) {
                out.add_edge(nu, nv).expect("alternation preserved");
            }
        }
        let entrances = self.entrances.iter().map(|&v| remap[v].unwrap()).collect();
        let exits = self.exits.iter().map(|&v| remap[v].unwrap()).collect();
        RoMdp::new(out, entrances, exits).expect("open ends preserved")
    }
}

impl std::fmt::Debug for RoMdp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "RoMdp(en={:?}, ex={:?}, {:?})",
            self.entrances, self.exits, self.graph
        )
    }
}

/// A composition result together with the vertex remappings of both
/// operands (`None` marks a deleted vertex).
pub struct Composed {
    pub romdp: RoMdp,
    pub remap_left: Vec<Option<VertexId>>,
    pub remap_right: Vec<Option<VertexId>>,
}

/// Sequential composition `a ⨟ b`: requires `|exits(a)| = |entrances(b)|`;
/// deletes a's exits and redirects each edge into exit k to entrance k of b.
pub fn seq_compose_full(a: &RoMdp, b: &RoMdp) -> Result<Composed> {
    let (_, l) = a.arity();
    let (lb, _) = b.arity();
    if l != lb {
        return Err(ModelError::ArityMismatch {
            path: String::new(),
            detail: format!("seq: left has {l} exits, right has {lb} entrances"),
        }
        .into());
    }

    let ga = a.graph();
    let gb = b.graph();
    let mut out = MdpGraph::new();
    let mut remap_a: Vec<Option<VertexId>> = vec![None; ga.vertex_count()];
    let mut remap_b: Vec<Option<VertexId>> = vec![None; gb.vertex_count()];

    for (v, slot) in remap_a.iter_mut().enumerate() {
        if a.exit_index_of(v).is_some() {
            continue;
        }
        *slot = Some(out.add_vertex(ga.kind(v), ga.label(v)));
    }
    for (v, slot) in remap_b.iter_mut().enumerate() {
        *slot = Some(out.add_vertex(gb.kind(v), gb.label(v)));
    }

    for (u, v) in ga.edges() {
        let nu = remap_a[u].expect("exits have no outgoing edges");
        match a.exit_index_of(v) {
            None => out.add_edge(nu, remap_a[v].unwrap())?,
            Some(k) => {
                let target = remap_b[b.entrance_vertex(k)?].unwrap();
                out.add_edge(nu, target)?;
            }
        }
    }
    for (u, v) in gb.edges() {
        out.add_edge(remap_b[u].unwrap(), remap_b[v].unwrap())?;
    }
    for v in ga.buchi().iter() {
        out.mark_buchi(remap_a[v].expect("Büchi vertices are probabilistic"))?;
    }
    for v in gb.buchi().iter() {
        out.mark_buchi(remap_b[v].unwrap())?;
    }

    let entrances = a.entrances().iter().map(|&v| remap_a[v].unwrap()).collect();
    let exits = b.exits().iter().map(|&v| remap_b[v].unwrap()).collect();
    Ok(Composed {
        romdp: RoMdp::new(out, entrances, exits)?,
        remap_left: remap_a,
        remap_right: remap_b,
    })
}

/// Sum `a ⊕ b`: disjoint union; entrance and exit lists concatenate.
pub fn sum_compose_full(a: &RoMdp, b: &RoMdp) -> Result<Composed> {
    let ga = a.graph();
    let gb = b.graph();
    let mut out = MdpGraph::new();
    let mut remap_a: Vec<Option<VertexId>> = vec![None; ga.vertex_count()];
    let mut remap_b: Vec<Option<VertexId>> = vec![None; gb.vertex_count()];
    for (v, slot) in remap_a.iter_mut().enumerate() {
        *slot = Some(out.add_vertex(ga.kind(v), ga.label(v)));
    }
    for (v, slot) in remap_b.iter_mut().enumerate() {
        *slot = Some(out.add_vertex(gb.kind(v), gb.label(v)));
    }
    for (u, v) in ga.edges() {
        out.add_edge(remap_a[u].unwrap(), remap_a[v].unwrap())?;
    }
    for (u, v) in gb.edges() {
        out.add_edge(remap_b[u].unwrap(), remap_b[v].unwrap())?;
    }
    for v in ga.buchi().iter() {
        out.mark_buchi(remap_a[v].unwrap())?;
    }
    for v in gb.buchi().iter() {
        out.mark_buchi(remap_b[v].unwrap())?;
    }
    let entrances = a
        .entrances()
        .iter()
        .map(|&v| remap_a[v].unwrap())
        .chain(b.entrances().iter().map(|&v| remap_b[v].unwrap()))
        .collect();
    let exits = a
        .exits()
        .iter()
        .map(|&v| remap_a[v].unwrap())
        .chain(b.exits().iter().map(|&v| remap_b[v].unwrap()))
        .collect();
    Ok(Composed {
        romdp: RoMdp::new(out, entrances, exits)?,
        remap_left: remap_a,
        remap_right: remap_b,
    })
}

/// Trace `tr(a)`: removes the last entrance and last exit from the open-end
/// lists (the vertices remain) and loops the old last exit to the old last
/// entrance through a fresh probabilistic vertex, keeping alternation.
/// Returns the composed roMDP and the id of the fresh vertex; the remap is
/// the identity.
pub fn trace_compose_full(a: &RoMdp) -> Result<(RoMdp, VertexId)> {
    let (m1, n1) = a.arity();
    if m1 == 0 || n1 == 0 {
        return Err(ModelError::TraceOnClosed {
            path: String::new(),
            m: m1,
            n: n1,
        }
        .into());
    }
    let loop_en = a.entrance_vertex(m1 - 1)?;
    let loop_ex = a.exit_vertex(n1 - 1)?;
    let mut g = a.graph().clone();
    let star = g.add_vertex(VertexKind::Probabilistic, format!("*{}", g.label(loop_ex)));
    g.add_edge(loop_ex, star)?;
    g.add_edge(star, loop_en)?;
    let entrances = a.entrances()[..m1 - 1].to_vec();
    let exits = a.exits()[..n1 - 1].to_vec();
    Ok((RoMdp::new(g, entrances, exits)?, star))
}

pub fn seq_compose(a: &RoMdp, b: &RoMdp) -> Result<RoMdp> {
    Ok(seq_compose_full(a, b)?.romdp)
}

pub fn sum_compose(a: &RoMdp, b: &RoMdp) -> Result<RoMdp> {
    Ok(sum_compose_full(a, b)?.romdp)
}

pub fn trace_compose(a: &RoMdp) -> Result<RoMdp> {
    Ok(trace_compose_full(a)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn relay_seq_relay_is_a_chain() {
        let relay = fixtures::relay(false);
        let c = seq_compose(&relay, &relay).unwrap();
        assert_eq!(c.graph().vertex_count(), 5);
        assert_eq!(c.arity(), (1, 1));
        // i1 -> p -> en_b -> p_b -> o_b
        let en = c.entrance_vertex(0).unwrap();
        let ex = c.exit_vertex(0).unwrap();
        let g = c.graph();
        let p = g.successors(en)[0];
        let en_b = g.successors(p)[0];
        let p_b = g.successors(en_b)[0];
        assert_eq!(g.successors(p_b), &[ex]);
        c.validate().unwrap();
    }

    #[test]
    fn seq_with_zero_glue_is_disjoint() {
        let closed = fixtures::closed_loop(false); // 0 -> 0
        let c = seq_compose(&closed, &closed).unwrap();
        assert_eq!(c.arity(), (0, 0));
        assert_eq!(c.graph().vertex_count(), 2 * closed.graph().vertex_count());
    }

    #[test]
    fn fork_seq_two_relays_redirects_all_exit_edges() {
        let fork = fixtures::fork();
        let relay = fixtures::relay(false);
        let two = sum_compose(&relay, &relay).unwrap();
        let c = seq_compose(&fork, &two).unwrap();
        assert_eq!(c.arity(), (1, 2));
        // fork loses its 2 exits: 6 - 2 + 6 = 10 vertices
        assert_eq!(c.graph().vertex_count(), 10);
        // p fed o1 (now relay-1 entrance), q fed o2, r fed both
        let g = c.graph();
        let en = c.entrance_vertex(0).unwrap();
        let succs = g.successors(en);
        assert_eq!(succs.len(), 3);
        let (p, q, r) = (succs[0], succs[1], succs[2]);
        assert_eq!(g.successors(p).len(), 1);
        assert_eq!(g.successors(q).len(), 1);
        assert_eq!(g.successors(r).len(), 2);
        assert_ne!(g.successors(p)[0], g.successors(q)[0]);
        c.validate().unwrap();
    }

    #[test]
    fn sum_concatenates_open_ends() {
        let relay = fixtures::relay(false);
        let s = sum_compose(&relay, &relay).unwrap();
        assert_eq!(s.arity(), (2, 2));
        assert_eq!(s.graph().vertex_count(), 6);

        let fork = fixtures::fork();
        let fs = sum_compose(&fork, &relay).unwrap();
        assert_eq!(fs.arity(), (2, 3));
        // exit order: fork's o1, o2 then the relay's exit
        assert_eq!(fs.exit_index_of(fs.exits()[2]), Some(2));
        fs.validate().unwrap();
    }

    #[test]
    fn sum_with_empty_is_identity_on_arity() {
        let relay = fixtures::relay(false);
        let empty = fixtures::empty_romdp();
        let s = sum_compose(&relay, &empty).unwrap();
        assert_eq!(s.arity(), relay.arity());
        assert_eq!(s.graph().vertex_count(), relay.graph().vertex_count());
    }

    #[test]
    fn trace_of_loop_pair_builds_the_chain() {
        let f3 = fixtures::loop_pair();
        let (t, star) = trace_compose_full(&f3).unwrap();
        assert_eq!(t.arity(), (1, 1));
        // from i1 the unique run is i1, p1, o2, *, i2, p2, o1
        let g = t.graph();
        let i1 = t.entrance_vertex(0).unwrap();
        let p1 = g.successors(i1)[0];
        let o2 = g.successors(p1)[0];
        assert_eq!(g.successors(o2), &[star]);
        let i2 = g.successors(star)[0];
        let p2 = g.successors(i2)[0];
        assert_eq!(g.successors(p2), &[t.exit_vertex(0).unwrap()]);
        t.validate().unwrap();
    }

    #[test]
    fn trace_of_two_relays_loops_the_second() {
        let relay = fixtures::relay(false);
        let two = sum_compose(&relay, &relay).unwrap();
        let (t, star) = trace_compose_full(&two).unwrap();
        assert_eq!(t.arity(), (1, 1));
        assert_eq!(t.graph().vertex_count(), 7);
        // second relay's exit feeds *, * feeds the second relay's entrance
        let g = t.graph();
        let second_en = g.successors(star)[0];
        let second_p = g.successors(second_en)[0];
        let second_ex = g.successors(second_p)[0];
        assert_eq!(g.successors(second_ex), &[star]);
        t.validate().unwrap();
    }

    #[test]
    fn trace_requires_open_ends() {
        let closed = fixtures::closed_loop(false);
        assert!(matches!(
            trace_compose(&closed),
            Err(crate::Error::Model(ModelError::TraceOnClosed { .. }))
        ));
    }

    #[test]
    fn seq_arity_mismatch_is_reported() {
        let relay = fixtures::relay(false);
        let fork = fixtures::fork();
        assert!(matches!(
            seq_compose(&fork, &relay),
            Err(crate::Error::Model(ModelError::ArityMismatch { .. }))
        ));
    }

    #[test]
    fn compositions_preserve_invariants() {
        let relay = fixtures::relay(true);
        let fork = fixtures::fork();
        let two = sum_compose(&relay, &relay).unwrap();
        let c1 = seq_compose(&fork, &two).unwrap();
        let c2 = trace_compose(&c1).unwrap();
        for r in [&two, &c1, &c2] {
            r.validate().unwrap();
        }
        // seq deletes exactly |O^A| vertices, sum none, trace adds one
        assert_eq!(
            c1.graph().vertex_count(),
            fork.graph().vertex_count() + two.graph().vertex_count() - fork.exits().len()
        );
        assert_eq!(c2.graph().vertex_count(), c1.graph().vertex_count() + 1);
    }
}
