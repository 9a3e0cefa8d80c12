//! Canonical fixture models used across the test suites and shipped as
//! example files.
//!
//! The `double_trace` diagram wires two 3→3 components in sequence and
//! traces the last two wires back, leaving one global entrance and one
//! global exit. Its leaf solutions are chosen so that exactly one entrance
//! of the right component is losing, which exercises every interesting
//! branch of the refinement loop.

use crate::diagram::{Diagram, Term};
use crate::graph::{MdpGraph, VertexId, VertexKind};
use crate::romdp::RoMdp;
use std::collections::BTreeMap;

fn p1(g: &mut MdpGraph, name: &str) -> VertexId {
    g.add_vertex(VertexKind::Player1, name)
}

fn pr(g: &mut MdpGraph, name: &str) -> VertexId {
    g.add_vertex(VertexKind::Probabilistic, name)
}

/// F1 "relay": `i1 -> p -> o1`, optionally with `p` Büchi. Arity 1→1.
pub fn relay(buchi: bool) -> RoMdp {
    let mut g = MdpGraph::new();
    let i1 = p1(&mut g, "i1");
    let o1 = p1(&mut g, "o1");
    let p = pr(&mut g, "p");
    g.add_edge(i1, p).unwrap();
    g.add_edge(p, o1).unwrap();
    if buchi {
        g.mark_buchi(p).unwrap();
    }
    RoMdp::new(g, vec![i1], vec![o1]).unwrap()
}

/// F2 "fork": `i1 -> {p,q,r}`, `p -> o1`, `q -> o2`, `r -> {o1,o2}`; no
/// Büchi vertices. Arity 1→2.
pub fn fork() -> RoMdp {
    let mut g = MdpGraph::new();
    let i1 = p1(&mut g, "i1");
    let o1 = p1(&mut g, "o1");
    let o2 = p1(&mut g, "o2");
    let p = pr(&mut g, "p");
    let q = pr(&mut g, "q");
    let r = pr(&mut g, "r");
    for (a, b) in [
        (i1, p),
        (i1, q),
        (i1, r),
        (p, o1),
        (q, o2),
        (r, o1),
        (r, o2),
    ] {
        g.add_edge(a, b).unwrap();
    }
    RoMdp::new(g, vec![i1], vec![o1, o2]).unwrap()
}

/// F3 "loop pair": `i1 -> p1 -> o2` with `p1` Büchi, and `i2 -> p2 -> o1`.
/// Arity 2→2; tracing twice closes a forced Büchi loop.
pub fn loop_pair() -> RoMdp {
    let mut g = MdpGraph::new();
    let i1 = p1(&mut g, "i1");
    let i2 = p1(&mut g, "i2");
    let o1 = p1(&mut g, "o1");
    let o2 = p1(&mut g, "o2");
    let pb = pr(&mut g, "p1");
    let p2 = pr(&mut g, "p2");
    for (a, b) in [(i1, pb), (pb, o2), (i2, p2), (p2, o1)] {
        g.add_edge(a, b).unwrap();
    }
    g.mark_buchi(pb).unwrap();
    RoMdp::new(g, vec![i1, i2], vec![o1, o2]).unwrap()
}

/// F4 "deadend": `i1 -> p`, `p -> {d, o1}` where `d` has no successors and
/// there are no Büchi vertices; the entrance is hopeless.
pub fn deadend() -> RoMdp {
    let mut g = MdpGraph::new();
    let i1 = p1(&mut g, "i1");
    let o1 = p1(&mut g, "o1");
    let d = p1(&mut g, "d");
    let p = pr(&mut g, "p");
    for (a, b) in [(i1, p), (p, d), (p, o1)] {
        g.add_edge(a, b).unwrap();
    }
    RoMdp::new(g, vec![i1], vec![o1]).unwrap()
}

pub struct DeadendIds {
    pub i1: VertexId,
    pub o1: VertexId,
    pub d: VertexId,
    pub p: VertexId,
}

/// The deadend graph alone, for graph-level tests.
pub fn deadend_graph() -> (MdpGraph, DeadendIds) {
    let r = deadend();
    let ids = DeadendIds {
        i1: 0,
        o1: 1,
        d: 2,
        p: 3,
    };
    (r.graph().clone(), ids)
}

/// `i1 -> p -> {o1, o2}`: a single strategy that reaches both exits.
pub fn two_exit_relay() -> RoMdp {
    let mut g = MdpGraph::new();
    let i1 = p1(&mut g, "i1");
    let o1 = p1(&mut g, "o1");
    let o2 = p1(&mut g, "o2");
    let p = pr(&mut g, "p");
    for (a, b) in [(i1, p), (p, o1), (p, o2)] {
        g.add_edge(a, b).unwrap();
    }
    RoMdp::new(g, vec![i1], vec![o1, o2]).unwrap()
}

/// Closed 0→0 loop `v -> p -> v`, optionally Büchi.
pub fn closed_loop(buchi: bool) -> RoMdp {
    let mut g = MdpGraph::new();
    let v = p1(&mut g, "v");
    let p = pr(&mut g, "p");
    g.add_edge(v, p).unwrap();
    g.add_edge(p, v).unwrap();
    if buchi {
        g.mark_buchi(p).unwrap();
    }
    RoMdp::new(g, vec![], vec![]).unwrap()
}

/// The empty 0→0 roMDP.
pub fn empty_romdp() -> RoMdp {
    RoMdp::new(MdpGraph::new(), vec![], vec![]).unwrap()
}

/// Left component of the double-trace diagram, 3→3.
///
/// Local solution: entrance 1 reaches exit 1 or exit 2 independently,
/// entrance 2 is forced onto both exits 2 and 3, entrance 3 reaches exit 3
/// through the only Büchi vertex.
pub fn double_trace_leaf_a() -> RoMdp {
    let mut g = MdpGraph::new();
    let en1 = p1(&mut g, "en1");
    let en2 = p1(&mut g, "en2");
    let en3 = p1(&mut g, "en3");
    let ex1 = p1(&mut g, "ex1");
    let ex2 = p1(&mut g, "ex2");
    let ex3 = p1(&mut g, "ex3");
    let p11 = pr(&mut g, "p11");
    let p12 = pr(&mut g, "p12");
    let p2 = pr(&mut g, "p2");
    let p3 = pr(&mut g, "p3");
    for (a, b) in [
        (en1, p11),
        (p11, ex1),
        (en1, p12),
        (p12, ex2),
        (en2, p2),
        (p2, ex2),
        (p2, ex3),
        (en3, p3),
        (p3, ex3),
    ] {
        g.add_edge(a, b).unwrap();
    }
    g.mark_buchi(p3).unwrap();
    RoMdp::new(g, vec![en1, en2, en3], vec![ex1, ex2, ex3]).unwrap()
}

/// Right component of the double-trace diagram, 3→3, no Büchi vertices.
///
/// Entrance 1 only reaches exit 1, entrance 2 reaches any subset of the
/// exits, entrance 3 only reaches exit 3.
pub fn double_trace_leaf_b() -> RoMdp {
    let mut g = MdpGraph::new();
    let en1 = p1(&mut g, "en1");
    let en2 = p1(&mut g, "en2");
    let en3 = p1(&mut g, "en3");
    let ex1 = p1(&mut g, "ex1");
    let ex2 = p1(&mut g, "ex2");
    let ex3 = p1(&mut g, "ex3");
    let q1 = pr(&mut g, "q1");
    let q21 = pr(&mut g, "q21");
    let q22 = pr(&mut g, "q22");
    let q23 = pr(&mut g, "q23");
    let q3 = pr(&mut g, "q3");
    for (a, b) in [
        (en1, q1),
        (q1, ex1),
        (en2, q21),
        (q21, ex1),
        (en2, q22),
        (q22, ex2),
        (en2, q23),
        (q23, ex3),
        (en3, q3),
        (q3, ex3),
    ] {
        g.add_edge(a, b).unwrap();
    }
    RoMdp::new(g, vec![en1, en2, en3], vec![ex1, ex2, ex3]).unwrap()
}

/// `trace(trace(seq(A, B)))` over the two 3→3 leaves: one global entrance
/// (entrance 1 of A) and one global exit (exit 1 of B); B's exits 2 and 3
/// loop back to A's entrances 2 and 3.
pub fn double_trace() -> Diagram {
    let mut leaves = BTreeMap::new();
    leaves.insert("A".to_string(), double_trace_leaf_a());
    leaves.insert("B".to_string(), double_trace_leaf_b());
    Diagram::new(
        Term::trace(Term::trace(Term::seq(Term::leaf("A"), Term::leaf("B")))),
        leaves,
    )
}

/// `trace(trace(F3))`: the loop pair fully closed, a forced Büchi loop.
pub fn closed_loop_pair() -> Diagram {
    let mut leaves = BTreeMap::new();
    leaves.insert("F3".to_string(), loop_pair());
    Diagram::new(Term::trace(Term::trace(Term::leaf("F3"))), leaves)
}

/// A diagram with a single occurrence of one leaf.
pub fn single_leaf(name: &str, r: RoMdp) -> Diagram {
    let mut leaves = BTreeMap::new();
    leaves.insert(name.to_string(), r);
    Diagram::new(Term::leaf(name), leaves)
}

/// Exit-scaling family: leaf `X` has one working entrance with `k`
/// independent choice gadgets, so every nonempty subset of its exits is a
/// proper exit set and its solution has `2^k - 1` effects. The partner leaf
/// `Y` merges all exits into one wire that is traced back through X's
/// second entrance, which passes the only Büchi vertex.
///
/// Bottom-up effort on this family grows exponentially in `k` while the
/// refinement loop stays quadratic in the number of component entrances.
pub fn exitblow(k: usize) -> Diagram {
    assert!(
        (1..=crate::set::MAX_EXITS).contains(&k),
        "exitblow arity out of range"
    );
    // X: 2 -> k
    let mut g = MdpGraph::new();
    let i1 = p1(&mut g, "i1");
    let i2 = p1(&mut g, "i2");
    let exits: Vec<VertexId> = (0..k).map(|j| p1(&mut g, &format!("x{}", j + 1))).collect();
    for (j, &x) in exits.iter().enumerate() {
        let pj = pr(&mut g, &format!("p{}", j + 1));
        g.add_edge(i1, pj).unwrap();
        g.add_edge(pj, x).unwrap();
    }
    let r = pr(&mut g, "r");
    g.add_edge(i2, r).unwrap();
    g.add_edge(r, exits[0]).unwrap();
    g.mark_buchi(r).unwrap();
    let x_leaf = RoMdp::new(g, vec![i1, i2], exits).unwrap();

    // Y: k -> 1
    let mut g = MdpGraph::new();
    let fs: Vec<VertexId> = (0..k).map(|j| p1(&mut g, &format!("f{}", j + 1))).collect();
    let out = p1(&mut g, "g");
    for (j, &fj) in fs.iter().enumerate() {
        let qj = pr(&mut g, &format!("q{}", j + 1));
        g.add_edge(fj, qj).unwrap();
        g.add_edge(qj, out).unwrap();
    }
    let y_leaf = RoMdp::new(g, fs, vec![out]).unwrap();

    let mut leaves = BTreeMap::new();
    leaves.insert("X".to_string(), x_leaf);
    leaves.insert("Y".to_string(), y_leaf);
    // X ⨟ Y : 2 -> 1, traced: 1 -> 0 with the global entrance flowing
    // through the exponential leaf and looping through the Büchi gadget.
    Diagram::new(
        Term::trace(Term::seq(Term::leaf("X"), Term::leaf("Y"))),
        leaves,
    )
}

/// `relay2x`: two relays side by side, 2→2.
pub fn relay2x() -> RoMdp {
    let r = relay(false);
    crate::romdp::sum_compose(&r, &r).unwrap()
}

/// A structurally different leaf with the same local solution as
/// `relay(false)`; feeds the solution-sharing tests.
pub fn relay_lookalike() -> RoMdp {
    let mut g = MdpGraph::new();
    let i1 = p1(&mut g, "i1");
    let o1 = p1(&mut g, "o1");
    let pa = pr(&mut g, "pa");
    let pb = pr(&mut g, "pb");
    for (a, b) in [(i1, pa), (i1, pb), (pa, o1), (pb, o1)] {
        g.add_edge(a, b).unwrap();
    }
    RoMdp::new(g, vec![i1], vec![o1]).unwrap()
}

/// `trace(seq(trace(F3), relay))`: the loop pair traced once, padded with a
/// relay, and traced again; fully closed and winning from every component
/// entrance.
pub fn padded_loop_pair() -> Diagram {
    let mut leaves = BTreeMap::new();
    leaves.insert("F3".to_string(), loop_pair());
    leaves.insert("relay".to_string(), relay(false));
    Diagram::new(
        Term::trace(Term::seq(
            Term::trace(Term::leaf("F3")),
            Term::leaf("relay"),
        )),
        leaves,
    )
}
