//! The explicit shortcut graph: player-1 vertices are the component
//! entrances of the diagram, probabilistic vertices are (entrance, effect)
//! pairs, and the Büchi set marks effects whose bit is set. The winning
//! region of this graph equals the winning region of the monolithic
//! semantics on the component entrances.
//!
//! The literal construction gives an effect vertex `Post = κ(X)`, which is
//! empty when `X` touches only globally open exits. With the Büchi bit set,
//! such a vertex would trivially satisfy the objective although the
//! monolithic run dies at the open exit. The default (repaired) build
//! therefore drops every effect that reaches an unconnected exit; the
//! literal construction stays available behind `strict` for comparison on
//! fully traced diagrams, where the two coincide.

use crate::compose::Limits;
use crate::diagram::{ComponentEntrance, Diagram, DiagramIndex};
use crate::graph::{self, MdpGraph, VertexId, VertexKind};
use crate::solution::{local_solution, Effect, Solution};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug)]
pub struct ShortcutGraph {
    pub graph: MdpGraph,
    pub index: DiagramIndex,
    /// Entrance vertex ids, indexed by CPI ordinal; these are the first
    /// `|CPI|` vertices of the graph in CPI order.
    pub entrance_vertices: Vec<VertexId>,
    /// One entry per effect vertex: (cpi ordinal, effect, vertex id).
    pub effect_vertices: Vec<(usize, Effect, VertexId)>,
    /// Effects omitted because they reach a globally open exit (always 0 in
    /// strict mode).
    pub dropped_effects: usize,
}

impl ShortcutGraph {
    /// Effects of one entrance present in the graph.
    pub fn effects_of(&self, ord: usize) -> impl Iterator<Item = Effect> + '_ {
        self.effect_vertices
            .iter()
            .filter(move |(o, _, _)| *o == ord)
            .map(|&(_, e, _)| e)
    }
}

/// Per-leaf-name solutions; leaves repeated in the diagram share one
/// computation.
pub fn leaf_solutions_by_name(
    d: &Diagram,
    limits: &Limits,
) -> Result<BTreeMap<String, Arc<Solution>>> {
    let mut out = BTreeMap::new();
    for (name, leaf) in &d.leaves {
        out.insert(
            name.clone(),
            Arc::new(local_solution(leaf, limits.max_effects)?),
        );
    }
    Ok(out)
}

/// Builds the shortcut graph from per-leaf local solutions.
pub fn build_shortcut_graph(d: &Diagram, strict: bool, limits: &Limits) -> Result<ShortcutGraph> {
    let index = d.index()?;
    let sols = leaf_solutions_by_name(d, limits)?;

    let mut g = MdpGraph::new();
    let entrance_vertices: Vec<VertexId> = index
        .cpi()
        .iter()
        .map(|&ce| g.add_vertex(VertexKind::Player1, index.entrance_key(ce)))
        .collect();

    let mut effect_vertices = Vec::new();
    let mut dropped = 0usize;
    let mut total: u64 = 0;
    for (ord, &ce) in index.cpi().iter().enumerate() {
        let occ_info = index.occ(ce.occ);
        let sol = &sols[&occ_info.name];
        let connected = index.connected_exits(ce.occ);
        for &e in sol.row(ce.idx) {
            if !strict && !e.exits.is_subset_of(connected) {
                dropped += 1;
                continue;
            }
            total += 1;
            if total > limits.max_effects {
                return Err(Error::guard(
                    "shortcut graph effect vertices",
                    total,
                    limits.max_effects,
                ));
            }
            let v = g.add_vertex(
                VertexKind::Probabilistic,
                format!("{}|{}", index.entrance_key(ce), e),
            );
            if e.buchi {
                g.mark_buchi(v)?;
            }
            g.add_edge(entrance_vertices[ord], v)?;
            if e.exits.is_empty() {
                g.add_edge(v, entrance_vertices[ord])?;
            } else {
                for target in index.kappa(ce.occ, e.exits)? {
                    let t_ord = index.cpi_ordinal(target);
                    g.add_edge(v, entrance_vertices[t_ord])?;
                }
            }
            effect_vertices.push((ord, e, v));
        }
    }

    Ok(ShortcutGraph {
        graph: g,
        index,
        entrance_vertices,
        effect_vertices,
        dropped_effects: dropped,
    })
}

/// Verdict of every component entrance on the shortcut graph, via the
/// classical Büchi fixpoint.
pub fn shortcut_verdicts(d: &Diagram, strict: bool, limits: &Limits) -> Result<Vec<bool>> {
    let sc = build_shortcut_graph(d, strict, limits)?;
    let win = graph::buchi_winning_region(&sc.graph);
    Ok(sc
        .entrance_vertices
        .iter()
        .map(|&v| win.contains(v))
        .collect())
}

/// Does this component entrance win on the shortcut graph?
pub fn shortcut_check(d: &Diagram, ce: ComponentEntrance, limits: &Limits) -> Result<bool> {
    let index = d.index()?;
    let ord = index.cpi_ordinal(ce);
    Ok(shortcut_verdicts(d, false, limits)?[ord])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::monolithic_verdicts;
    use crate::fixtures;
    use crate::set::ExitSet;

    fn eff(exits_1based: &[usize], buchi: bool) -> Effect {
        Effect::new(
            ExitSet::from_indices(exits_1based.iter().map(|&k| k - 1)),
            buchi,
        )
    }

    #[test]
    fn single_leaf_with_open_exit_loses() {
        // relay with Büchi: the only effect reaches the global exit, so the
        // repaired graph has no effect vertex and the entrance is losing.
        let d = fixtures::single_leaf("relay", fixtures::relay(true));
        let sc = build_shortcut_graph(&d, false, &Limits::default()).unwrap();
        assert_eq!(sc.effect_vertices.len(), 0);
        assert_eq!(sc.dropped_effects, 1);
        assert_eq!(
            shortcut_verdicts(&d, false, &Limits::default()).unwrap(),
            vec![false]
        );
        // the strict build keeps the effect vertex with empty Post
        let sc = build_shortcut_graph(&d, true, &Limits::default()).unwrap();
        assert_eq!(sc.effect_vertices.len(), 1);
        assert_eq!(sc.dropped_effects, 0);
    }

    #[test]
    fn local_win_self_loops_to_its_entrance() {
        let d = fixtures::closed_loop_pair();
        let sc = build_shortcut_graph(&d, false, &Limits::default()).unwrap();
        // the fully traced loop pair has entrance 1 winning locally through
        // the loop: effect ⟨{1},⊤⟩ over... after both traces every exit is
        // connected; check structure: each effect vertex has exactly its
        // entrance as predecessor
        for &(ord, _, v) in &sc.effect_vertices {
            assert_eq!(sc.graph.predecessors(v), &[sc.entrance_vertices[ord]]);
        }
    }

    #[test]
    fn double_trace_structure_matches_the_leaf_solutions() {
        let d = fixtures::double_trace();
        let sc = build_shortcut_graph(&d, false, &Limits::default()).unwrap();
        // A's entrance 2 carries exactly the forced fork effect; A's
        // entrance 3 carries the Büchi effect
        let a2: Vec<Effect> = sc.effects_of(1).collect();
        assert_eq!(a2, vec![eff(&[2, 3], false)]);
        let a3: Vec<Effect> = sc.effects_of(2).collect();
        assert_eq!(a3, vec![eff(&[3], true)]);
        // B's entrance 1 only reaches the global exit: dropped
        assert_eq!(sc.effects_of(3).count(), 0);
        // B's entrance 2 keeps the effects over connected exits {2,3}
        let b2: Vec<Effect> = sc.effects_of(4).collect();
        assert_eq!(
            b2,
            vec![eff(&[2], false), eff(&[3], false), eff(&[2, 3], false)]
        );
        // vertex budget audit: |V_P| = Σ|Sol(i)| - dropped
        let strict = build_shortcut_graph(&d, true, &Limits::default()).unwrap();
        assert_eq!(
            strict.effect_vertices.len(),
            sc.effect_vertices.len() + sc.dropped_effects
        );
    }

    #[test]
    fn local_win_effect_loops_back_and_wins() {
        // a leaf whose entrance wins locally: the ⟨∅,⊤⟩ effect vertex gets
        // an edge back to its own entrance and the entrance is winning
        let mut g = crate::graph::MdpGraph::new();
        let i1 = g.add_vertex(crate::graph::VertexKind::Player1, "i1");
        let v = g.add_vertex(crate::graph::VertexKind::Player1, "v");
        let p0 = g.add_vertex(crate::graph::VertexKind::Probabilistic, "p0");
        let q = g.add_vertex(crate::graph::VertexKind::Probabilistic, "q");
        for (a, b) in [(i1, p0), (p0, v), (v, q), (q, v)] {
            g.add_edge(a, b).unwrap();
        }
        g.mark_buchi(q).unwrap();
        let leaf = crate::romdp::RoMdp::new(g, vec![i1], vec![]).unwrap();
        let d = fixtures::single_leaf("win", leaf);
        let sc = build_shortcut_graph(&d, false, &Limits::default()).unwrap();
        let (ord, e, vert) = sc.effect_vertices[0];
        assert_eq!(e, Effect::new(ExitSet::EMPTY, true));
        assert_eq!(sc.graph.successors(vert), &[sc.entrance_vertices[ord]]);
        assert_eq!(
            shortcut_verdicts(&d, false, &Limits::default()).unwrap(),
            vec![true]
        );
    }

    #[test]
    fn shortcut_matches_monolithic_on_fixtures() {
        for d in [
            fixtures::double_trace(),
            fixtures::closed_loop_pair(),
            fixtures::padded_loop_pair(),
            fixtures::single_leaf("relay", fixtures::relay(true)),
            fixtures::single_leaf("fork", fixtures::fork()),
            fixtures::single_leaf("deadend", fixtures::deadend()),
        ] {
            let mono = monolithic_verdicts(&d).unwrap();
            let sc = shortcut_verdicts(&d, false, &Limits::default()).unwrap();
            assert_eq!(mono, sc);
        }
    }

    #[test]
    fn double_trace_verdicts() {
        let d = fixtures::double_trace();
        let v = shortcut_verdicts(&d, false, &Limits::default()).unwrap();
        // only entrance 1 of B is losing
        assert_eq!(v, vec![true, true, true, false, true, true]);
    }

    #[test]
    fn strict_and_repaired_coincide_without_open_exits() {
        // with every exit traced or glued away, no effect touches an open
        // exit, so the literal and repaired constructions are the same
        // graph and give the same verdicts
        for d in [
            fixtures::closed_loop_pair(),
            fixtures::padded_loop_pair(),
            fixtures::exitblow(3),
        ] {
            assert!(d.index().unwrap().global_exits().is_empty());
            let repaired = build_shortcut_graph(&d, false, &Limits::default()).unwrap();
            let strict = build_shortcut_graph(&d, true, &Limits::default()).unwrap();
            assert_eq!(repaired.dropped_effects, 0);
            assert_eq!(repaired.graph, strict.graph);
            assert_eq!(
                shortcut_verdicts(&d, false, &Limits::default()).unwrap(),
                shortcut_verdicts(&d, true, &Limits::default()).unwrap()
            );
        }
    }

    #[test]
    fn guard_trips_on_exit_blowup() {
        let d = fixtures::exitblow(6);
        let err = build_shortcut_graph(&d, false, &Limits { max_effects: 8 }).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
    }
}
