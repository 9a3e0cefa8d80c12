//! DOT export of the monolithic and shortcut graphs.
//!
//! Player-1 vertices render as boxes, probabilistic vertices as circles,
//! Büchi vertices with doubled peripheries; entrances and exits carry their
//! index in the label. Output is byte-stable for a fixed input.

use crate::compose::Limits;
use crate::diagram::{monolithic_semantics, Diagram};
use crate::graph::MdpGraph;
use crate::shortcut::build_shortcut_graph;
use crate::Result;
use std::collections::BTreeMap;
use std::fmt::Write;

fn dot(g: &MdpGraph, annotations: &BTreeMap<usize, String>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph mdp {{");
    let _ = writeln!(out, "  rankdir=LR;");
    for v in 0..g.vertex_count() {
        let shape = if g.is_player1(v) { "box" } else { "circle" };
        let peripheries = if g.buchi().contains(v) { 2 } else { 1 };
        let mut label = g.label(v).to_string();
        if let Some(a) = annotations.get(&v) {
            let _ = write!(label, "\\n{a}");
        }
        let _ = writeln!(
            out,
            "  n{v} [shape={shape}, peripheries={peripheries}, label=\"{label}\"];"
        );
    }
    for (u, v) in g.edges() {
        let _ = writeln!(out, "  n{u} -> n{v};");
    }
    let _ = writeln!(out, "}}");
    out
}

/// DOT text of the flattened diagram.
pub fn export_monolithic(d: &Diagram) -> Result<String> {
    let mono = monolithic_semantics(d)?;
    let mut ann = BTreeMap::new();
    for (k, &v) in mono.romdp.entrances().iter().enumerate() {
        ann.insert(v, format!("entrance {}", k + 1));
    }
    for (k, &v) in mono.romdp.exits().iter().enumerate() {
        ann.insert(v, format!("exit {}", k + 1));
    }
    Ok(dot(mono.romdp.graph(), &ann))
}

/// DOT text of the shortcut graph; exponential in the exits, hence guarded.
pub fn export_shortcut(d: &Diagram, strict: bool, limits: &Limits) -> Result<String> {
    let sc = build_shortcut_graph(d, strict, limits)?;
    let mut ann = BTreeMap::new();
    for (ord, &v) in sc.entrance_vertices.iter().enumerate() {
        let ce = sc.index.cpi()[ord];
        if sc.index.global_entrances().contains(&ce) {
            ann.insert(v, "global entrance".to_string());
        }
    }
    Ok(dot(&sc.graph, &ann))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn relay_export_shape() {
        let d = fixtures::single_leaf("relay", fixtures::relay(true));
        let text = export_monolithic(&d).unwrap();
        assert_eq!(text.matches("shape=box").count(), 2);
        assert_eq!(text.matches("shape=circle").count(), 1);
        assert_eq!(text.matches("peripheries=2").count(), 1);
        assert_eq!(text.matches(" -> ").count(), 2);
        assert!(text.contains("exit 1"));
    }

    #[test]
    fn shortcut_export_counts_effect_vertices() {
        let d = fixtures::double_trace();
        let sc = build_shortcut_graph(&d, false, &Limits::default()).unwrap();
        let text = export_shortcut(&d, false, &Limits::default()).unwrap();
        assert_eq!(
            text.matches("shape=circle").count(),
            sc.effect_vertices.len()
        );
        assert_eq!(text.matches("shape=box").count(), sc.index.cpi().len());
    }

    #[test]
    fn export_is_deterministic() {
        let d = fixtures::double_trace();
        let a = export_monolithic(&d).unwrap();
        let b = export_monolithic(&d).unwrap();
        assert_eq!(a, b);
        let a = export_shortcut(&d, false, &Limits::default()).unwrap();
        let b = export_shortcut(&d, false, &Limits::default()).unwrap();
        assert_eq!(a, b);
    }
}
