//! Shared helpers for the integration suites: strategy enumeration into
//! library strategies, strategy transport along composition remaps, and a
//! leaf pool harvested from generated diagrams.

use sdmc::diagram::Diagram;
use sdmc::generator::{self, GenProfile};
use sdmc::graph::{MdpGraph, Strategy};
use sdmc::oracle;
use sdmc::romdp::RoMdp;
use sdmc::set::VertexSet;
use sdmc::solution::is_no_lose;

/// The generation profile the acceptance criteria run on: at most 5
/// distinct leaves of at most 12 vertices with arities up to 3 and a trace
/// share well above 30%.
pub fn acceptance_profile() -> GenProfile {
    GenProfile {
        leaf_count: 5,
        vertices_per_leaf: 12,
        max_arity: 3,
        trace_bias: 0.5,
        buchi_density: 0.25,
        shared_leaf_probability: 0.4,
        occurrences: 5,
    }
}

pub fn corpus(seeds: std::ops::RangeInclusive<u64>) -> Vec<(u64, Diagram)> {
    seeds
        .map(|s| (s, generator::generate(s, &acceptance_profile()).unwrap()))
        .collect()
}

/// All distinct, i-local no-lose strategies from one entrance, up to `cap`.
pub fn no_lose_strategies(a: &RoMdp, entrance: usize, cap: usize) -> Vec<Strategy> {
    let g = a.graph();
    let start = a.entrances()[entrance];
    let mut out: Vec<Strategy> = Vec::new();
    let res = oracle::for_each_strategy(g, 200_000, |raw| {
        if out.len() >= cap {
            return;
        }
        let mut s = Strategy::empty(g);
        for v in g.player1_vertices() {
            let chosen = VertexSet::from_iter(g.vertex_count(), raw[v].iter().copied());
            s.set_choice(g, v, chosen).unwrap();
        }
        let local = s.localized(g, start);
        if is_no_lose(a, entrance, &local).unwrap() && !out.contains(&local) {
            out.push(local);
        }
    });
    if res.is_err() {
        return Vec::new();
    }
    out
}

/// Transports a strategy along a composition remap (None marks deleted
/// vertices, which never carry choices).
pub fn map_strategy(
    old_g: &MdpGraph,
    new_g: &MdpGraph,
    s: &Strategy,
    remap: &[Option<usize>],
) -> Strategy {
    let mut out = Strategy::empty(new_g);
    for v in old_g.player1_vertices() {
        let Some(nv) = remap[v] else { continue };
        if s.choice(v).is_empty() {
            continue;
        }
        let chosen = VertexSet::from_iter(
            new_g.vertex_count(),
            s.choice(v)
                .iter()
                .map(|c| remap[c].expect("successor survives")),
        );
        out.set_choice(new_g, nv, chosen).unwrap();
    }
    out
}

/// Identity remap padded to a larger graph (for trace, which only appends
/// one fresh vertex).
pub fn identity_remap(old_len: usize) -> Vec<Option<usize>> {
    (0..old_len).map(Some).collect()
}

/// Leaves harvested from generated diagrams until `want` are collected.
pub fn leaf_pool(want: usize) -> Vec<RoMdp> {
    let mut out = Vec::new();
    let mut seed = 10_000u64;
    let profile = acceptance_profile();
    while out.len() < want {
        let d = generator::generate(seed, &profile).unwrap();
        for leaf in d.leaves.values() {
            if out.len() < want {
                out.push(leaf.clone());
            }
        }
        seed += 1;
    }
    out
}
