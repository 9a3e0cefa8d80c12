//! Seeded random diagram generation for differential testing.
//!
//! The term is sampled top-down with arity targets, and leaves are
//! synthesized (or reused) to fit the arity a hole demands, so every
//! generated instance is well formed by construction: layered edges keep
//! the partitions alternating, entrances never gain predecessors and exits
//! never gain successors.

use crate::diagram::{Diagram, Term};
use crate::graph::{MdpGraph, VertexKind};
use crate::romdp::RoMdp;
use crate::{Error, Result};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct GenProfile {
    /// Soft ceiling on distinct leaves; occurrences beyond it reuse
    /// arity-compatible leaves.
    pub leaf_count: usize,
    /// Ceiling on vertices per leaf, open ends included.
    pub vertices_per_leaf: usize,
    /// Ceiling on entrance and exit counts of every leaf.
    pub max_arity: usize,
    /// Probability weight of a trace node wherever one is legal.
    pub trace_bias: f64,
    /// Probability that a probabilistic vertex is Büchi.
    pub buchi_density: f64,
    /// Probability of reusing an arity-compatible existing leaf.
    pub shared_leaf_probability: f64,
    /// Target number of leaf occurrences in the term.
    pub occurrences: usize,
}

impl Default for GenProfile {
    fn default() -> Self {
        GenProfile {
            leaf_count: 4,
            vertices_per_leaf: 10,
            max_arity: 3,
            trace_bias: 0.5,
            buchi_density: 0.25,
            shared_leaf_probability: 0.4,
            occurrences: 5,
        }
    }
}

impl GenProfile {
    fn validate(&self) -> Result<()> {
        if self.max_arity == 0 {
            return Err(Error::Profile("max arity must be at least 1".into()));
        }
        if self.max_arity > crate::set::MAX_EXITS {
            return Err(Error::Profile(format!(
                "max arity {} exceeds the exit limit {}",
                self.max_arity,
                crate::set::MAX_EXITS
            )));
        }
        if self.vertices_per_leaf < 2 * self.max_arity + 1 {
            return Err(Error::Profile(format!(
                "vertex budget {} cannot fit open ends of arity {}",
                self.vertices_per_leaf, self.max_arity
            )));
        }
        if self.occurrences == 0 || self.leaf_count == 0 {
            return Err(Error::Profile("need at least one leaf".into()));
        }
        for (name, v) in [
            ("trace bias", self.trace_bias),
            ("Büchi density", self.buchi_density),
            ("shared-leaf probability", self.shared_leaf_probability),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Profile(format!("{name} must be within [0,1]")));
            }
        }
        Ok(())
    }
}

struct Gen<'a> {
    rng: ChaCha8Rng,
    profile: &'a GenProfile,
    leaves: Vec<(String, RoMdp)>,
    budget: usize,
}

impl Gen<'_> {
    fn term(&mut self, m: usize, n: usize, depth: usize) -> Term {
        let p = self.profile;
        self.budget = self.budget.saturating_sub(1);
        let can_trace = m < p.max_arity && n < p.max_arity;
        if self.budget == 0 || depth >= 10 {
            return self.leaf(m, n);
        }

        let w_leaf = 0.25 + depth as f64 * 0.08;
        let w_trace = if can_trace { p.trace_bias } else { 0.0 };
        let w_seq = 0.35;
        let w_sum = 0.3;
        let total = w_leaf + w_trace + w_seq + w_sum;
        let mut pick = self.rng.random::<f64>() * total;
        if pick < w_leaf {
            return self.leaf(m, n);
        }
        pick -= w_leaf;
        if pick < w_trace {
            let inner = self.term(m + 1, n + 1, depth + 1);
            return Term::trace(inner);
        }
        pick -= w_trace;
        if pick < w_seq {
            let l = if self.rng.random_bool(0.9) {
                self.rng.random_range(1..=p.max_arity)
            } else {
                0
            };
            let a = self.term(m, l, depth + 1);
            let b = self.term(l, n, depth + 1);
            return Term::seq(a, b);
        }
        let m1 = self.rng.random_range(0..=m);
        let n1 = self.rng.random_range(0..=n);
        let a = self.term(m1, n1, depth + 1);
        let b = self.term(m - m1, n - n1, depth + 1);
        Term::sum(a, b)
    }

    fn leaf(&mut self, m: usize, n: usize) -> Term {
        let fitting: Vec<usize> = self
            .leaves
            .iter()
            .enumerate()
            .filter(|(_, (_, r))| r.arity() == (m, n))
            .map(|(k, _)| k)
            .collect();
        let budget_full = self.leaves.len() >= self.profile.leaf_count;
        let reuse = !fitting.is_empty()
            && (budget_full || self.rng.random_bool(self.profile.shared_leaf_probability));
        if reuse {
            let k = fitting[self.rng.random_range(0..fitting.len())];
            return Term::Leaf(self.leaves[k].0.clone());
        }
        let name = format!("L{}", self.leaves.len());
        let leaf = self.synth_leaf(m, n);
        self.leaves.push((name.clone(), leaf));
        Term::Leaf(name)
    }

    fn synth_leaf(&mut self, m: usize, n: usize) -> RoMdp {
        let p = self.profile;
        let open = m + n;
        let spare = p.vertices_per_leaf - open;
        let internal1 = self.rng.random_range(0..=spare.saturating_sub(1).min(2));
        let nprob_max = (spare - internal1).min(4);
        let nprob = if nprob_max == 0 {
            0
        } else {
            self.rng.random_range(1..=nprob_max)
        };

        let mut g = MdpGraph::new();
        let entrances: Vec<usize> = (0..m)
            .map(|k| g.add_vertex(VertexKind::Player1, format!("e{}", k + 1)))
            .collect();
        let exits: Vec<usize> = (0..n)
            .map(|k| g.add_vertex(VertexKind::Player1, format!("x{}", k + 1)))
            .collect();
        let internals: Vec<usize> = (0..internal1)
            .map(|k| g.add_vertex(VertexKind::Player1, format!("v{}", k + 1)))
            .collect();
        let probs: Vec<usize> = (0..nprob)
            .map(|k| g.add_vertex(VertexKind::Probabilistic, format!("p{}", k + 1)))
            .collect();

        // player-1 sources fan into the probabilistic layer
        for &s in entrances.iter().chain(&internals) {
            if probs.is_empty() {
                break;
            }
            let deg_max = probs.len().min(3);
            let deg = if self.rng.random_bool(0.9) {
                self.rng.random_range(1..=deg_max)
            } else {
                0
            };
            for idx in sample(&mut self.rng, probs.len(), deg) {
                g.add_edge(s, probs[idx])
                    .expect("bipartite by construction");
            }
        }
        // probabilistic vertices fan back to exits and internal player-1
        let sinks: Vec<usize> = internals.iter().chain(&exits).copied().collect();
        for &q in &probs {
            if !sinks.is_empty() {
                let deg_max = sinks.len().min(3);
                let deg = if self.rng.random_bool(0.9) {
                    self.rng.random_range(1..=deg_max)
                } else {
                    0
                };
                for idx in sample(&mut self.rng, sinks.len(), deg) {
                    g.add_edge(q, sinks[idx])
                        .expect("bipartite by construction");
                }
            }
            if self.rng.random_bool(p.buchi_density) {
                g.mark_buchi(q).expect("probabilistic vertex");
            }
        }
        RoMdp::new(g, entrances, exits).expect("generated leaves are well formed")
    }
}

/// Generates a diagram deterministically from a seed. The root arity stays
/// small so the diagram keeps a handful of global open ends.
pub fn generate(seed: u64, profile: &GenProfile) -> Result<Diagram> {
    profile.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(seed),
        profile,
        leaves: Vec::new(),
        budget: profile.occurrences,
    };
    let root_cap = profile.max_arity.min(2);
    let m = g.rng.random_range(0..=root_cap);
    let n = g.rng.random_range(0..=root_cap);
    let term = g.term(m, n, 0);
    let leaves: BTreeMap<String, RoMdp> = g.leaves.into_iter().collect();
    let d = Diagram::new(term, leaves);
    d.index()
        .map_err(|e| Error::internal(format!("generated diagram failed validation: {e}")))?;
    Ok(d)
}

/// Operator-node census of a term: (leaves, seqs, sums, traces).
pub fn term_stats(t: &Term) -> (usize, usize, usize, usize) {
    match t {
        Term::Leaf(_) => (1, 0, 0, 0),
        Term::Seq(a, b) => {
            let (l1, q1, s1, t1) = term_stats(a);
            let (l2, q2, s2, t2) = term_stats(b);
            (l1 + l2, q1 + q2 + 1, s1 + s2, t1 + t2)
        }
        Term::Sum(a, b) => {
            let (l1, q1, s1, t1) = term_stats(a);
            let (l2, q2, s2, t2) = term_stats(b);
            (l1 + l2, q1 + q2, s1 + s2 + 1, t1 + t2)
        }
        Term::Trace(a) => {
            let (l, q, s, t) = term_stats(a);
            (l, q, s, t + 1)
        }
    }
}
