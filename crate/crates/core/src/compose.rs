//! Compositional operators on solutions and the one-shot bottom-up
//! algorithm with solution sharing.
//!
//! The solution of a composed roMDP equals the corresponding operator
//! applied to the component solutions, so a diagram can be verified by
//! computing leaf solutions once and folding them along the term.

use crate::diagram::{ComponentEntrance, Diagram, DiagramIndex, Term};
use crate::set::{ExitSet, VertexSet, MAX_EXITS};
use crate::solution::{local_solution, Effect, Solution};
use crate::{Error, ModelError, Result};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Resource ceilings for the exponential paths.
#[derive(Debug, Clone, Copy)]
pub struct Limits {
    /// Ceiling on any intermediate composed effect-set size and on leaf
    /// solution candidate counts. The blow-up is a documented property of
    /// the exhaustive method, so exceeding the ceiling is a resource error,
    /// not a panic.
    pub max_effects: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_effects: crate::solution::DEFAULT_EFFECT_LIMIT,
        }
    }
}

fn guard_len(len: usize, limits: &Limits, what: &str) -> Result<()> {
    if len as u64 > limits.max_effects {
        return Err(Error::guard(what, len as u64, limits.max_effects));
    }
    Ok(())
}

/// Sequential composition of solutions: for every first-stage effect
/// `⟨{x₁..x_N}, b⟩` and every choice of continuation effects `Yₖ ∈ S₂(xₖ)`,
/// the composite effect `⟨∅,b⟩ ⊔ ⊔ₖ Yₖ`. An empty exit set passes through
/// unchanged; an exit whose continuation row is empty contributes nothing.
pub fn seq_solutions(s1: &Solution, s2: &Solution, limits: &Limits) -> Result<Solution> {
    let (m, l) = s1.arity();
    let (l2, n) = s2.arity();
    if l != l2 {
        return Err(ModelError::ArityMismatch {
            path: String::new(),
            detail: format!("seq of solutions: {l} exits vs {l2} entrances"),
        }
        .into());
    }
    let mut out = Solution::new(m, n);
    for i in 0..m {
        let mut row: BTreeSet<Effect> = BTreeSet::new();
        for &e1 in s1.row(i) {
            let mut acc: BTreeSet<Effect> = BTreeSet::new();
            acc.insert(Effect::new(ExitSet::EMPTY, e1.buchi));
            for x in e1.exits.iter() {
                let mut next: BTreeSet<Effect> = BTreeSet::new();
                for &a in &acc {
                    for &y in s2.row(x) {
                        next.insert(a.join(y));
                    }
                }
                guard_len(next.len(), limits, "seq-composed effect set")?;
                acc = next;
                if acc.is_empty() {
                    break;
                }
            }
            row.extend(acc);
            guard_len(row.len(), limits, "seq-composed effect set")?;
        }
        for e in row {
            out.insert(i, e);
        }
    }
    Ok(out)
}

/// Sum of solutions: rows concatenate and the second operand's exit indices
/// shift up by the first operand's exit count.
pub fn sum_solutions(s1: &Solution, s2: &Solution) -> Result<Solution> {
    let (m1, n1) = s1.arity();
    let (m2, n2) = s2.arity();
    if n1 + n2 > MAX_EXITS {
        return Err(ModelError::TooManyExits {
            count: n1 + n2,
            max: MAX_EXITS,
        }
        .into());
    }
    let mut out = Solution::new(m1 + m2, n1 + n2);
    for i in 0..m1 {
        for &e in s1.row(i) {
            out.insert(i, e);
        }
    }
    for i in 0..m2 {
        for &e in s2.row(i) {
            out.insert(m1 + i, Effect::new(e.exits.shifted(n1), e.buchi));
        }
    }
    Ok(out)
}

/// Trace of a solution `m+1 -> n+1`: effects avoiding the trace exit pass
/// through; an effect reaching it combines with every loop-entrance effect
/// except the losing cycle `⟨{n+1},⊥⟩`.
pub fn trace_solution(s: &Solution, limits: &Limits) -> Result<Solution> {
    let (m1, n1) = s.arity();
    if m1 == 0 || n1 == 0 {
        return Err(ModelError::TraceOnClosed {
            path: String::new(),
            m: m1,
            n: n1,
        }
        .into());
    }
    let trace_exit = n1 - 1;
    let losing_cycle = Effect::new(ExitSet::singleton(trace_exit), false);
    let loop_row = s.row(m1 - 1);
    let mut out = Solution::new(m1 - 1, n1 - 1);
    for i in 0..m1 - 1 {
        let mut row: BTreeSet<Effect> = BTreeSet::new();
        for &e1 in s.row(i) {
            if !e1.exits.contains(trace_exit) {
                row.insert(e1);
                continue;
            }
            for &e2 in loop_row {
                if e2 == losing_cycle {
                    continue;
                }
                let mut exits = e1.exits.union(e2.exits);
                exits.remove(trace_exit);
                row.insert(Effect::new(exits, e1.buchi || e2.buchi));
            }
            guard_len(row.len(), limits, "trace-composed effect set")?;
        }
        for e in row {
            out.insert(i, e);
        }
    }
    Ok(out)
}

/// How the bottom-up cache is keyed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SharingMode {
    Off,
    /// Cache by the subtree term itself, leaves by name.
    Term,
    /// Cache composites by operator plus child *solution* fingerprints and
    /// leaves by their structural fingerprint; shares strictly more than
    /// term identity.
    #[default]
    Semantic,
}

#[derive(Debug, Clone, Default)]
pub struct NodeStat {
    pub path: String,
    pub kind: &'static str,
    pub cache_hit: bool,
    pub total_effects: usize,
    pub max_row_effects: usize,
}

#[derive(Debug, Clone, Default)]
pub struct BottomUpStats {
    /// Leaf solutions actually computed (cache misses at leaves).
    pub leaf_solves: usize,
    /// Composition operations actually performed (cache misses at internal
    /// nodes).
    pub compose_ops: usize,
    pub cache_hits: usize,
    /// Largest per-entrance effect count seen in any subtree solution.
    pub max_row_effects: usize,
    pub per_node: Vec<NodeStat>,
}

pub struct BottomUpOutcome {
    /// Solution of the whole diagram.
    pub root: Arc<Solution>,
    /// Per-occurrence leaf solutions in occurrence order.
    pub leaf_solutions: Vec<Arc<Solution>>,
    /// Verdict per global entrance: `⟨∅,⊤⟩` present in the root row.
    pub global_verdicts: Vec<(ComponentEntrance, bool)>,
    pub stats: BottomUpStats,
}

struct BottomUpRun<'a> {
    d: &'a Diagram,
    mode: SharingMode,
    limits: &'a Limits,
    cache: BTreeMap<String, Arc<Solution>>,
    stats: BottomUpStats,
    leaf_solutions: Vec<Arc<Solution>>,
}

/// Stable structural fingerprint of a leaf roMDP: partition, edges, open
/// ends and Büchi marking. Two leaves with equal fingerprints are the same
/// graph and therefore have the same solution.
fn leaf_fingerprint(r: &crate::romdp::RoMdp) -> String {
    use std::fmt::Write;
    let g = r.graph();
    let mut out = String::new();
    for v in 0..g.vertex_count() {
        let _ = write!(out, "{}", if g.is_player1(v) { 'p' } else { 'r' });
    }
    let _ = write!(out, "|e");
    for (u, v) in g.edges() {
        let _ = write!(out, "{u}-{v},");
    }
    let _ = write!(out, "|b");
    for v in g.buchi().iter() {
        let _ = write!(out, "{v},");
    }
    let _ = write!(out, "|i{:?}|o{:?}", r.entrances(), r.exits());
    out
}

impl<'a> BottomUpRun<'a> {
    fn record(&mut self, path: &str, kind: &'static str, hit: bool, sol: &Solution) {
        self.stats.max_row_effects = self.stats.max_row_effects.max(sol.max_row_len());
        self.stats.per_node.push(NodeStat {
            path: path.to_string(),
            kind,
            cache_hit: hit,
            total_effects: sol.total_effects(),
            max_row_effects: sol.max_row_len(),
        });
    }

    fn run(&mut self, term: &'a Term, path: String) -> Result<Arc<Solution>> {
        match term {
            Term::Leaf(name) => {
                let leaf = self
                    .d
                    .leaves
                    .get(name)
                    .ok_or_else(|| ModelError::UnknownLeaf {
                        name: name.clone(),
                        path: path.clone(),
                    })?;
                let key = match self.mode {
                    SharingMode::Off => None,
                    SharingMode::Term => Some(format!("leaf:{name}")),
                    SharingMode::Semantic => Some(format!("leaf:{}", leaf_fingerprint(leaf))),
                };
                let (sol, hit) = self.lookup_or(key, |run| {
                    run.stats.leaf_solves += 1;
                    local_solution(leaf, run.limits.max_effects)
                        .map(Arc::new)
                        .map_err(|e| at_path(e, &path))
                })?;
                self.record(&path, "leaf", hit, &sol);
                self.leaf_solutions.push(sol.clone());
                Ok(sol)
            }
            Term::Seq(a, b) => {
                let sa = self.run(a, format!("{path}.l"))?;
                let sb = self.run(b, format!("{path}.r"))?;
                let key = self.composite_key("seq", term, &[&sa, &sb]);
                let limits = self.limits;
                let (sol, hit) = self.lookup_or(key, |run| {
                    run.stats.compose_ops += 1;
                    seq_solutions(&sa, &sb, limits)
                        .map(Arc::new)
                        .map_err(|e| at_path(e, &path))
                })?;
                self.record(&path, "seq", hit, &sol);
                Ok(sol)
            }
            Term::Sum(a, b) => {
                let sa = self.run(a, format!("{path}.l"))?;
                let sb = self.run(b, format!("{path}.r"))?;
                let key = self.composite_key("sum", term, &[&sa, &sb]);
                let (sol, hit) = self.lookup_or(key, |run| {
                    run.stats.compose_ops += 1;
                    sum_solutions(&sa, &sb)
                        .map(Arc::new)
                        .map_err(|e| at_path(e, &path))
                })?;
                self.record(&path, "sum", hit, &sol);
                Ok(sol)
            }
            Term::Trace(a) => {
                let sa = self.run(a, format!("{path}.c"))?;
                let key = self.composite_key("tr", term, &[&sa]);
                let limits = self.limits;
                let (sol, hit) = self.lookup_or(key, |run| {
                    run.stats.compose_ops += 1;
                    trace_solution(&sa, limits)
                        .map(Arc::new)
                        .map_err(|e| at_path(e, &path))
                })?;
                self.record(&path, "trace", hit, &sol);
                Ok(sol)
            }
        }
    }

    fn composite_key(&self, op: &str, term: &Term, children: &[&Arc<Solution>]) -> Option<String> {
        match self.mode {
            SharingMode::Off => None,
            SharingMode::Term => Some(format!("term:{term}")),
            SharingMode::Semantic => {
                let fps: Vec<String> = children.iter().map(|s| s.fingerprint()).collect();
                Some(format!("{op}:{}", fps.join("::")))
            }
        }
    }

    fn lookup_or(
        &mut self,
        key: Option<String>,
        compute: impl FnOnce(&mut Self) -> Result<Arc<Solution>>,
    ) -> Result<(Arc<Solution>, bool)> {
        if let Some(k) = &key {
            if let Some(hit) = self.cache.get(k) {
                self.stats.cache_hits += 1;
                return Ok((hit.clone(), true));
            }
        }
        let sol = compute(self)?;
        if let Some(k) = key {
            self.cache.insert(k, sol.clone());
        }
        Ok((sol, false))
    }
}

fn at_path(e: Error, path: &str) -> Error {
    match e {
        Error::Model(ModelError::ArityMismatch { detail, .. }) => ModelError::ArityMismatch {
            path: path.to_string(),
            detail,
        }
        .into(),
        Error::Model(ModelError::TraceOnClosed { m, n, .. }) => ModelError::TraceOnClosed {
            path: path.to_string(),
            m,
            n,
        }
        .into(),
        Error::SizeGuard {
            what,
            actual,
            limit,
        } => Error::SizeGuard {
            what: format!("{what} at `{path}`"),
            actual,
            limit,
        },
        other => other,
    }
}

/// One-shot bottom-up verification: computes the solution of every subtree
/// (sharing equal solutions per `mode`) and reads global verdicts off the
/// root solution: entrance `i` wins iff `⟨∅,⊤⟩ ∈ Sol(i)`.
pub fn bottom_up(d: &Diagram, mode: SharingMode, limits: &Limits) -> Result<BottomUpOutcome> {
    let index = d.index()?;
    let mut run = BottomUpRun {
        d,
        mode,
        limits,
        cache: BTreeMap::new(),
        stats: BottomUpStats::default(),
        leaf_solutions: Vec::new(),
    };
    let root = run.run(&d.term, "$".to_string())?;
    let win = Effect::new(ExitSet::EMPTY, true);
    let global_verdicts = index
        .global_entrances()
        .iter()
        .enumerate()
        .map(|(j, &ce)| (ce, root.row(j).contains(&win)))
        .collect();
    Ok(BottomUpOutcome {
        root,
        leaf_solutions: run.leaf_solutions,
        global_verdicts,
        stats: run.stats,
    })
}

/// Winning fixpoint over effect sets: evaluates the classical Büchi
/// operator directly on per-occurrence solutions and the connection
/// mapping, without materializing the shortcut graph. Answers every
/// component entrance; used to extend the bottom-up method beyond the
/// diagram's global entrances.
pub fn solution_fixpoint_verdicts(
    index: &DiagramIndex,
    leaf_solutions: &[Arc<Solution>],
) -> Result<Vec<bool>> {
    let cpi = index.cpi();
    let n = cpi.len();
    // per cpi ordinal: candidate effects over connected exits, with their
    // κ-targets as cpi ordinals
    let mut candidates: Vec<Vec<(Effect, Vec<usize>)>> = Vec::with_capacity(n);
    for &ce in cpi {
        let sol = &leaf_solutions[ce.occ.0];
        let connected = index.connected_exits(ce.occ);
        let mut cands = Vec::new();
        for &e in sol.row(ce.idx) {
            if !e.exits.is_subset_of(connected) {
                continue;
            }
            let targets = index
                .kappa(ce.occ, e.exits)?
                .into_iter()
                .map(|t| index.cpi_ordinal(t))
                .collect();
            cands.push((e, targets));
        }
        candidates.push(cands);
    }

    let operator = |x: &VertexSet, y: &VertexSet| -> VertexSet {
        let mut out = VertexSet::new(n);
        for (ord, cands) in candidates.iter().enumerate() {
            for (e, targets) in cands {
                let qualifies = if e.exits.is_empty() {
                    // the effect vertex loops back to its own entrance
                    y.contains(ord) && (e.buchi || x.contains(ord))
                } else {
                    targets.iter().all(|&t| y.contains(t))
                        && (e.buchi || targets.iter().any(|&t| x.contains(t)))
                };
                if qualifies {
                    out.insert(ord);
                    break;
                }
            }
        }
        out
    };

    let mut y = VertexSet::full(n);
    loop {
        let mut x = VertexSet::new(n);
        loop {
            let next = operator(&x, &y);
            if next == x {
                break;
            }
            x = next;
        }
        if x == y {
            return Ok((0..n).map(|ord| y.contains(ord)).collect());
        }
        y = x;
    }
}

/// Bottom-up verdicts for every component entrance: global entrances from
/// the root solution, all entrances from the effect-level fixpoint; the two
/// routes must agree on the overlap.
pub fn bottom_up_verdicts(
    d: &Diagram,
    mode: SharingMode,
    limits: &Limits,
) -> Result<(Vec<bool>, BottomUpOutcome)> {
    let index = d.index()?;
    let outcome = bottom_up(d, mode, limits)?;
    let verdicts = solution_fixpoint_verdicts(&index, &outcome.leaf_solutions)?;
    for &(ce, v) in &outcome.global_verdicts {
        let ord = index.cpi_ordinal(ce);
        if verdicts[ord] != v {
            return Err(Error::internal(format!(
                "root-solution verdict and effect fixpoint disagree at {}",
                index.entrance_key(ce)
            )));
        }
    }
    Ok((verdicts, outcome))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::monolithic_verdicts;
    use crate::fixtures;
    use crate::solution::DEFAULT_EFFECT_LIMIT;

    fn eff(exits_1based: &[usize], buchi: bool) -> Effect {
        Effect::new(
            ExitSet::from_indices(exits_1based.iter().map(|&k| k - 1)),
            buchi,
        )
    }

    fn sol(rows: Vec<Vec<Effect>>, exit_count: usize) -> Solution {
        Solution::from_rows(rows, exit_count)
    }

    #[test]
    fn seq_passthrough_of_locally_winning_effect() {
        let s1 = sol(vec![vec![eff(&[], true)]], 1);
        let s2 = sol(vec![vec![eff(&[1], false)]], 1);
        let out = seq_solutions(&s1, &s2, &Limits::default()).unwrap();
        assert_eq!(out.row(0), &[eff(&[], true)]);
    }

    #[test]
    fn seq_dead_continuation_kills_the_effect() {
        let s1 = sol(vec![vec![eff(&[1], false)]], 1);
        let s2 = sol(vec![vec![]], 1);
        let out = seq_solutions(&s1, &s2, &Limits::default()).unwrap();
        assert!(out.row(0).is_empty());
    }

    #[test]
    fn seq_expands_the_product() {
        let s1 = sol(vec![vec![eff(&[1, 2], false)]], 2);
        let s2 = sol(
            vec![
                vec![eff(&[1], true)],
                vec![eff(&[1], false), eff(&[2], false)],
            ],
            2,
        );
        let out = seq_solutions(&s1, &s2, &Limits::default()).unwrap();
        assert_eq!(out.row(0), &[eff(&[1], true), eff(&[1, 2], true)]);
    }

    #[test]
    fn seq_guard_trips() {
        // 2^12 effects in one row exceed a tiny limit through the product
        let k = 12;
        let row1 = vec![eff(&(1..=k).collect::<Vec<_>>(), false)];
        let rows2: Vec<Vec<Effect>> = (1..=k)
            .map(|j| vec![eff(&[j], false), eff(&[(j % k) + 1], false)])
            .collect();
        let s1 = sol(vec![row1], k);
        let s2 = sol(rows2, k);
        let err = seq_solutions(&s1, &s2, &Limits { max_effects: 64 }).unwrap_err();
        assert!(matches!(err, Error::SizeGuard { .. }));
    }

    #[test]
    fn sum_shifts_exit_indices() {
        let relay_sol = sol(vec![vec![eff(&[1], false)]], 1);
        let out = sum_solutions(&relay_sol, &relay_sol).unwrap();
        assert_eq!(out.row(0), &[eff(&[1], false)]);
        assert_eq!(out.row(1), &[eff(&[2], false)]);

        let fork_sol = sol(
            vec![vec![
                eff(&[1], false),
                eff(&[2], false),
                eff(&[1, 2], false),
            ]],
            2,
        );
        let out = sum_solutions(&fork_sol, &relay_sol).unwrap();
        assert_eq!(out.arity(), (2, 3));
        assert_eq!(out.row(1), &[eff(&[3], false)]);
    }

    #[test]
    fn sum_with_empty_solution_is_identity() {
        let s = sol(vec![vec![eff(&[1], true)]], 1);
        let empty = sol(vec![], 0);
        let out = sum_solutions(&s, &empty).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn trace_combines_loop_effects() {
        // loop pair: S(1) = {⟨{2},⊤⟩}, S(2) = {⟨{1},⊥⟩}
        let s = sol(vec![vec![eff(&[2], true)], vec![eff(&[1], false)]], 2);
        let out = trace_solution(&s, &Limits::default()).unwrap();
        assert_eq!(out.row(0), &[eff(&[1], true)]);

        // losing cycle excluded
        let s = sol(vec![vec![eff(&[2], false)], vec![eff(&[2], false)]], 2);
        let out = trace_solution(&s, &Limits::default()).unwrap();
        assert!(out.row(0).is_empty());

        // Büchi self-loop yields a local win
        let s = sol(vec![vec![eff(&[2], false)], vec![eff(&[2], true)]], 2);
        let out = trace_solution(&s, &Limits::default()).unwrap();
        assert_eq!(out.row(0), &[eff(&[], true)]);
    }

    #[test]
    fn compositionality_on_fixture_pairs() {
        let limits = Limits::default();
        let a = fixtures::fork();
        let b = fixtures::relay2x();
        let sa = local_solution(&a, DEFAULT_EFFECT_LIMIT).unwrap();
        let sb = local_solution(&b, DEFAULT_EFFECT_LIMIT).unwrap();

        let composed = crate::romdp::seq_compose(&a, &b).unwrap();
        let direct = local_solution(&composed, DEFAULT_EFFECT_LIMIT).unwrap();
        let viaops = seq_solutions(&sa, &sb, &limits).unwrap();
        assert_eq!(direct, viaops);

        let summed = crate::romdp::sum_compose(&a, &b).unwrap();
        let direct = local_solution(&summed, DEFAULT_EFFECT_LIMIT).unwrap();
        let viaops = sum_solutions(&sa, &sb).unwrap();
        assert_eq!(direct, viaops);

        let f3 = fixtures::loop_pair();
        let sf3 = local_solution(&f3, DEFAULT_EFFECT_LIMIT).unwrap();
        let traced = crate::romdp::trace_compose(&f3).unwrap();
        let direct = local_solution(&traced, DEFAULT_EFFECT_LIMIT).unwrap();
        let viaops = trace_solution(&sf3, &limits).unwrap();
        assert_eq!(direct, viaops);
    }

    #[test]
    fn bottom_up_on_open_relay_is_false() {
        let d = fixtures::single_leaf("relay", fixtures::relay(true));
        let out = bottom_up(&d, SharingMode::Semantic, &Limits::default()).unwrap();
        assert_eq!(out.global_verdicts.len(), 1);
        assert!(!out.global_verdicts[0].1);
    }

    #[test]
    fn bottom_up_on_padded_loop_pair_wins() {
        let d = fixtures::padded_loop_pair();
        let (verdicts, _) =
            bottom_up_verdicts(&d, SharingMode::Semantic, &Limits::default()).unwrap();
        assert!(verdicts.iter().all(|&v| v));
        assert_eq!(verdicts, monolithic_verdicts(&d).unwrap());
    }

    #[test]
    fn bottom_up_matches_monolithic_on_double_trace() {
        let d = fixtures::double_trace();
        let (verdicts, _) =
            bottom_up_verdicts(&d, SharingMode::Semantic, &Limits::default()).unwrap();
        assert_eq!(verdicts, monolithic_verdicts(&d).unwrap());
        // exactly entrance 1 of B is losing
        assert_eq!(verdicts, vec![true, true, true, false, true, true]);
    }

    #[test]
    fn sharing_example_counts() {
        // (A ⊕ B) ⨟ (C ⊕ B) with Sol(A) = Sol(C) but different structure:
        // three leaf computations, two composition operations, two hits.
        let mut leaves = BTreeMap::new();
        leaves.insert("A".to_string(), fixtures::relay(false));
        leaves.insert("B".to_string(), fixtures::relay(true));
        leaves.insert("C".to_string(), fixtures::relay_lookalike());
        let term = Term::seq(
            Term::sum(Term::leaf("A"), Term::leaf("B")),
            Term::sum(Term::leaf("C"), Term::leaf("B")),
        );
        let d = Diagram::new(term, leaves);

        let out = bottom_up(&d, SharingMode::Semantic, &Limits::default()).unwrap();
        assert_eq!(out.stats.leaf_solves, 3);
        assert_eq!(out.stats.compose_ops, 2);
        assert_eq!(out.stats.cache_hits, 2);

        // term-identity caching only shares the repeated leaf B
        let out = bottom_up(&d, SharingMode::Term, &Limits::default()).unwrap();
        assert_eq!(out.stats.leaf_solves, 3);
        assert_eq!(out.stats.compose_ops, 3);
        assert_eq!(out.stats.cache_hits, 1);
    }

    #[test]
    fn single_leaf_has_no_hits() {
        let d = fixtures::single_leaf("relay", fixtures::relay(false));
        let out = bottom_up(&d, SharingMode::Semantic, &Limits::default()).unwrap();
        assert_eq!(out.stats.cache_hits, 0);
    }

    #[test]
    fn sum_tower_of_identical_leaves_hits_per_repeat() {
        let mut leaves = BTreeMap::new();
        leaves.insert("relay".to_string(), fixtures::relay(false));
        let k = 4;
        let mut term = Term::leaf("relay");
        for _ in 1..k {
            term = Term::sum(term, Term::leaf("relay"));
        }
        let d = Diagram::new(term, leaves);
        let out = bottom_up(&d, SharingMode::Semantic, &Limits::default()).unwrap();
        assert_eq!(out.stats.leaf_solves, 1);
        assert_eq!(out.stats.cache_hits, k - 1);
    }

    #[test]
    fn cache_modes_agree_on_results() {
        let d = fixtures::double_trace();
        let base = bottom_up(&d, SharingMode::Off, &Limits::default()).unwrap();
        for mode in [SharingMode::Term, SharingMode::Semantic] {
            let out = bottom_up(&d, mode, &Limits::default()).unwrap();
            assert_eq!(out.root.as_ref(), base.root.as_ref());
            assert_eq!(out.global_verdicts, base.global_verdicts);
        }
    }
}
