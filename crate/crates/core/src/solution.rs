//! Effects of no-lose strategies, local solutions, and maximum effects.
//!
//! A no-lose strategy from an entrance never surely loses inside the
//! component: every vertex it can reach can still reach an exit or a Büchi
//! vertex. Its effect is the pair of the proper exit set (exits it reaches)
//! and a bit recording whether a Büchi vertex is reachable. The local
//! solution collects, per entrance, the effects of all no-lose strategies;
//! it is exactly the information needed to verify the objective
//! compositionally.

use crate::graph::{self, MdpGraph, Strategy, VertexId};
use crate::oracle;
use crate::romdp::RoMdp;
use crate::set::{ExitSet, VertexSet};
use crate::{Error, Result};
use std::collections::BTreeSet;
use std::fmt;

/// Default ceiling used by the candidate-enumerating solution procedures.
pub const DEFAULT_EFFECT_LIMIT: u64 = 1 << 20;

/// An effect: the proper exit set of a no-lose strategy (0-based exit
/// indices of the owning roMDP) and whether a Büchi vertex is reachable.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Effect {
    pub exits: ExitSet,
    pub buchi: bool,
}

impl Effect {
    /// `⟨∅,⊥⟩` — never the effect of a no-lose strategy and never stored in
    /// a solution; returned by [`max_effect`] to mark a dead entrance.
    pub const SENTINEL: Effect = Effect {
        exits: ExitSet::EMPTY,
        buchi: false,
    };

    pub fn new(exits: ExitSet, buchi: bool) -> Effect {
        Effect { exits, buchi }
    }

    pub fn is_sentinel(self) -> bool {
        self == Effect::SENTINEL
    }

    /// Pointwise join: exit-set union, bit disjunction.
    pub fn join(self, other: Effect) -> Effect {
        Effect {
            exits: self.exits.union(other.exits),
            buchi: self.buchi || other.buchi,
        }
    }

    /// The order `⟨T₁,b₁⟩ ⊑ ⟨T₂,b₂⟩ iff T₁ ⊂ T₂ ∨ (T₁ ⊆ T₂ ∧ b₁ ≤ b₂)`.
    pub fn leq(self, other: Effect) -> bool {
        self.exits.is_proper_subset_of(other.exits)
            || (self.exits.is_subset_of(other.exits) && self.buchi <= other.buchi)
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.exits, if self.buchi { "+" } else { "-" })
    }
}

impl fmt::Debug for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Per-entrance sets of effects; rows are kept sorted and deduplicated, so
/// equal solutions have equal representations.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Solution {
    rows: Vec<Vec<Effect>>,
    exit_count: usize,
}

impl Solution {
    pub fn new(entrance_count: usize, exit_count: usize) -> Solution {
        Solution {
            rows: vec![Vec::new(); entrance_count],
            exit_count,
        }
    }

    pub fn from_rows(rows: Vec<Vec<Effect>>, exit_count: usize) -> Solution {
        let mut s = Solution::new(rows.len(), exit_count);
        for (i, row) in rows.into_iter().enumerate() {
            for e in row {
                s.insert(i, e);
            }
        }
        s
    }

    /// Arity `m -> n` of the owning roMDP.
    pub fn arity(&self) -> (usize, usize) {
        (self.rows.len(), self.exit_count)
    }

    pub fn entrance_count(&self) -> usize {
        self.rows.len()
    }

    pub fn exit_count(&self) -> usize {
        self.exit_count
    }

    pub fn row(&self, i: usize) -> &[Effect] {
        &self.rows[i]
    }

    pub fn insert(&mut self, i: usize, e: Effect) {
        assert!(!e.is_sentinel(), "⟨∅,⊥⟩ is never stored in a solution");
        debug_assert!(
            e.exits.is_subset_of(ExitSet::all(self.exit_count)),
            "effect {e} outside the {}-exit space",
            self.exit_count
        );
        match self.rows[i].binary_search(&e) {
            Ok(_) => {}
            Err(pos) => self.rows[i].insert(pos, e),
        }
    }

    pub fn total_effects(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn max_row_len(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Canonical serialized form: entrance-ordered, effect-sorted. Equal
    /// solutions have equal fingerprints, and fingerprint equality is
    /// structural equality.
    pub fn fingerprint(&self) -> String {
        use std::fmt::Write;
        let mut out = format!("{}->{}", self.rows.len(), self.exit_count);
        for row in &self.rows {
            out.push('|');
            for (k, e) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{:x}{}", e.exits.0, if e.buchi { '+' } else { '-' });
            }
        }
        out
    }
}

fn entrance_vertex(a: &RoMdp, i: usize) -> Result<VertexId> {
    a.entrance_vertex(i)
}

/// Backward closure of `targets` along the edges enabled by `s`.
fn coreach_under(g: &MdpGraph, s: &Strategy, targets: &VertexSet) -> VertexSet {
    let mut seen = targets.clone();
    let mut work: Vec<VertexId> = targets.iter().collect();
    while let Some(v) = work.pop() {
        for &u in g.predecessors(v) {
            let enabled = if g.is_player1(u) {
                s.choice(u).contains(v)
            } else {
                true
            };
            if enabled && seen.insert(u) {
                work.push(u);
            }
        }
    }
    seen
}

fn open_or_buchi(a: &RoMdp) -> VertexSet {
    let g = a.graph();
    let mut t = g.buchi().clone();
    let mut t2 = VertexSet::new(g.vertex_count());
    for &o in a.exits() {
        t2.insert(o);
    }
    t.union_with(&t2);
    t
}

/// Is `s` a no-lose strategy from entrance `i`? Requires `i`-locality
/// (empty choices outside the reach set) and that every reachable vertex can
/// reach an exit or a Büchi vertex under `s`.
pub fn is_no_lose(a: &RoMdp, i: usize, s: &Strategy) -> Result<bool> {
    let en = entrance_vertex(a, i)?;
    let g = a.graph();
    let r = graph::reach_from(g, s, en);
    for v in g.player1_vertices() {
        if !r.contains(v) && !s.choice(v).is_empty() {
            return Ok(false);
        }
    }
    let safe = coreach_under(g, s, &open_or_buchi(a));
    Ok(r.is_subset_of(&safe))
}

/// The effect of a no-lose strategy from entrance `i`.
pub fn effect_of(a: &RoMdp, i: usize, s: &Strategy) -> Result<Effect> {
    if !is_no_lose(a, i, s)? {
        return Err(Error::Contract(format!(
            "effect_of requires a no-lose strategy from entrance {}",
            i + 1
        )));
    }
    effect_of_unchecked(a, i, s)
}

fn effect_of_unchecked(a: &RoMdp, i: usize, s: &Strategy) -> Result<Effect> {
    let en = entrance_vertex(a, i)?;
    let r = graph::reach_from(a.graph(), s, en);
    let mut exits = ExitSet::EMPTY;
    for (k, &o) in a.exits().iter().enumerate() {
        if r.contains(o) {
            exits.insert(k);
        }
    }
    Ok(Effect::new(exits, r.intersects(a.graph().buchi())))
}

/// The `⊑`-maximum of the effects of entrance `i` whose exit set stays
/// inside `allowed`, or the sentinel `⟨∅,⊥⟩` when no such effect exists.
///
/// Computed without enumerating the solution: the winning region `W` for the
/// objective over the target `allowed exits ∪ B` consists exactly of the
/// vertices with a no-lose strategy avoiding the other exits (they are dead
/// ends outside the target, so reaching one violates the objective). The
/// strategy that randomizes over all choices staying inside `W` realizes the
/// join of all such effects.
pub fn max_effect(a: &RoMdp, i: usize, allowed: ExitSet) -> Result<Effect> {
    let en = entrance_vertex(a, i)?;
    let g = a.graph();
    let mut target = g.buchi().clone();
    let mut exits = VertexSet::new(g.vertex_count());
    for e in allowed.iter() {
        exits.insert(a.exit_vertex(e)?);
    }
    target.union_with(&exits);
    let w = graph::winning_for_target(g, &target)?;
    if !w.contains(en) {
        return Ok(Effect::SENTINEL);
    }
    let s = graph::randomize_inside(g, &w, &target).localized(g, en);
    let eff = effect_of_unchecked(a, i, &s)?;
    debug_assert!(is_no_lose(a, i, &s)?);
    debug_assert!(eff.exits.is_subset_of(allowed));
    Ok(eff)
}

/// The local solution: for every entrance, the exact set of effects of
/// no-lose strategies.
///
/// Candidates `⟨T,b⟩` are decided through maximum effects. Solutions are
/// join-closed, so the maximum effect restricted to `T` equals `⟨T,b⟩`
/// exactly when `⟨T,b⟩` is achievable with the largest Büchi bit; the
/// Büchi-avoiding candidates are decided the same way on the roMDP with its
/// Büchi vertices deleted (edges into them are player-1 choices, so deleting
/// them removes exactly the strategies that could reach them).
pub fn local_solution(a: &RoMdp, limit: u64) -> Result<Solution> {
    let (m, n) = a.arity();
    let candidates = 1u128 << n;
    if candidates > limit as u128 {
        return Err(Error::guard(
            "local solution candidate count",
            candidates.min(u64::MAX as u128) as u64,
            limit,
        ));
    }
    let no_buchi = a.without_buchi();
    let mut sol = Solution::new(m, n);
    for i in 0..m {
        // any achievable exit set is contained in the unrestricted maximum
        let top = max_effect(a, i, ExitSet::all(n))?;
        if top.is_sentinel() {
            continue;
        }
        let top_avoiding = max_effect(&no_buchi, i, top.exits)?;
        for t in top.exits.subsets() {
            let with_buchi = max_effect(a, i, t)?;
            if with_buchi == Effect::new(t, true) {
                sol.insert(i, with_buchi);
            }
            if !t.is_empty() && t.is_subset_of(top_avoiding.exits) {
                let avoiding = max_effect(&no_buchi, i, t)?;
                if avoiding == Effect::new(t, false) {
                    sol.insert(i, avoiding);
                }
            }
        }
    }
    Ok(sol)
}

/// One solution row computed by exhaustive strategy enumeration; exact by
/// construction and used as the oracle for [`local_solution`].
pub fn brute_force_solution(a: &RoMdp, i: usize) -> Result<Vec<Effect>> {
    let en = entrance_vertex(a, i)?;
    let g = a.graph();
    let mut out: BTreeSet<Effect> = BTreeSet::new();
    oracle::for_each_strategy(g, oracle::DEFAULT_STRATEGY_LIMIT, |raw| {
        let mut s = Strategy::empty(g);
        for v in g.player1_vertices() {
            let chosen = VertexSet::from_iter(g.vertex_count(), raw[v].iter().copied());
            s.set_choice(g, v, chosen)
                .expect("enumerated choices are successors");
        }
        let local = s.localized(g, en);
        if is_no_lose(a, i, &local).expect("valid entrance") {
            out.insert(effect_of_unchecked(a, i, &local).expect("valid entrance"));
        }
    })?;
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn eff(exits_1based: &[usize], buchi: bool) -> Effect {
        Effect::new(
            ExitSet::from_indices(exits_1based.iter().map(|&k| k - 1)),
            buchi,
        )
    }

    fn strategy_choosing(a: &RoMdp, choices: &[(VertexId, &[VertexId])]) -> Strategy {
        let g = a.graph();
        let mut s = Strategy::empty(g);
        for &(v, chosen) in choices {
            s.set_choice(
                g,
                v,
                VertexSet::from_iter(g.vertex_count(), chosen.iter().copied()),
            )
            .unwrap();
        }
        s
    }

    #[test]
    fn effect_join_and_order() {
        assert_eq!(eff(&[1], false).join(eff(&[2], true)), eff(&[1, 2], true));
        let e = eff(&[1, 2], true);
        assert_eq!(e.join(e), e);
        assert!(!eff(&[1], true).leq(eff(&[1], false)));
        assert!(eff(&[1], false).leq(eff(&[1], true)));
        // strict containment dominates the bit
        assert!(eff(&[1], true).leq(eff(&[1, 2], false)));
    }

    #[test]
    fn no_lose_on_relay_and_deadend() {
        let relay = fixtures::relay(false);
        let i1 = relay.entrance_vertex(0).unwrap();
        let p = relay.graph().successors(i1)[0];
        let s = strategy_choosing(&relay, &[(i1, &[p])]);
        assert!(is_no_lose(&relay, 0, &s).unwrap());
        assert!(!is_no_lose(&relay, 0, &Strategy::empty(relay.graph())).unwrap());

        let dead = fixtures::deadend();
        let i1 = dead.entrance_vertex(0).unwrap();
        let p = dead.graph().successors(i1)[0];
        let s = strategy_choosing(&dead, &[(i1, &[p])]);
        assert!(!is_no_lose(&dead, 0, &s).unwrap());
    }

    #[test]
    fn non_local_strategy_is_not_no_lose() {
        let f3 = fixtures::loop_pair();
        let i1 = f3.entrance_vertex(0).unwrap();
        let i2 = f3.entrance_vertex(1).unwrap();
        let p1 = f3.graph().successors(i1)[0];
        let p2 = f3.graph().successors(i2)[0];
        // chooses at i2 although i2 is unreachable from i1
        let s = strategy_choosing(&f3, &[(i1, &[p1]), (i2, &[p2])]);
        assert!(!is_no_lose(&f3, 0, &s).unwrap());
        assert!(is_no_lose(&f3, 0, &s.localized(f3.graph(), i1)).unwrap());
    }

    #[test]
    fn effect_of_examples() {
        let relay = fixtures::relay(true);
        let i1 = relay.entrance_vertex(0).unwrap();
        let p = relay.graph().successors(i1)[0];
        let s = strategy_choosing(&relay, &[(i1, &[p])]);
        assert_eq!(effect_of(&relay, 0, &s).unwrap(), eff(&[1], true));

        let fork = fixtures::fork();
        let i1 = fork.entrance_vertex(0).unwrap();
        let succs: Vec<_> = fork.graph().successors(i1).to_vec();
        let (p, r) = (succs[0], succs[2]);
        let s = strategy_choosing(&fork, &[(i1, &[r])]);
        assert_eq!(effect_of(&fork, 0, &s).unwrap(), eff(&[1, 2], false));
        let s = strategy_choosing(&fork, &[(i1, &[p])]);
        assert_eq!(effect_of(&fork, 0, &s).unwrap(), eff(&[1], false));
    }

    #[test]
    fn effect_of_rejects_losing_strategy() {
        let relay = fixtures::relay(false);
        let s = Strategy::empty(relay.graph());
        assert!(matches!(effect_of(&relay, 0, &s), Err(Error::Contract(_))));
    }

    #[test]
    fn max_effect_on_fork() {
        let fork = fixtures::fork();
        assert_eq!(
            max_effect(&fork, 0, ExitSet::from_indices([0, 1])).unwrap(),
            eff(&[1, 2], false)
        );
        assert_eq!(
            max_effect(&fork, 0, ExitSet::EMPTY).unwrap(),
            Effect::SENTINEL
        );
        assert_eq!(
            max_effect(&fork, 0, ExitSet::singleton(0)).unwrap(),
            eff(&[1], false)
        );
    }

    #[test]
    fn max_effect_avoids_unallowed_exits_without_deleting_them() {
        // i1 -> p -> {o1, o2}: restricting to {o1} must fail, because the
        // only live strategy also reaches o2.
        let two = fixtures::two_exit_relay();
        assert_eq!(
            max_effect(&two, 0, ExitSet::singleton(0)).unwrap(),
            Effect::SENTINEL
        );
        assert_eq!(
            max_effect(&two, 0, ExitSet::from_indices([0, 1])).unwrap(),
            eff(&[1, 2], false)
        );
    }

    #[test]
    fn local_solution_matches_brute_force_on_fixtures() {
        for a in [
            fixtures::relay(true),
            fixtures::relay(false),
            fixtures::fork(),
            fixtures::deadend(),
            fixtures::loop_pair(),
            fixtures::two_exit_relay(),
            fixtures::double_trace_leaf_a(),
            fixtures::double_trace_leaf_b(),
        ] {
            let sol = local_solution(&a, DEFAULT_EFFECT_LIMIT).unwrap();
            for i in 0..a.arity().0 {
                let brute = brute_force_solution(&a, i).unwrap();
                assert_eq!(sol.row(i), &brute[..], "entrance {i} of {a:?}");
            }
        }
    }

    #[test]
    fn local_solution_examples() {
        let sol = local_solution(&fixtures::relay(true), DEFAULT_EFFECT_LIMIT).unwrap();
        assert_eq!(sol.row(0), &[eff(&[1], true)]);

        let sol = local_solution(&fixtures::fork(), DEFAULT_EFFECT_LIMIT).unwrap();
        assert_eq!(
            sol.row(0),
            &[eff(&[1], false), eff(&[2], false), eff(&[1, 2], false)]
        );

        let sol = local_solution(&fixtures::deadend(), DEFAULT_EFFECT_LIMIT).unwrap();
        assert!(sol.row(0).is_empty());
    }

    #[test]
    fn brute_force_examples() {
        let relay = fixtures::relay(false);
        assert_eq!(
            brute_force_solution(&relay, 0).unwrap(),
            vec![eff(&[1], false)]
        );
        let f3 = fixtures::loop_pair();
        assert_eq!(
            brute_force_solution(&f3, 1).unwrap(),
            vec![eff(&[1], false)]
        );
    }

    #[test]
    fn solution_rows_are_join_closed() {
        for a in [fixtures::fork(), fixtures::double_trace_leaf_b()] {
            let sol = local_solution(&a, DEFAULT_EFFECT_LIMIT).unwrap();
            for i in 0..a.arity().0 {
                for &e1 in sol.row(i) {
                    for &e2 in sol.row(i) {
                        assert!(sol.row(i).contains(&e1.join(e2)));
                    }
                }
            }
        }
    }

    #[test]
    fn max_effect_equals_filtered_join() {
        for a in [
            fixtures::fork(),
            fixtures::loop_pair(),
            fixtures::double_trace_leaf_a(),
            fixtures::double_trace_leaf_b(),
        ] {
            let (m, n) = a.arity();
            let sol = local_solution(&a, DEFAULT_EFFECT_LIMIT).unwrap();
            for i in 0..m {
                for allowed in ExitSet::all(n).subsets() {
                    let direct = max_effect(&a, i, allowed).unwrap();
                    let joined = sol
                        .row(i)
                        .iter()
                        .filter(|e| e.exits.is_subset_of(allowed))
                        .fold(Effect::SENTINEL, |acc, &e| acc.join(e));
                    assert_eq!(direct, joined);
                }
            }
        }
    }

    #[test]
    fn max_effect_is_monotone() {
        let a = fixtures::double_trace_leaf_b();
        let n = a.arity().1;
        for small in ExitSet::all(n).subsets() {
            for big in ExitSet::all(n).subsets() {
                if small.is_subset_of(big) {
                    let e1 = max_effect(&a, 1, small).unwrap();
                    let e2 = max_effect(&a, 1, big).unwrap();
                    assert!(e1.leq(e2));
                }
            }
        }
    }

    #[test]
    fn local_win_is_the_empty_top_effect() {
        // ⟨∅,⊤⟩ is in the solution row exactly when the entrance wins the
        // objective inside the leaf
        for a in [
            fixtures::relay(true),
            fixtures::fork(),
            fixtures::deadend(),
            fixtures::loop_pair(),
            crate::romdp::trace_compose(&fixtures::loop_pair()).unwrap(),
            {
                // entrance forced into a Büchi self-loop: a local win
                let mut g = crate::graph::MdpGraph::new();
                let i1 = g.add_vertex(crate::graph::VertexKind::Player1, "i1");
                let v = g.add_vertex(crate::graph::VertexKind::Player1, "v");
                let p0 = g.add_vertex(crate::graph::VertexKind::Probabilistic, "p0");
                let q = g.add_vertex(crate::graph::VertexKind::Probabilistic, "q");
                for (a, b) in [(i1, p0), (p0, v), (v, q), (q, v)] {
                    g.add_edge(a, b).unwrap();
                }
                g.mark_buchi(q).unwrap();
                crate::romdp::RoMdp::new(g, vec![i1], vec![]).unwrap()
            },
        ] {
            let sol = local_solution(&a, DEFAULT_EFFECT_LIMIT).unwrap();
            let d = crate::fixtures::single_leaf("leaf", a.clone());
            let index = d.index().unwrap();
            for (i, &ce) in index.cpi().iter().enumerate() {
                let wins_locally = sol.row(i).contains(&Effect::new(ExitSet::EMPTY, true));
                let mono = crate::diagram::monolithic_check(&d, ce).unwrap();
                assert_eq!(wins_locally, mono, "entrance {i} of {a:?}");
            }
        }
    }

    #[test]
    fn fingerprints_distinguish_solutions() {
        let s1 = local_solution(&fixtures::fork(), DEFAULT_EFFECT_LIMIT).unwrap();
        let s2 = local_solution(&fixtures::relay(false), DEFAULT_EFFECT_LIMIT).unwrap();
        assert_ne!(s1.fingerprint(), s2.fingerprint());
        assert_eq!(
            s1.fingerprint(),
            local_solution(&fixtures::fork(), DEFAULT_EFFECT_LIMIT)
                .unwrap()
                .fingerprint()
        );
    }
}
