//! Iterative strategy refinement: the polynomial-time decision procedure.
//!
//! Instead of all effects, the algorithm tracks one configuration — the
//! maximum effect per live entrance, restricted to the exits whose
//! connected entrances are still live. Each outer iteration materializes
//! the tiny configuration graph (one effect vertex per live entrance), runs
//! a backward reachability pass towards the Büchi effects, prunes the
//! entrances that cannot reach one, and recomputes their maximum effects
//! under the shrunken allowed sets. The loop mirrors the classical
//! `νY.μX` Büchi iteration on the shortcut graph without ever building it.

use crate::diagram::{ComponentEntrance, Diagram, DiagramIndex};
use crate::graph::{MdpGraph, VertexId, VertexKind};
use crate::romdp::RoMdp;
use crate::set::{ExitSet, VertexSet};
use crate::solution::{max_effect, Effect};
use crate::Result;
use std::collections::BTreeMap;

/// Inclusive backward reachability closure: all vertices with a path (of
/// any length, including length zero) into `targets`.
pub fn can_reach(g: &MdpGraph, targets: &VertexSet) -> Result<VertexSet> {
    if targets.capacity() != g.vertex_count() {
        return Err(crate::Error::internal(
            "target set capacity does not match graph".to_string(),
        ));
    }
    let mut seen = targets.clone();
    let mut work: Vec<VertexId> = targets.iter().collect();
    while let Some(v) = work.pop() {
        for &u in g.predecessors(v) {
            if seen.insert(u) {
                work.push(u);
            }
        }
    }
    Ok(seen)
}

/// Caching policy for maximum-effect queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CacheMode {
    Off,
    /// Reuse only exact allowed-set matches.
    Exact,
    /// Also reuse a record `(Y, ⟨Y',b⟩)` for any query `Y''` with
    /// `Y' ⊆ Y'' ⊆ Y`; sound by the monotonicity of maximum effects.
    #[default]
    Monotone,
}

/// Cache of maximum-effect queries, keyed by leaf name and entrance index
/// so records are shared across repeated occurrences of the same leaf
/// (the Büchi marking is part of the leaf, so equal names imply equal
/// graphs).
#[derive(Debug, Default)]
pub struct MaxEffectCache {
    mode: CacheMode,
    records: BTreeMap<(String, usize), Vec<(ExitSet, Effect)>>,
    pub hits: u64,
    pub misses: u64,
}

impl MaxEffectCache {
    pub fn new(mode: CacheMode) -> Self {
        MaxEffectCache {
            mode,
            ..Default::default()
        }
    }

    pub fn queries(&self) -> u64 {
        self.hits + self.misses
    }

    fn lookup(&mut self, leaf: &str, entrance: usize, allowed: ExitSet) -> Option<Effect> {
        if self.mode == CacheMode::Off {
            return None;
        }
        let recs = self.records.get(&(leaf.to_string(), entrance))?;
        for &(query, result) in recs {
            let hit = match self.mode {
                CacheMode::Off => false,
                CacheMode::Exact => query == allowed,
                CacheMode::Monotone => {
                    result.exits.is_subset_of(allowed) && allowed.is_subset_of(query)
                }
            };
            if hit {
                return Some(result);
            }
        }
        None
    }

    fn store(&mut self, leaf: &str, entrance: usize, allowed: ExitSet, result: Effect) {
        if self.mode == CacheMode::Off {
            return;
        }
        self.records
            .entry((leaf.to_string(), entrance))
            .or_default()
            .push((allowed, result));
    }
}

/// Maximum effect through the cache; identical results to [`max_effect`]
/// with any cache mode.
pub fn cached_max_effect(
    cache: &mut MaxEffectCache,
    leaf: &RoMdp,
    leaf_name: &str,
    entrance: usize,
    allowed: ExitSet,
) -> Result<Effect> {
    if let Some(e) = cache.lookup(leaf_name, entrance, allowed) {
        cache.hits += 1;
        return Ok(e);
    }
    cache.misses += 1;
    let e = max_effect(leaf, entrance, allowed)?;
    cache.store(leaf_name, entrance, allowed, e);
    Ok(e)
}

/// Shared plumbing for the refinement operators: the diagram index plus
/// per-occurrence leaf references.
pub struct RefinementContext<'a> {
    pub index: DiagramIndex,
    occ_leaf: Vec<&'a RoMdp>,
    occ_name: Vec<String>,
}

impl<'a> RefinementContext<'a> {
    pub fn new(d: &'a Diagram) -> Result<Self> {
        let index = d.index()?;
        let mut occ_leaf = Vec::new();
        let mut occ_name = Vec::new();
        for occ in index.occurrences() {
            occ_leaf.push(&d.leaves[&occ.name]);
            occ_name.push(occ.name.clone());
        }
        Ok(RefinementContext {
            index,
            occ_leaf,
            occ_name,
        })
    }

    pub fn cpi_len(&self) -> usize {
        self.index.cpi().len()
    }

    /// Exits of one occurrence allowed by a live-entrance set: connected
    /// exits whose glued entrance is live. Unconnected (globally open)
    /// exits are never allowed; reaching one loses in the monolithic
    /// semantics.
    pub fn allowed_exits(&self, ce: ComponentEntrance, live: &VertexSet) -> ExitSet {
        let mut allowed = ExitSet::EMPTY;
        let (_, n) = self.index.occ(ce.occ).arity;
        for e in 0..n {
            if let Some(target) = self.index.kappa_exit(ce.occ, e).expect("valid exit") {
                if live.contains(self.index.cpi_ordinal(target)) {
                    allowed.insert(e);
                }
            }
        }
        allowed
    }

    pub fn query(
        &self,
        cache: &mut MaxEffectCache,
        ord: usize,
        allowed: ExitSet,
    ) -> Result<Effect> {
        let ce = self.index.cpi()[ord];
        cached_max_effect(
            cache,
            self.occ_leaf[ce.occ.0],
            &self.occ_name[ce.occ.0],
            ce.idx,
            allowed,
        )
    }

    /// κ of an effect's exit set, as CPI ordinals.
    fn kappa_ordinals(&self, ord: usize, exits: ExitSet) -> Result<Vec<usize>> {
        let ce = self.index.cpi()[ord];
        Ok(self
            .index
            .kappa(ce.occ, exits)?
            .into_iter()
            .map(|t| self.index.cpi_ordinal(t))
            .collect())
    }

    /// The refinement Büchi operator `F'(X, Y)` over component-entrance
    /// sets: an entrance qualifies when its maximum effect under the exits
    /// allowed by `Y` is not the sentinel and either carries the Büchi bit
    /// or steps into `X`.
    pub fn refinement_operator(
        &self,
        cache: &mut MaxEffectCache,
        x: &VertexSet,
        y: &VertexSet,
    ) -> Result<VertexSet> {
        let n = self.cpi_len();
        let mut out = VertexSet::new(n);
        for ord in 0..n {
            let ce = self.index.cpi()[ord];
            let eff = self.query(cache, ord, self.allowed_exits(ce, y))?;
            if eff.is_sentinel() {
                continue;
            }
            let targets = self.kappa_ordinals(ord, eff.exits)?;
            if eff.buchi || targets.iter().any(|&t| x.contains(t)) {
                out.insert(ord);
            }
        }
        Ok(out)
    }

    /// Kleene iteration of `F'` with every iterate recorded; the inner and
    /// outer step sequences equal those of the classical operator on the
    /// shortcut graph.
    pub fn refinement_kleene_trace(&self, cache: &mut MaxEffectCache) -> Result<RefKleeneTrace> {
        let n = self.cpi_len();
        let mut y = VertexSet::full(n);
        let mut outer = Vec::new();
        loop {
            // one query per entrance per outer iteration; X-steps reuse them
            let mut effects = Vec::with_capacity(n);
            for ord in 0..n {
                let ce = self.index.cpi()[ord];
                let eff = self.query(cache, ord, self.allowed_exits(ce, &y))?;
                let targets = if eff.is_sentinel() {
                    Vec::new()
                } else {
                    self.kappa_ordinals(ord, eff.exits)?
                };
                effects.push((eff, targets));
            }
            let mut x = VertexSet::new(n);
            let mut inner = Vec::new();
            loop {
                let mut next = VertexSet::new(n);
                for (ord, (eff, targets)) in effects.iter().enumerate() {
                    if eff.is_sentinel() {
                        continue;
                    }
                    if eff.buchi || targets.iter().any(|&t| x.contains(t)) {
                        next.insert(ord);
                    }
                }
                inner.push(next.clone());
                if next == x {
                    break;
                }
                x = next;
            }
            outer.push(RefOuterStep {
                y: y.clone(),
                inner,
            });
            if x == y {
                return Ok(RefKleeneTrace { outer, result: x });
            }
            y = x;
        }
    }
}

#[derive(Debug, Clone)]
pub struct RefOuterStep {
    pub y: VertexSet,
    pub inner: Vec<VertexSet>,
}

#[derive(Debug, Clone)]
pub struct RefKleeneTrace {
    pub outer: Vec<RefOuterStep>,
    pub result: VertexSet,
}

/// One outer iteration of the strategy refinement loop, for the
/// machine-readable event stream.
#[derive(Debug, Clone)]
pub struct IterationEvent {
    /// Live entrances (CPI ordinals) after this iteration's reachability
    /// pass.
    pub live: Vec<usize>,
    /// The configuration recomputed at the end of the iteration: the
    /// maximum effect per surviving entrance.
    pub effects: Vec<(usize, Effect)>,
    /// Entrances whose recomputed maximum effect was the sentinel.
    pub died: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct RefinementRun {
    /// Verdict per CPI ordinal: membership in the final live set.
    pub verdicts: Vec<bool>,
    pub outer_iterations: u64,
    pub max_effect_queries: u64,
    pub cache_hits: u64,
    pub cache_misses: u64,
    /// Entrances dead in the initial configuration (sentinel on the first
    /// query).
    pub init_dead: Vec<usize>,
    /// The initial configuration.
    pub init_effects: Vec<(usize, Effect)>,
    pub events: Vec<IterationEvent>,
}

/// The strategy refinement algorithm. Starts from the maximum effect per
/// entrance over all allowed exits and alternates backward reachability on
/// the configuration graph with maximum-effect updates until the
/// configuration is stable. Never materializes the shortcut graph: the
/// configuration graph has one effect vertex per live entrance.
pub fn strat_ref(ctx: &RefinementContext, cache: &mut MaxEffectCache) -> Result<RefinementRun> {
    let n = ctx.cpi_len();
    let all = VertexSet::full(n);
    let queries_before = cache.queries();
    let hits_before = cache.hits;

    // configuration: None marks a dead entrance
    let mut cfg: Vec<Option<Effect>> = Vec::with_capacity(n);
    let mut init_dead = Vec::new();
    let mut init_effects = Vec::new();
    for ord in 0..n {
        let ce = ctx.index.cpi()[ord];
        let eff = ctx.query(cache, ord, ctx.allowed_exits(ce, &all))?;
        if eff.is_sentinel() {
            init_dead.push(ord);
            cfg.push(None);
        } else {
            init_effects.push((ord, eff));
            cfg.push(Some(eff));
        }
    }

    let mut events = Vec::new();
    let mut iterations = 0u64;
    loop {
        iterations += 1;

        // configuration graph: every entrance as a player-1 vertex, one
        // effect vertex per live entrance
        let mut gc = MdpGraph::new();
        let entrance_vertex: Vec<VertexId> = (0..n)
            .map(|ord| {
                gc.add_vertex(
                    VertexKind::Player1,
                    ctx.index.entrance_key(ctx.index.cpi()[ord]),
                )
            })
            .collect();
        let mut targets_list = Vec::new();
        for (ord, eff) in cfg.iter().enumerate() {
            let Some(eff) = eff else { continue };
            let v = gc.add_vertex(VertexKind::Probabilistic, format!("cfg{ord}"));
            if eff.buchi {
                gc.mark_buchi(v)?;
                targets_list.push(v);
            }
            gc.add_edge(entrance_vertex[ord], v)?;
            if eff.exits.is_empty() {
                gc.add_edge(v, entrance_vertex[ord])?;
            } else {
                for t in ctx.kappa_ordinals(ord, eff.exits)? {
                    gc.add_edge(v, entrance_vertex[t])?;
                }
            }
        }

        let targets = VertexSet::from_iter(gc.vertex_count(), targets_list);
        let reach = can_reach(&gc, &targets)?;
        let mut live = VertexSet::new(n);
        for ord in 0..n {
            if cfg[ord].is_some() && reach.contains(entrance_vertex[ord]) {
                live.insert(ord);
            }
        }

        let mut new_cfg: Vec<Option<Effect>> = vec![None; n];
        let mut event = IterationEvent {
            live: live.iter().collect(),
            effects: Vec::new(),
            died: Vec::new(),
        };
        for ord in live.iter() {
            let ce = ctx.index.cpi()[ord];
            let eff = ctx.query(cache, ord, ctx.allowed_exits(ce, &live))?;
            if eff.is_sentinel() {
                event.died.push(ord);
            } else {
                event.effects.push((ord, eff));
                new_cfg[ord] = Some(eff);
            }
        }
        events.push(event);

        if new_cfg == cfg {
            break;
        }
        cfg = new_cfg;
    }

    Ok(RefinementRun {
        verdicts: cfg.iter().map(Option::is_some).collect(),
        outer_iterations: iterations,
        max_effect_queries: cache.queries() - queries_before,
        cache_hits: cache.hits - hits_before,
        cache_misses: cache.misses - (queries_before - hits_before),
        init_dead,
        init_effects,
        events,
    })
}

/// Convenience wrapper: verdicts of every component entrance by strategy
/// refinement.
pub fn strat_ref_verdicts(d: &Diagram, mode: CacheMode) -> Result<(Vec<bool>, RefinementRun)> {
    let ctx = RefinementContext::new(d)?;
    let mut cache = MaxEffectCache::new(mode);
    let run = strat_ref(&ctx, &mut cache)?;
    Ok((run.verdicts.clone(), run))
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
    fn can_reach_on_a_chain() {
        let mut g = MdpGraph::new();
        let a = g.add_vertex(VertexKind::Player1, "a");
        let c = g.add_vertex(VertexKind::Player1, "c");
        let b = g.add_vertex(VertexKind::Probabilistic, "b");
        g.add_edge(a, b).unwrap();
        g.add_edge(b, c).unwrap();
        let t = VertexSet::from_iter(g.vertex_count(), [c]);
        assert_eq!(
            can_reach(&g, &t).unwrap(),
            VertexSet::from_iter(g.vertex_count(), [a, b, c])
        );
        let empty = VertexSet::new(g.vertex_count());
        assert!(can_reach(&g, &empty).unwrap().is_empty());
    }

    #[test]
    fn cache_monotone_reuse() {
        let fork = fixtures::fork();
        let mut cache = MaxEffectCache::new(CacheMode::Monotone);
        let full = ExitSet::from_indices([0, 1]);
        let e1 = cached_max_effect(&mut cache, &fork, "fork", 0, full).unwrap();
        assert_eq!(e1, eff(&[1, 2], false));
        assert_eq!((cache.hits, cache.misses), (0, 1));
        // the result exits equal the query, so any subset containing them
        // means an identical query only
        let e2 = cached_max_effect(&mut cache, &fork, "fork", 0, full).unwrap();
        assert_eq!(e2, e1);
        assert_eq!((cache.hits, cache.misses), (1, 1));
        // disjoint allowed set misses
        let _ = cached_max_effect(&mut cache, &fork, "fork", 0, ExitSet::singleton(0)).unwrap();
        assert_eq!((cache.hits, cache.misses), (1, 2));
    }

    #[test]
    fn cache_reuse_between_results_and_query() {
        // relay: max effect for {1} is ⟨{1},⊥⟩; a query {1} after the full
        // query {1} hits; with a second exit the subset rule kicks in
        let two = fixtures::two_exit_relay();
        let mut cache = MaxEffectCache::new(CacheMode::Monotone);
        let full = ExitSet::from_indices([0, 1]);
        let e = cached_max_effect(&mut cache, &two, "two", 0, full).unwrap();
        assert_eq!(e, eff(&[1, 2], false));
        // query between result and full: none exists here (result == full),
        // exact repeat hits
        let _ = cached_max_effect(&mut cache, &two, "two", 0, full).unwrap();
        assert_eq!(cache.hits, 1);

        // an entrance whose maximum stays small: loop_pair entrance 2
        let f3 = fixtures::loop_pair();
        let mut cache = MaxEffectCache::new(CacheMode::Monotone);
        let full = ExitSet::from_indices([0, 1]);
        let e = cached_max_effect(&mut cache, &f3, "F3", 1, full).unwrap();
        assert_eq!(e, eff(&[1], false));
        // {1} lies between the result {1} and the query {1,2}: hit
        let e2 = cached_max_effect(&mut cache, &f3, "F3", 1, ExitSet::singleton(0)).unwrap();
        assert_eq!(e2, e);
        assert_eq!((cache.hits, cache.misses), (1, 1));

        // exact mode misses the in-between query
        let mut cache = MaxEffectCache::new(CacheMode::Exact);
        let _ = cached_max_effect(&mut cache, &f3, "F3", 1, full).unwrap();
        let _ = cached_max_effect(&mut cache, &f3, "F3", 1, ExitSet::singleton(0)).unwrap();
        assert_eq!((cache.hits, cache.misses), (0, 2));
    }

    #[test]
    fn operator_without_buchi_or_x_is_empty() {
        // no Büchi vertices anywhere and X = ∅: neither disjunct of the
        // refinement operator is satisfiable
        let mut leaves = std::collections::BTreeMap::new();
        leaves.insert("fork".to_string(), fixtures::fork());
        leaves.insert("merge".to_string(), {
            let r = fixtures::relay(false);
            crate::romdp::sum_compose(&r, &r).unwrap()
        });
        let d = crate::diagram::Diagram::new(
            crate::diagram::Term::seq(
                crate::diagram::Term::leaf("fork"),
                crate::diagram::Term::leaf("merge"),
            ),
            leaves,
        );
        let ctx = RefinementContext::new(&d).unwrap();
        let mut cache = MaxEffectCache::new(CacheMode::Monotone);
        let n = ctx.cpi_len();
        let empty = VertexSet::new(n);
        for y in [VertexSet::full(n), VertexSet::new(n)] {
            let f = ctx.refinement_operator(&mut cache, &empty, &y).unwrap();
            assert!(f.is_empty());
        }
    }

    #[test]
    fn refinement_on_open_relay_takes_one_iteration() {
        let d = fixtures::single_leaf("relay", fixtures::relay(true));
        let (verdicts, run) = strat_ref_verdicts(&d, CacheMode::Monotone).unwrap();
        assert_eq!(verdicts, vec![false]);
        assert_eq!(run.outer_iterations, 1);
        assert_eq!(run.init_dead, vec![0]);
    }

    #[test]
    fn refinement_on_losing_loop_takes_two_iterations() {
        let mut leaves = std::collections::BTreeMap::new();
        leaves.insert("relay".to_string(), fixtures::relay(false));
        let d = crate::diagram::Diagram::new(
            crate::diagram::Term::trace(crate::diagram::Term::leaf("relay")),
            leaves,
        );
        let (verdicts, run) = strat_ref_verdicts(&d, CacheMode::Monotone).unwrap();
        assert_eq!(verdicts, vec![false]);
        assert_eq!(run.outer_iterations, 2);
        assert!(run.init_dead.is_empty());
        assert!(run.events[0].live.is_empty());
    }

    #[test]
    fn refinement_replays_the_double_trace_narrative() {
        let d = fixtures::double_trace();
        let (verdicts, run) = strat_ref_verdicts(&d, CacheMode::Monotone).unwrap();
        // entrance ordinals: A:1,2,3 then B:1,2,3
        assert_eq!(verdicts, vec![true, true, true, false, true, true]);
        // B's first entrance dies immediately: its only effect reaches the
        // globally open exit
        assert_eq!(run.init_dead, vec![3]);
        // first reachability pass keeps everyone else
        assert_eq!(run.events[0].live, vec![0, 1, 2, 4, 5]);
        // second-iteration maximum effects after pruning exit 1
        let effects: BTreeMap<usize, Effect> = run.events[0].effects.iter().copied().collect();
        assert_eq!(effects[&0], eff(&[2], false));
        assert_eq!(effects[&4], eff(&[2, 3], false));
        assert_eq!(run.outer_iterations, 2);
    }

    #[test]
    fn refinement_matches_monolithic_on_fixtures() {
        for d in [
            fixtures::double_trace(),
            fixtures::closed_loop_pair(),
            fixtures::padded_loop_pair(),
            fixtures::single_leaf("fork", fixtures::fork()),
            fixtures::single_leaf("deadend", fixtures::deadend()),
            fixtures::exitblow(3),
        ] {
            let mono = monolithic_verdicts(&d).unwrap();
            let (refine, _) = strat_ref_verdicts(&d, CacheMode::Monotone).unwrap();
            assert_eq!(mono, refine);
        }
    }

    #[test]
    fn cache_modes_do_not_change_verdicts_or_effects() {
        let d = fixtures::double_trace();
        let (v_off, run_off) = strat_ref_verdicts(&d, CacheMode::Off).unwrap();
        for mode in [CacheMode::Exact, CacheMode::Monotone] {
            let (v, run) = strat_ref_verdicts(&d, mode).unwrap();
            assert_eq!(v, v_off);
            assert_eq!(run.init_effects, run_off.init_effects);
            let eff_seq: Vec<_> = run.events.iter().map(|e| e.effects.clone()).collect();
            let eff_off: Vec<_> = run_off.events.iter().map(|e| e.effects.clone()).collect();
            assert_eq!(eff_seq, eff_off);
        }
    }

    #[test]
    fn monotone_cache_hits_at_least_exact() {
        for d in [fixtures::double_trace(), fixtures::exitblow(4)] {
            let (_, run_exact) = strat_ref_verdicts(&d, CacheMode::Exact).unwrap();
            let (_, run_mono) = strat_ref_verdicts(&d, CacheMode::Monotone).unwrap();
            assert!(run_mono.cache_hits >= run_exact.cache_hits);
        }
    }

    #[test]
    fn repeated_leaf_occurrences_share_the_cache() {
        // sum of two occurrences of the same leaf: the second occurrence's
        // first query hits
        let mut leaves = std::collections::BTreeMap::new();
        leaves.insert("F3".to_string(), fixtures::loop_pair());
        let term =
            crate::diagram::Term::trace(crate::diagram::Term::trace(crate::diagram::Term::sum(
                crate::diagram::Term::leaf("F3"),
                crate::diagram::Term::leaf("F3"),
            )));
        let d = crate::diagram::Diagram::new(term, leaves);
        let ctx = RefinementContext::new(&d).unwrap();
        let mut cache = MaxEffectCache::new(CacheMode::Exact);
        let all = VertexSet::full(ctx.cpi_len());
        // ordinals 0,1 belong to the first occurrence; 2,3 to the second
        let a0 = ctx.allowed_exits(ctx.index.cpi()[0], &all);
        let a2 = ctx.allowed_exits(ctx.index.cpi()[2], &all);
        let _ = ctx.query(&mut cache, 0, a0).unwrap();
        assert_eq!(cache.hits, 0);
        if a0 == a2 {
            let _ = ctx.query(&mut cache, 2, a2).unwrap();
            assert_eq!(cache.hits, 1);
        }
    }

    #[test]
    fn iteration_and_query_budgets_hold() {
        for d in [
            fixtures::double_trace(),
            fixtures::closed_loop_pair(),
            fixtures::exitblow(5),
        ] {
            let (_, run) = strat_ref_verdicts(&d, CacheMode::Off).unwrap();
            let n = d.index().unwrap().cpi().len() as u64;
            assert!(run.outer_iterations <= n + 1);
            assert!(run.max_effect_queries <= (n + 1) * (n + 1));
        }
    }
}
