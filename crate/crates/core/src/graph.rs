//! MDP graphs, strategies, reachability and the almost-sure Büchi winning
//! region.
//!
//! An MDP graph abstracts a Markov decision process by erasing probability
//! values: player-1 vertices choose a set of probabilistic successors, and a
//! probabilistic vertex reaches all of its successors. Almost-sure acceptance
//! only depends on this structure. Vertices strictly alternate between the
//! two partitions.

use crate::set::VertexSet;
use crate::{Error, ModelError, Result};
use std::fmt;

pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Player1,
    Probabilistic,
}

/// Bipartite alternating graph with a Büchi subset of the probabilistic
/// vertices. Vertex ids are dense and assigned in insertion order.
#[derive(Clone, PartialEq, Eq)]
pub struct MdpGraph {
    kinds: Vec<VertexKind>,
    labels: Vec<String>,
    succ: Vec<Vec<VertexId>>,
    pred: Vec<Vec<VertexId>>,
    buchi: VertexSet,
}

impl MdpGraph {
    pub fn new() -> Self {
        MdpGraph {
            kinds: Vec::new(),
            labels: Vec::new(),
            succ: Vec::new(),
            pred: Vec::new(),
            buchi: VertexSet::new(0),
        }
    }

    pub fn add_vertex(&mut self, kind: VertexKind, label: impl Into<String>) -> VertexId {
        let id = self.kinds.len();
        self.kinds.push(kind);
        self.labels.push(label.into());
        self.succ.push(Vec::new());
        self.pred.push(Vec::new());
        let mut buchi = VertexSet::new(id + 1);
        for v in self.buchi.iter() {
            buchi.insert(v);
        }
        self.buchi = buchi;
        id
    }

    /// Adds `from -> to`. Endpoints must exist and lie in opposite partitions.
    pub fn add_edge(&mut self, from: VertexId, to: VertexId) -> Result<()> {
        self.check_vertex(from)?;
        self.check_vertex(to)?;
        if self.kinds[from] == self.kinds[to] {
            return Err(ModelError::AlternationViolation {
                from: self.labels[from].clone(),
                to: self.labels[to].clone(),
            }
            .into());
        }
        if !self.succ[from].contains(&to) {
            self.succ[from].push(to);
            self.pred[to].push(from);
        }
        Ok(())
    }

    /// Marks a probabilistic vertex as Büchi.
    pub fn mark_buchi(&mut self, v: VertexId) -> Result<()> {
        self.check_vertex(v)?;
        if self.kinds[v] != VertexKind::Probabilistic {
            return Err(ModelError::BuchiNotProbabilistic {
                vertex: self.labels[v].clone(),
            }
            .into());
        }
        self.buchi.insert(v);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[v]
    }

    pub fn is_player1(&self, v: VertexId) -> bool {
        self.kinds[v] == VertexKind::Player1
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v]
    }

    pub fn set_label(&mut self, v: VertexId, label: impl Into<String>) {
        self.labels[v] = label.into();
    }

    pub fn buchi(&self) -> &VertexSet {
        &self.buchi
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v]
    }

    pub fn predecessors(&self, v: VertexId) -> &[VertexId] {
        &self.pred[v]
    }

    /// Player-1 vertices in insertion order.
    pub fn player1_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.kinds.len()).filter(|&v| self.kinds[v] == VertexKind::Player1)
    }

    pub fn probabilistic_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.kinds.len()).filter(|&v| self.kinds[v] == VertexKind::Probabilistic)
    }

    pub fn player1_set(&self) -> VertexSet {
        VertexSet::from_iter(self.vertex_count(), self.player1_vertices())
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.succ
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v >= self.kinds.len() {
            return Err(ModelError::UnknownVertexId { id: v }.into());
        }
        Ok(())
    }

    fn check_set(&self, s: &VertexSet) -> Result<()> {
        if s.capacity() != self.vertex_count() {
            return Err(Error::internal(format!(
                "vertex set capacity {} does not match graph size {}",
                s.capacity(),
                self.vertex_count()
            )));
        }
        Ok(())
    }
}

impl Default for MdpGraph {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for MdpGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MdpGraph {{")?;
        for v in 0..self.vertex_count() {
            let kind = match self.kinds[v] {
                VertexKind::Player1 => "p1",
                VertexKind::Probabilistic => "pr",
            };
            let b = if self.buchi.contains(v) { " buchi" } else { "" };
            writeln!(
                f,
                "  {v} [{kind}{b}] {:?} -> {:?}",
                self.labels[v], self.succ[v]
            )?;
        }
        write!(f, "}}")
    }
}

/// A memoryless randomized strategy: for each player-1 vertex, the subset of
/// successors it randomizes over. Probabilistic vertices have no choice.
/// Empty choice sets are legal and model a deliberate dead end.
#[derive(Clone, PartialEq, Eq)]
pub struct Strategy {
    choice: Vec<VertexSet>,
    capacity: usize,
}

impl Strategy {
    /// The empty strategy (every choice set empty).
    pub fn empty(g: &MdpGraph) -> Self {
        let n = g.vertex_count();
        Strategy {
            choice: vec![VertexSet::new(n); n],
            capacity: n,
        }
    }

    /// Sets the choice at a player-1 vertex; every chosen vertex must be a
    /// successor.
    pub fn set_choice(&mut self, g: &MdpGraph, v: VertexId, chosen: VertexSet) -> Result<()> {
        if !g.is_player1(v) {
            return Err(Error::internal(format!(
                "strategy choice at non-player-1 vertex {}",
                g.label(v)
            )));
        }
        for c in chosen.iter() {
            if !g.successors(v).contains(&c) {
                return Err(ModelError::ChoiceNotSuccessor {
                    vertex: g.label(v).to_string(),
                    chosen: g.label(c).to_string(),
                }
                .into());
            }
        }
        self.choice[v] = chosen;
        Ok(())
    }

    pub fn choice(&self, v: VertexId) -> &VertexSet {
        &self.choice[v]
    }

    /// Pointwise union of two strategies.
    pub fn union(&self, other: &Strategy) -> Strategy {
        debug_assert_eq!(self.capacity, other.capacity);
        let mut out = self.clone();
        for (a, b) in out.choice.iter_mut().zip(&other.choice) {
            a.union_with(b);
        }
        out
    }

    /// Restricts to the vertices reachable from `start`, clearing every other
    /// choice. Reach from `start` is unchanged by this.
    pub fn localized(&self, g: &MdpGraph, start: VertexId) -> Strategy {
        let r = reach_from(g, self, start);
        let mut out = self.clone();
        for v in 0..self.capacity {
            if !r.contains(v) {
                out.choice[v] = VertexSet::new(self.capacity);
            }
        }
        out
    }
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries: Vec<String> = self
            .choice
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_empty())
            .map(|(v, c)| format!("{v}->{:?}", c.iter().collect::<Vec<_>>()))
            .collect();
        write!(f, "Strategy[{}]", entries.join(", "))
    }
}

/// Union of successors over a vertex set.
pub fn post(g: &MdpGraph, xs: &VertexSet) -> Result<VertexSet> {
    g.check_set(xs)?;
    let mut out = VertexSet::new(g.vertex_count());
    for x in xs.iter() {
        for &y in g.successors(x) {
            out.insert(y);
        }
    }
    Ok(out)
}

/// Union of predecessors over a vertex set.
pub fn pre(g: &MdpGraph, ys: &VertexSet) -> Result<VertexSet> {
    g.check_set(ys)?;
    let mut out = VertexSet::new(g.vertex_count());
    for y in ys.iter() {
        for &x in g.predecessors(y) {
            out.insert(x);
        }
    }
    Ok(out)
}

/// Vertices reachable from `xs` under strategy `s`: the least fixpoint of
/// `X ∪ Post_σ(X)` where player-1 vertices step through their choice sets and
/// probabilistic vertices through all successors.
pub fn reach(g: &MdpGraph, s: &Strategy, xs: &VertexSet) -> Result<VertexSet> {
    g.check_set(xs)?;
    let mut out = xs.clone();
    let mut work: Vec<VertexId> = xs.iter().collect();
    while let Some(v) = work.pop() {
        if g.is_player1(v) {
            for c in s.choice(v).iter() {
                if out.insert(c) {
                    work.push(c);
                }
            }
        } else {
            for &c in g.successors(v) {
                if out.insert(c) {
                    work.push(c);
                }
            }
        }
    }
    Ok(out)
}

pub fn reach_from(g: &MdpGraph, s: &Strategy, v: VertexId) -> VertexSet {
    reach(g, s, &VertexSet::from_iter(g.vertex_count(), [v])).expect("singleton within capacity")
}

/// The Büchi operator
/// `F(X, Y) = { v ∈ V₁ | ∃v' ∈ Post(v): Post(v') ⊆ Y ∧ (v' ∈ B ∨ v' ∈ Pre(X)) }`
/// over player-1 vertex sets, with `B` the graph's Büchi set.
pub fn buchi_operator(g: &MdpGraph, x: &VertexSet, y: &VertexSet) -> Result<VertexSet> {
    g.check_set(x)?;
    g.check_set(y)?;
    let mut out = VertexSet::new(g.vertex_count());
    for v in g.player1_vertices() {
        'succ: for &vp in g.successors(v) {
            if !g.successors(vp).iter().all(|&w| y.contains(w)) {
                continue 'succ;
            }
            let hits_x = g.successors(vp).iter().any(|&w| x.contains(w));
            if g.buchi().contains(vp) || hits_x {
                out.insert(v);
                break 'succ;
            }
        }
    }
    Ok(out)
}

/// One Kleene outer step of the winning-region fixpoint, with all inner
/// least-fixpoint iterates recorded.
#[derive(Debug, Clone)]
pub struct OuterStep {
    /// Value of `Y` the inner fixpoint was evaluated under.
    pub y: VertexSet,
    /// Inner iterates `X₁, X₂, …` up to and including the fixpoint.
    pub inner: Vec<VertexSet>,
}

/// Full trace of the `νY.μX` Kleene iteration.
#[derive(Debug, Clone)]
pub struct KleeneTrace {
    pub outer: Vec<OuterStep>,
    pub result: VertexSet,
}

/// Generalized Büchi-style operator for a target set that may contain
/// vertices of either partition.
///
/// A player-1 vertex in the target always qualifies: the empty choice stops
/// there and the target is met. Otherwise `v` qualifies if it has a
/// probabilistic successor `v'` with all successors inside `Y` such that `v'`
/// is a target or steps into `X`. With a purely probabilistic target this is
/// exactly the classical Büchi operator; a player-1 target behaves like an
/// exit carrying a Büchi self-loop gadget.
fn target_operator(g: &MdpGraph, target: &VertexSet, x: &VertexSet, y: &VertexSet) -> VertexSet {
    let mut out = VertexSet::new(g.vertex_count());
    for v in g.player1_vertices() {
        if target.contains(v) {
            out.insert(v);
            continue;
        }
        for &vp in g.successors(v) {
            if !g.successors(vp).iter().all(|&w| y.contains(w)) {
                continue;
            }
            if target.contains(vp) || g.successors(vp).iter().any(|&w| x.contains(w)) {
                out.insert(v);
                break;
            }
        }
    }
    out
}

/// Winning region for the objective "from every reachable vertex, the target
/// remains reachable", over an arbitrary target set (Büchi vertices, exit
/// vertices, or a mix), with the full Kleene trace.
pub fn winning_for_target_trace(g: &MdpGraph, target: &VertexSet) -> Result<KleeneTrace> {
    g.check_set(target)?;
    let mut y = g.player1_set();
    let mut outer = Vec::new();
    loop {
        let mut x = VertexSet::new(g.vertex_count());
        let mut inner = Vec::new();
        loop {
            let next = target_operator(g, target, &x, &y);
            inner.push(next.clone());
            if next == x {
                break;
            }
            x = next;
        }
        outer.push(OuterStep {
            y: y.clone(),
            inner,
        });
        if x == y {
            return Ok(KleeneTrace { outer, result: x });
        }
        y = x;
    }
}

/// Winning region for an arbitrary target set; see
/// [`winning_for_target_trace`].
pub fn winning_for_target(g: &MdpGraph, target: &VertexSet) -> Result<VertexSet> {
    Ok(winning_for_target_trace(g, target)?.result)
}

/// Winning region of the almost-sure Büchi objective for the graph's Büchi
/// set: `νY.μX.F(X,Y)` computed by Kleene iteration.
pub fn buchi_winning_region(g: &MdpGraph) -> VertexSet {
    winning_for_target(g, g.buchi()).expect("buchi set is within capacity")
}

/// Kleene trace of the classical fixpoint on the graph's own Büchi set.
pub fn buchi_winning_region_trace(g: &MdpGraph) -> KleeneTrace {
    winning_for_target_trace(g, g.buchi()).expect("buchi set is within capacity")
}

/// The strategy that randomizes over every successor whose successors stay
/// inside `region`; choices outside `region` stay empty. A successor with
/// no successors of its own is a probabilistic trap and is only taken when
/// it is itself a target.
pub fn randomize_inside(g: &MdpGraph, region: &VertexSet, target: &VertexSet) -> Strategy {
    let mut s = Strategy::empty(g);
    for v in g.player1_vertices() {
        if !region.contains(v) {
            continue;
        }
        let mut chosen = VertexSet::new(g.vertex_count());
        for &vp in g.successors(v) {
            let succs = g.successors(vp);
            if succs.iter().all(|&w| region.contains(w))
                && (!succs.is_empty() || target.contains(vp))
            {
                chosen.insert(vp);
            }
        }
        s.choice[v] = chosen;
    }
    s
}

/// Checks that `s` witnesses the target objective from every vertex of
/// `region`: each vertex reachable from `region` can reach `target` under
/// `s`. Used as a membership-soundness audit of computed winning regions.
pub fn audit_region(g: &MdpGraph, s: &Strategy, region: &VertexSet, target: &VertexSet) -> bool {
    for v in region.iter() {
        let r = reach_from(g, s, v);
        for w in r.iter() {
            let rw = reach_from(g, s, w);
            if !rw.intersects(target) {
                return false;
            }
        }
    }
    true
}
