//! String diagrams: the term AST over leaf roMDPs, component entrances, the
//! connection mapping, and the monolithic (flattening) semantics.

use crate::graph::VertexId;
use crate::romdp::{seq_compose_full, sum_compose_full, trace_compose_full, RoMdp};
use crate::set::{ExitSet, VertexSet};
use crate::{graph, ModelError, Result};
use std::collections::BTreeMap;
use std::fmt;

/// A string-diagram term. Leaves reference the diagram's leaf table by name;
/// the same name may occur many times, each occurrence denoting a fresh copy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Leaf(String),
    Seq(Box<Term>, Box<Term>),
    Sum(Box<Term>, Box<Term>),
    Trace(Box<Term>),
}

impl Term {
    pub fn leaf(name: impl Into<String>) -> Term {
        Term::Leaf(name.into())
    }

    pub fn seq(a: Term, b: Term) -> Term {
        Term::Seq(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Term, b: Term) -> Term {
        Term::Sum(Box::new(a), Box::new(b))
    }

    pub fn trace(a: Term) -> Term {
        Term::Trace(Box::new(a))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Leaf(n) => write!(f, "{n}"),
            Term::Seq(a, b) => write!(f, "seq({a}, {b})"),
            Term::Sum(a, b) => write!(f, "sum({a}, {b})"),
            Term::Trace(a) => write!(f, "trace({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub term: Term,
    pub leaves: BTreeMap<String, RoMdp>,
}

impl Diagram {
    pub fn new(term: Term, leaves: BTreeMap<String, RoMdp>) -> Diagram {
        Diagram { term, leaves }
    }

    pub fn index(&self) -> Result<DiagramIndex> {
        DiagramIndex::build(self)
    }
}

/// Identifies one leaf occurrence (leftmost-innermost traversal order).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccId(pub usize);

/// One component entrance: an entrance index of a particular leaf
/// occurrence. Distinct occurrences of the same leaf yield distinct
/// component entrances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentEntrance {
    pub occ: OccId,
    /// 0-based entrance index within the leaf.
    pub idx: usize,
}

#[derive(Debug, Clone)]
pub struct OccInfo {
    pub name: String,
    /// Dotted move string from the root: `l`/`r` descend into binary
    /// operators, `c` into a trace; `$` is the root itself.
    pub path: String,
    pub arity: (usize, usize),
}

/// Precomputed structure of a diagram: occurrences, component entrances, the
/// per-exit connection mapping, and the open ends of the whole diagram.
#[derive(Debug, Clone)]
pub struct DiagramIndex {
    occs: Vec<OccInfo>,
    cpi: Vec<ComponentEntrance>,
    /// Per occurrence, per 0-based exit index: the component entrance that
    /// exit is glued to, if any. Seq and trace each glue an exit to exactly
    /// one entrance, so the set-level mapping is the union over singletons.
    glue: Vec<Vec<Option<ComponentEntrance>>>,
    global_entrances: Vec<ComponentEntrance>,
    global_exits: Vec<(OccId, usize)>,
    arity: (usize, usize),
}

struct Frame {
    open_en: Vec<ComponentEntrance>,
    open_ex: Vec<(OccId, usize)>,
}

impl DiagramIndex {
    pub fn build(d: &Diagram) -> Result<DiagramIndex> {
        let mut idx = DiagramIndex {
            occs: Vec::new(),
            cpi: Vec::new(),
            glue: Vec::new(),
            global_entrances: Vec::new(),
            global_exits: Vec::new(),
            arity: (0, 0),
        };
        let root = idx.walk(&d.term, "$".to_string(), &d.leaves)?;
        idx.arity = (root.open_en.len(), root.open_ex.len());
        idx.global_entrances = root.open_en;
        idx.global_exits = root.open_ex;
        Ok(idx)
    }

    fn walk(
        &mut self,
        term: &Term,
        path: String,
        leaves: &BTreeMap<String, RoMdp>,
    ) -> Result<Frame> {
        match term {
            Term::Leaf(name) => {
                let leaf = leaves.get(name).ok_or_else(|| ModelError::UnknownLeaf {
                    name: name.clone(),
                    path: path.clone(),
                })?;
                let occ = OccId(self.occs.len());
                let (m, n) = leaf.arity();
                self.occs.push(OccInfo {
                    name: name.clone(),
                    path,
                    arity: (m, n),
                });
                self.glue.push(vec![None; n]);
                let open_en: Vec<ComponentEntrance> =
                    (0..m).map(|idx| ComponentEntrance { occ, idx }).collect();
                self.cpi.extend(open_en.iter().copied());
                Ok(Frame {
                    open_en,
                    open_ex: (0..n).map(|idx| (occ, idx)).collect(),
                })
            }
            Term::Seq(a, b) => {
                let fa = self.walk(a, format!("{path}.l"), leaves)?;
                let fb = self.walk(b, format!("{path}.r"), leaves)?;
                if fa.open_ex.len() != fb.open_en.len() {
                    return Err(ModelError::ArityMismatch {
                        path,
                        detail: format!(
                            "seq: left yields {} exits, right expects {} entrances",
                            fa.open_ex.len(),
                            fb.open_en.len()
                        ),
                    }
                    .into());
                }
                for (k, &(occ, ex)) in fa.open_ex.iter().enumerate() {
                    self.glue[occ.0][ex] = Some(fb.open_en[k]);
                }
                Ok(Frame {
                    open_en: fa.open_en,
                    open_ex: fb.open_ex,
                })
            }
            Term::Sum(a, b) => {
                let mut fa = self.walk(a, format!("{path}.l"), leaves)?;
                let fb = self.walk(b, format!("{path}.r"), leaves)?;
                fa.open_en.extend(fb.open_en);
                fa.open_ex.extend(fb.open_ex);
                Ok(fa)
            }
            Term::Trace(a) => {
                let mut fa = self.walk(a, format!("{path}.c"), leaves)?;
                if fa.open_en.is_empty() || fa.open_ex.is_empty() {
                    return Err(ModelError::TraceOnClosed {
                        path,
                        m: fa.open_en.len(),
                        n: fa.open_ex.len(),
                    }
                    .into());
                }
                let en = fa.open_en.pop().unwrap();
                let (occ, ex) = fa.open_ex.pop().unwrap();
                self.glue[occ.0][ex] = Some(en);
                Ok(fa)
            }
        }
    }

    pub fn occurrences(&self) -> &[OccInfo] {
        &self.occs
    }

    pub fn occ(&self, occ: OccId) -> &OccInfo {
        &self.occs[occ.0]
    }

    /// All component entrances in leftmost-innermost order.
    pub fn cpi(&self) -> &[ComponentEntrance] {
        &self.cpi
    }

    pub fn cpi_ordinal(&self, ce: ComponentEntrance) -> usize {
        self.cpi
            .iter()
            .position(|&c| c == ce)
            .expect("component entrance belongs to this diagram")
    }

    /// Arity `m -> n` of the whole diagram.
    pub fn arity(&self) -> (usize, usize) {
        self.arity
    }

    pub fn global_entrances(&self) -> &[ComponentEntrance] {
        &self.global_entrances
    }

    pub fn global_exits(&self) -> &[(OccId, usize)] {
        &self.global_exits
    }

    /// The component entrance glued to one exit, or `None` when the exit is
    /// open in the whole diagram.
    pub fn kappa_exit(&self, occ: OccId, exit_idx: usize) -> Result<Option<ComponentEntrance>> {
        let row = self
            .glue
            .get(occ.0)
            .ok_or_else(|| crate::Error::internal(format!("unknown occurrence {occ:?}")))?;
        row.get(exit_idx).copied().ok_or_else(|| {
            ModelError::ExitOutOfRange {
                index: exit_idx,
                count: row.len(),
            }
            .into()
        })
    }

    /// Connection mapping: the component entrances glued to a set of exits
    /// of one occurrence. Exits left open in the whole diagram contribute
    /// nothing.
    pub fn kappa(&self, occ: OccId, exits: ExitSet) -> Result<Vec<ComponentEntrance>> {
        let mut out = Vec::new();
        for e in exits.iter() {
            if let Some(ce) = self.kappa_exit(occ, e)? {
                if !out.contains(&ce) {
                    out.push(ce);
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Exits of an occurrence that are glued to some entrance (i.e., not
    /// open in the whole diagram).
    pub fn connected_exits(&self, occ: OccId) -> ExitSet {
        ExitSet::from_indices(
            self.glue[occ.0]
                .iter()
                .enumerate()
                .filter(|(_, g)| g.is_some())
                .map(|(k, _)| k),
        )
    }

    /// Human-readable key for one component entrance: `name#occ:idx` with a
    /// 1-based entrance index.
    pub fn entrance_key(&self, ce: ComponentEntrance) -> String {
        format!("{}#{}:{}", self.occs[ce.occ.0].name, ce.occ.0, ce.idx + 1)
    }
}

/// The monolithic roMDP of a diagram together with the vertex each component
/// entrance maps to (indexed by CPI ordinal).
pub struct Monolithic {
    pub romdp: RoMdp,
    pub entrance_vertices: Vec<VertexId>,
}

/// Flattens the diagram by structural recursion: leaves get fresh vertex id
/// blocks per occurrence, the Büchi set is the union of leaf Büchi sets
/// carried through composition.
pub fn monolithic_semantics(d: &Diagram) -> Result<Monolithic> {
    let index = d.index()?;
    let mut occ_counter = 0usize;
    let (romdp, pairs) = eval(&d.term, "$".to_string(), d, &mut occ_counter)?;
    let mut entrance_vertices = vec![usize::MAX; index.cpi().len()];
    for (ce, v) in pairs {
        entrance_vertices[index.cpi_ordinal(ce)] = v;
    }
    debug_assert!(entrance_vertices.iter().all(|&v| v != usize::MAX));
    Ok(Monolithic {
        romdp,
        entrance_vertices,
    })
}

type EvalOut = (RoMdp, Vec<(ComponentEntrance, VertexId)>);

fn eval(term: &Term, path: String, d: &Diagram, occ_counter: &mut usize) -> Result<EvalOut> {
    match term {
        Term::Leaf(name) => {
            let leaf = d.leaves.get(name).ok_or_else(|| ModelError::UnknownLeaf {
                name: name.clone(),
                path: path.clone(),
            })?;
            let occ = OccId(*occ_counter);
            *occ_counter += 1;
            let mut copy = leaf.clone();
            relabel(&mut copy, name, occ);
            let pairs = copy
                .entrances()
                .iter()
                .enumerate()
                .map(|(idx, &v)| (ComponentEntrance { occ, idx }, v))
                .collect();
            Ok((copy, pairs))
        }
        Term::Seq(a, b) => {
            let (ra, pa) = eval(a, format!("{path}.l"), d, occ_counter)?;
            let (rb, pb) = eval(b, format!("{path}.r"), d, occ_counter)?;
            let composed = seq_compose_full(&ra, &rb).map_err(|e| at_path(e, &path))?;
            let mut pairs: Vec<(ComponentEntrance, VertexId)> = Vec::new();
            for (ce, v) in pa {
                // leaf entrances are never exits of their subtree, so they
                // survive the exit deletion
                pairs.push((ce, composed.remap_left[v].expect("entrance survives seq")));
            }
            for (ce, v) in pb {
                pairs.push((
                    ce,
                    composed.remap_right[v].expect("right side survives seq"),
                ));
            }
            Ok((composed.romdp, pairs))
        }
        Term::Sum(a, b) => {
            let (ra, pa) = eval(a, format!("{path}.l"), d, occ_counter)?;
            let (rb, pb) = eval(b, format!("{path}.r"), d, occ_counter)?;
            let composed = sum_compose_full(&ra, &rb).map_err(|e| at_path(e, &path))?;
            let mut pairs: Vec<(ComponentEntrance, VertexId)> = Vec::new();
            for (ce, v) in pa {
                pairs.push((ce, composed.remap_left[v].unwrap()));
            }
            for (ce, v) in pb {
                pairs.push((ce, composed.remap_right[v].unwrap()));
            }
            Ok((composed.romdp, pairs))
        }
        Term::Trace(a) => {
            let (ra, pa) = eval(a, format!("{path}.c"), d, occ_counter)?;
            let (traced, _) = trace_compose_full(&ra).map_err(|e| at_path(e, &path))?;
            Ok((traced, pa))
        }
    }
}

fn at_path(e: crate::Error, path: &str) -> crate::Error {
    match e {
        crate::Error::Model(ModelError::ArityMismatch { detail, .. }) => {
            ModelError::ArityMismatch {
                path: path.to_string(),
                detail,
            }
            .into()
        }
        crate::Error::Model(ModelError::TraceOnClosed { m, n, .. }) => ModelError::TraceOnClosed {
            path: path.to_string(),
            m,
            n,
        }
        .into(),
        other => other,
    }
}

fn relabel(r: &mut RoMdp, name: &str, occ: OccId) {
    r.prefix_labels(&format!("{name}#{}", occ.0));
}

/// Winning verdict of every component entrance in the monolithic roMDP,
/// indexed by CPI ordinal.
pub fn monolithic_verdicts(d: &Diagram) -> Result<Vec<bool>> {
    let mono = monolithic_semantics(d)?;
    let win = graph::buchi_winning_region(mono.romdp.graph());
    Ok(mono
        .entrance_vertices
        .iter()
        .map(|&v| win.contains(v))
        .collect())
}

/// Does this entrance almost-surely satisfy the Büchi objective in the
/// monolithic semantics? This is the reference oracle the other methods are
/// compared against.
pub fn monolithic_check(d: &Diagram, ce: ComponentEntrance) -> Result<bool> {
    let index = d.index()?;
    let ord = index.cpi_ordinal(ce);
    Ok(monolithic_verdicts(d)?[ord])
}

/// Vertices of the monolithic graph from which some global exit is
/// reachable under a given strategy-free over-approximation (plain edge
/// reachability); used by structural audits.
pub fn global_exit_coreach(mono: &Monolithic) -> VertexSet {
    let g = mono.romdp.graph();
    let mut set = VertexSet::new(g.vertex_count());
    let mut work: Vec<VertexId> = Vec::new();
    for &x in mono.romdp.exits() {
        if set.insert(x) {
            work.push(x);
        }
    }
    while let Some(v) = work.pop() {
        for &u in g.predecessors(v) {
            if set.insert(u) {
                work.push(u);
            }
        }
    }
    set
}
