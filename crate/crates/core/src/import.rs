//! Probability-erasing importer for explicit-transition MDP listings.
//!
//! The source format lists states with per-action successor distributions
//! and open-end annotations:
//!
//! ```text
//! mdp M {
//!   entrances [s0];
//!   exits [s3];
//!   buchi [s1];
//!   state s0 { a -> [s1: 0.5, s2: 0.5]; b -> [s3: 1.0]; }
//!   state s1 { go -> [s0: 1.0]; }
//!   state s2 { go -> [s3: 1.0]; }
//!   state s3 { }
//! }
//! ```
//!
//! Conversion drops the probability values — only their positivity matters
//! for almost-sure acceptance — and inserts one probabilistic vertex per
//! (state, action) pair (named `state_action`) to obtain the alternating
//! bipartite form. A Büchi mark on a state moves onto all of that state's
//! action vertices: the state is visited infinitely often iff one of its
//! actions is. A declared entrance state may have incoming transitions, so
//! each entrance becomes a dedicated entry pair `__en_state -> __go_state
//! -> state`; winning from the entry vertex coincides with winning from
//! the state itself. Declared exits must have no actions.

use crate::diagfile::{Lexer, Tok};
use crate::diagram::{Diagram, Term};
use crate::graph::{MdpGraph, VertexKind};
use crate::romdp::RoMdp;
use crate::{Error, ModelError, Result};
use std::collections::BTreeMap;
use std::collections::HashMap;

struct StateBlock {
    name: String,
    line: usize,
    col: usize,
    /// action name -> successor states (probabilities already validated)
    actions: Vec<(String, Vec<String>)>,
}

/// Parses the explicit listing and converts it to a single-leaf diagram.
pub fn import_mdp(text: &str) -> Result<Diagram> {
    let mut lx = Lexer::new(text)?;
    lx.expect_kw("mdp")?;
    let (mdp_name, npos) = lx.ident("an MDP name")?;
    if matches!(mdp_name.as_str(), "seq" | "sum" | "trace") {
        return Err(Error::Parse {
            line: npos.line,
            col: npos.col,
            msg: format!("`{mdp_name}` is a reserved operator name"),
        });
    }
    lx.expect(Tok::LBrace, "`{`")?;

    let mut entrances: Vec<String> = Vec::new();
    let mut exits: Vec<String> = Vec::new();
    let mut buchi: Vec<String> = Vec::new();
    let mut states: Vec<StateBlock> = Vec::new();

    loop {
        let (tok, pos) = lx.next();
        let kw = match tok {
            Tok::RBrace => break,
            Tok::Ident(s) => s,
            _ => {
                return Err(Error::Parse {
                    line: pos.line,
                    col: pos.col,
                    msg: "expected `entrances`, `exits`, `buchi`, `state` or `}`".into(),
                })
            }
        };
        match kw.as_str() {
            "entrances" | "exits" | "buchi" => {
                let names = parse_names(&mut lx)?;
                lx.expect(Tok::Semi, "`;`")?;
                match kw.as_str() {
                    "entrances" => entrances = names,
                    "exits" => exits = names,
                    _ => buchi = names,
                }
            }
            "state" => {
                let (name, npos) = lx.ident("a state name")?;
                lx.expect(Tok::LBrace, "`{`")?;
                let mut actions = Vec::new();
                loop {
                    let (tok, apos) = lx.next();
                    let action = match tok {
                        Tok::RBrace => break,
                        Tok::Ident(s) => s,
                        _ => {
                            return Err(Error::Parse {
                                line: apos.line,
                                col: apos.col,
                                msg: "expected an action name or `}`".into(),
                            })
                        }
                    };
                    if actions.iter().any(|(a, _)| *a == action) {
                        return Err(Error::Parse {
                            line: apos.line,
                            col: apos.col,
                            msg: format!("duplicate action `{action}` in state `{name}`"),
                        });
                    }
                    lx.expect(Tok::Arrow, "`->`")?;
                    lx.expect(Tok::LBrack, "`[`")?;
                    let mut succs = Vec::new();
                    let mut total = 0.0f64;
                    loop {
                        let (succ, _) = lx.ident("a successor state")?;
                        lx.expect(Tok::Colon, "`:`")?;
                        let (p, ppos) = lx.number("a probability")?;
                        if !(p > 0.0 && p <= 1.0) {
                            return Err(Error::Parse {
                                line: ppos.line,
                                col: ppos.col,
                                msg: format!("probability {p} outside (0, 1]"),
                            });
                        }
                        total += p;
                        succs.push(succ);
                        match lx.next() {
                            (Tok::Comma, _) => continue,
                            (Tok::RBrack, _) => break,
                            (_, p) => {
                                return Err(Error::Parse {
                                    line: p.line,
                                    col: p.col,
                                    msg: "expected `,` or `]`".into(),
                                })
                            }
                        }
                    }
                    if (total - 1.0).abs() > 1e-6 {
                        return Err(Error::Parse {
                            line: apos.line,
                            col: apos.col,
                            msg: format!(
                                "probabilities of action `{action}` sum to {total}, expected 1"
                            ),
                        });
                    }
                    lx.expect(Tok::Semi, "`;`")?;
                    actions.push((action, succs));
                }
                states.push(StateBlock {
                    name,
                    line: npos.line,
                    col: npos.col,
                    actions,
                });
            }
            other => {
                return Err(Error::Parse {
                    line: pos.line,
                    col: pos.col,
                    msg: format!("unknown section `{other}`"),
                })
            }
        }
    }

    // player-1 layer: states in declaration order, then one entry vertex
    // per declared entrance; probabilistic layer after that
    fn declare(
        g: &mut MdpGraph,
        ids: &mut HashMap<String, usize>,
        name: String,
        kind: VertexKind,
    ) -> Result<usize> {
        if ids.contains_key(&name) {
            return Err(ModelError::DuplicateVertex { name }.into());
        }
        let id = g.add_vertex(kind, &name);
        ids.insert(name, id);
        Ok(id)
    }
    fn lookup(ids: &HashMap<String, usize>, name: &str) -> Result<usize> {
        ids.get(name).copied().ok_or_else(|| {
            ModelError::UnknownVertex {
                name: name.to_string(),
            }
            .into()
        })
    }

    let mut g = MdpGraph::new();
    let mut ids: HashMap<String, usize> = HashMap::new();
    for s in &states {
        declare(&mut g, &mut ids, s.name.clone(), VertexKind::Player1).map_err(|e| match e {
            Error::Model(source) => Error::ModelAt {
                line: s.line,
                col: s.col,
                source,
            },
            e => e,
        })?;
    }
    let mut en = Vec::new();
    for name in &entrances {
        en.push(declare(
            &mut g,
            &mut ids,
            format!("__en_{name}"),
            VertexKind::Player1,
        )?);
    }
    for s in &states {
        let sid = ids[&s.name];
        let is_buchi = buchi.contains(&s.name);
        if is_buchi && s.actions.is_empty() {
            return Err(Error::Parse {
                line: s.line,
                col: s.col,
                msg: format!("Büchi state `{}` has no actions to carry the mark", s.name),
            });
        }
        for (action, succs) in &s.actions {
            let av = declare(
                &mut g,
                &mut ids,
                format!("{}_{}", s.name, action),
                VertexKind::Probabilistic,
            )?;
            g.add_edge(sid, av)?;
            for succ in succs {
                let t = lookup(&ids, succ)?;
                g.add_edge(av, t)?;
            }
            if is_buchi {
                g.mark_buchi(av)?;
            }
        }
    }
    for (k, name) in entrances.iter().enumerate() {
        let target = lookup(&ids, name)?;
        let hook = declare(
            &mut g,
            &mut ids,
            format!("__go_{name}"),
            VertexKind::Probabilistic,
        )?;
        g.add_edge(en[k], hook)?;
        g.add_edge(hook, target)?;
    }
    let ex: Vec<usize> = exits
        .iter()
        .map(|n| lookup(&ids, n))
        .collect::<Result<_>>()?;
    let leaf = RoMdp::new(g, en, ex)?;

    let mut leaves = BTreeMap::new();
    leaves.insert(mdp_name.clone(), leaf);
    let d = Diagram::new(Term::leaf(&mdp_name), leaves);
    d.index()?;
    Ok(d)
}

impl Lexer {
    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        let (name, pos) = self.ident(&format!("`{kw}`"))?;
        if name == kw {
            Ok(())
        } else {
            Err(Error::Parse {
                line: pos.line,
                col: pos.col,
                msg: format!("expected `{kw}`, found `{name}`"),
            })
        }
    }
}

fn parse_names(lx: &mut Lexer) -> Result<Vec<String>> {
    lx.expect(Tok::LBrack, "`[`")?;
    let mut names = Vec::new();
    if lx.peek().0 == Tok::RBrack {
        lx.next();
        return Ok(names);
    }
    loop {
        let (name, _) = lx.ident("a state name")?;
        names.push(name);
        match lx.next() {
            (Tok::Comma, _) => continue,
            (Tok::RBrack, _) => break,
            (_, p) => {
                return Err(Error::Parse {
                    line: p.line,
                    col: p.col,
                    msg: "expected `,` or `]`".into(),
                })
            }
        }
    }
    Ok(names)
}
