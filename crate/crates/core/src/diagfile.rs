//! The diagram file format: a human-readable text form (`.sd`) and an
//! equivalent JSON rendering, selected by file extension.
//!
//! ```text
//! # a comment
//! leaf relay {
//!   players1 [i1, o1];
//!   prob [p];
//!   edges [i1 -> p, p -> o1];
//!   entrances [i1];
//!   exits [o1];
//!   buchi [p];
//! }
//! diagram = trace(seq(relay, relay));
//! ```
//!
//! Every structural invariant is checked while building, with the error
//! anchored to the offending line and column in the text form.

use crate::diagram::{Diagram, Term};
use crate::graph::{MdpGraph, VertexKind};
use crate::romdp::RoMdp;
use crate::{Error, ModelError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    fn err(self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn model(self, e: ModelError) -> Error {
        Error::ModelAt {
            line: self.line,
            col: self.col,
            source: e,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Number(String),
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    LParen,
    RParen,
    Comma,
    Semi,
    Colon,
    Arrow,
    Eq,
    Eof,
}

pub(crate) struct Lexer {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Lexer {
    pub(crate) fn new(text: &str) -> Result<Lexer> {
        let mut toks = Vec::new();
        let mut line = 1usize;
        let mut col = 1usize;
        let mut chars = text.chars().peekable();
        while let Some(&c) = chars.peek() {
            let pos = Pos { line, col };
            match c {
                '\n' => {
                    chars.next();
                    line += 1;
                    col = 1;
                }
                c if c.is_whitespace() => {
                    chars.next();
                    col += 1;
                }
                '#' => {
                    for c in chars.by_ref() {
                        if c == '\n' {
                            break;
                        }
                    }
                    line += 1;
                    col = 1;
                }
                '{' | '}' | '[' | ']' | '(' | ')' | ',' | ';' | ':' | '=' => {
                    chars.next();
                    col += 1;
                    let t = match c {
                        '{' => Tok::LBrace,
                        '}' => Tok::RBrace,
                        '[' => Tok::LBrack,
                        ']' => Tok::RBrack,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        ',' => Tok::Comma,
                        ';' => Tok::Semi,
                        ':' => Tok::Colon,
                        _ => Tok::Eq,
                    };
                    toks.push((t, pos));
                }
                '-' => {
                    chars.next();
                    col += 1;
                    if chars.peek() == Some(&'>') {
                        chars.next();
                        col += 1;
                        toks.push((Tok::Arrow, pos));
                    } else {
                        return Err(pos.err("expected `->`"));
                    }
                }
                c if c.is_ascii_digit() => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() || c == '.' {
                            s.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    toks.push((Tok::Number(s), pos));
                }
                c if c.is_alphanumeric() || c == '_' => {
                    let mut s = String::new();
                    while let Some(&c) = chars.peek() {
                        if c.is_alphanumeric() || c == '_' {
                            s.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    toks.push((Tok::Ident(s), pos));
                }
                other => return Err(pos.err(format!("unexpected character `{other}`"))),
            }
        }
        toks.push((Tok::Eof, Pos { line, col }));
        Ok(Lexer { toks, at: 0 })
    }

    pub(crate) fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    pub(crate) fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    pub(crate) fn expect(&mut self, want: Tok, what: &str) -> Result<Pos> {
        let (t, pos) = self.next();
        if t == want {
            Ok(pos)
        } else {
            Err(pos.err(format!("expected {what}")))
        }
    }

    pub(crate) fn ident(&mut self, what: &str) -> Result<(String, Pos)> {
        let (t, pos) = self.next();
        match t {
            Tok::Ident(s) => Ok((s, pos)),
            _ => Err(pos.err(format!("expected {what}"))),
        }
    }

    pub(crate) fn number(&mut self, what: &str) -> Result<(f64, Pos)> {
        let (t, pos) = self.next();
        match t {
            Tok::Number(s) => s
                .parse::<f64>()
                .map(|v| (v, pos))
                .map_err(|_| pos.err(format!("invalid number `{s}`"))),
            _ => Err(pos.err(format!("expected {what}"))),
        }
    }
}

/// JSON rendering of the file schema; accepted interchangeably with the
/// text form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FileSchema {
    pub leaves: BTreeMap<String, LeafSchema>,
    pub diagram: TermSchema,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LeafSchema {
    pub players1: Vec<String>,
    pub prob: Vec<String>,
    pub edges: Vec<[String; 2]>,
    pub entrances: Vec<String>,
    pub exits: Vec<String>,
    #[serde(default)]
    pub buchi: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum TermSchema {
    Leaf {
        name: String,
    },
    Seq {
        left: Box<TermSchema>,
        right: Box<TermSchema>,
    },
    Sum {
        left: Box<TermSchema>,
        right: Box<TermSchema>,
    },
    Trace {
        child: Box<TermSchema>,
    },
}

impl TermSchema {
    fn to_term(&self) -> Term {
        match self {
            TermSchema::Leaf { name } => Term::Leaf(name.clone()),
            TermSchema::Seq { left, right } => Term::seq(left.to_term(), right.to_term()),
            TermSchema::Sum { left, right } => Term::sum(left.to_term(), right.to_term()),
            TermSchema::Trace { child } => Term::trace(child.to_term()),
        }
    }

    fn of_term(t: &Term) -> TermSchema {
        match t {
            Term::Leaf(name) => TermSchema::Leaf { name: name.clone() },
            Term::Seq(a, b) => TermSchema::Seq {
                left: Box::new(Self::of_term(a)),
                right: Box::new(Self::of_term(b)),
            },
            Term::Sum(a, b) => TermSchema::Sum {
                left: Box::new(Self::of_term(a)),
                right: Box::new(Self::of_term(b)),
            },
            Term::Trace(a) => TermSchema::Trace {
                child: Box::new(Self::of_term(a)),
            },
        }
    }
}

/// Item positions of one leaf block in the text form, parallel to the
/// schema's vectors; absent for JSON input.
#[derive(Debug, Default, Clone)]
struct LeafPositions {
    header: Option<Pos>,
    players1: Vec<Pos>,
    prob: Vec<Pos>,
    edges: Vec<Pos>,
    entrances: Vec<Pos>,
    exits: Vec<Pos>,
    buchi: Vec<Pos>,
}

fn locate(e: Error, pos: Option<Pos>) -> Error {
    match (e, pos) {
        (Error::Model(m), Some(p)) => p.model(m),
        (e, _) => e,
    }
}

/// Builds and validates one leaf roMDP from its schema; ids are assigned
/// players-first in declaration order.
fn build_leaf(schema: &LeafSchema, pos: Option<&LeafPositions>) -> Result<RoMdp> {
    let fallback = pos.and_then(|p| p.header);
    let item = |v: Option<&Vec<Pos>>, k: usize| v.and_then(|v| v.get(k).copied()).or(fallback);
    let p1pos = pos.map(|p| &p.players1);
    let prpos = pos.map(|p| &p.prob);

    let mut g = MdpGraph::new();
    let mut ids: HashMap<&str, usize> = HashMap::new();
    for (k, name) in schema.players1.iter().enumerate() {
        if ids.contains_key(name.as_str()) {
            return Err(locate(
                ModelError::DuplicateVertex { name: name.clone() }.into(),
                item(p1pos, k),
            ));
        }
        ids.insert(name, g.add_vertex(VertexKind::Player1, name));
    }
    for (k, name) in schema.prob.iter().enumerate() {
        if schema.players1.contains(name) {
            return Err(locate(
                ModelError::PartitionOverlap { name: name.clone() }.into(),
                item(prpos, k),
            ));
        }
        if ids.contains_key(name.as_str()) {
            return Err(locate(
                ModelError::DuplicateVertex { name: name.clone() }.into(),
                item(prpos, k),
            ));
        }
        ids.insert(name, g.add_vertex(VertexKind::Probabilistic, name));
    }

    let lookup = |name: &str, at: Option<Pos>| -> Result<usize> {
        ids.get(name).copied().ok_or_else(|| {
            locate(
                ModelError::UnknownVertex {
                    name: name.to_string(),
                }
                .into(),
                at,
            )
        })
    };

    for (k, [from, to]) in schema.edges.iter().enumerate() {
        let at = item(pos.map(|p| &p.edges), k);
        let f = lookup(from, at)?;
        let t = lookup(to, at)?;
        g.add_edge(f, t).map_err(|e| locate(e, at))?;
    }
    for (k, name) in schema.buchi.iter().enumerate() {
        let at = item(pos.map(|p| &p.buchi), k);
        let v = lookup(name, at)?;
        g.mark_buchi(v).map_err(|e| locate(e, at))?;
    }
    let mut entrances = Vec::new();
    for (k, name) in schema.entrances.iter().enumerate() {
        entrances.push(lookup(name, item(pos.map(|p| &p.entrances), k))?);
    }
    let mut exits = Vec::new();
    for (k, name) in schema.exits.iter().enumerate() {
        exits.push(lookup(name, item(pos.map(|p| &p.exits), k))?);
    }
    RoMdp::new(g, entrances, exits).map_err(|e| locate(e, fallback))
}

fn schema_to_diagram(
    schema: &FileSchema,
    positions: Option<&BTreeMap<String, LeafPositions>>,
) -> Result<Diagram> {
    let mut leaves = BTreeMap::new();
    for (name, leaf) in &schema.leaves {
        let pos = positions.and_then(|m| m.get(name));
        leaves.insert(name.clone(), build_leaf(leaf, pos)?);
    }
    let d = Diagram::new(schema.diagram.to_term(), leaves);
    d.index()?;
    Ok(d)
}

fn parse_name_list(lx: &mut Lexer) -> Result<(Vec<String>, Vec<Pos>)> {
    lx.expect(Tok::LBrack, "`[`")?;
    let mut names = Vec::new();
    let mut poss = Vec::new();
    if lx.peek().0 == Tok::RBrack {
        lx.next();
        return Ok((names, poss));
    }
    loop {
        let (name, pos) = lx.ident("a vertex name")?;
        names.push(name);
        poss.push(pos);
        match lx.next() {
            (Tok::Comma, _) => continue,
            (Tok::RBrack, _) => break,
            (_, p) => return Err(p.err("expected `,` or `]`")),
        }
    }
    Ok((names, poss))
}

fn parse_edge_list(lx: &mut Lexer) -> Result<(Vec<[String; 2]>, Vec<Pos>)> {
    lx.expect(Tok::LBrack, "`[`")?;
    let mut edges = Vec::new();
    let mut poss = Vec::new();
    if lx.peek().0 == Tok::RBrack {
        lx.next();
        return Ok((edges, poss));
    }
    loop {
        let (from, pos) = lx.ident("a vertex name")?;
        lx.expect(Tok::Arrow, "`->`")?;
        let (to, _) = lx.ident("a vertex name")?;
        edges.push([from, to]);
        poss.push(pos);
        match lx.next() {
            (Tok::Comma, _) => continue,
            (Tok::RBrack, _) => break,
            (_, p) => return Err(p.err("expected `,` or `]`")),
        }
    }
    Ok((edges, poss))
}

fn parse_term(lx: &mut Lexer) -> Result<Term> {
    let (name, pos) = lx.ident("a term")?;
    let is_call = lx.peek().0 == Tok::LParen;
    match (name.as_str(), is_call) {
        ("seq", true) | ("sum", true) => {
            lx.next();
            let a = parse_term(lx)?;
            lx.expect(Tok::Comma, "`,`")?;
            let b = parse_term(lx)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(if name == "seq" {
                Term::seq(a, b)
            } else {
                Term::sum(a, b)
            })
        }
        ("trace", true) => {
            lx.next();
            let a = parse_term(lx)?;
            lx.expect(Tok::RParen, "`)`")?;
            Ok(Term::trace(a))
        }
        ("seq" | "sum" | "trace", false) => {
            Err(pos.err(format!("`{name}` is a reserved operator name")))
        }
        (_, true) => Err(pos.err(format!("unknown operator `{name}`"))),
        (_, false) => Ok(Term::Leaf(name)),
    }
}

/// Parses the text form.
pub fn parse_sd(text: &str) -> Result<Diagram> {
    let mut lx = Lexer::new(text)?;
    let mut leaves: BTreeMap<String, LeafSchema> = BTreeMap::new();
    let mut positions: BTreeMap<String, LeafPositions> = BTreeMap::new();
    let mut term: Option<Term> = None;
    loop {
        let (tok, pos) = lx.next();
        match tok {
            Tok::Eof => break,
            Tok::Ident(kw) if kw == "leaf" => {
                let (name, npos) = lx.ident("a leaf name")?;
                if matches!(name.as_str(), "seq" | "sum" | "trace") {
                    return Err(npos.err(format!("`{name}` is a reserved operator name")));
                }
                if leaves.contains_key(&name) {
                    return Err(npos.err(format!("leaf `{name}` declared twice")));
                }
                lx.expect(Tok::LBrace, "`{`")?;
                let mut schema = LeafSchema {
                    players1: vec![],
                    prob: vec![],
                    edges: vec![],
                    entrances: vec![],
                    exits: vec![],
                    buchi: vec![],
                };
                let mut lpos = LeafPositions {
                    header: Some(npos),
                    ..Default::default()
                };
                let mut seen: Vec<String> = Vec::new();
                loop {
                    let (tok, spos) = lx.next();
                    let section = match tok {
                        Tok::RBrace => break,
                        Tok::Ident(s) => s,
                        _ => return Err(spos.err("expected a section name or `}`")),
                    };
                    if seen.contains(&section) {
                        return Err(spos.err(format!("duplicate section `{section}`")));
                    }
                    seen.push(section.clone());
                    match section.as_str() {
                        "players1" => (schema.players1, lpos.players1) = parse_name_list(&mut lx)?,
                        "prob" => (schema.prob, lpos.prob) = parse_name_list(&mut lx)?,
                        "edges" => (schema.edges, lpos.edges) = parse_edge_list(&mut lx)?,
                        "entrances" => {
                            (schema.entrances, lpos.entrances) = parse_name_list(&mut lx)?
                        }
                        "exits" => (schema.exits, lpos.exits) = parse_name_list(&mut lx)?,
                        "buchi" => (schema.buchi, lpos.buchi) = parse_name_list(&mut lx)?,
                        other => {
                            return Err(spos.err(format!("unknown section `{other}`")));
                        }
                    }
                    lx.expect(Tok::Semi, "`;`")?;
                }
                positions.insert(name.clone(), lpos);
                leaves.insert(name, schema);
            }
            Tok::Ident(kw) if kw == "diagram" => {
                if term.is_some() {
                    return Err(pos.err("`diagram` declared twice"));
                }
                lx.expect(Tok::Eq, "`=`")?;
                term = Some(parse_term(&mut lx)?);
                lx.expect(Tok::Semi, "`;`")?;
            }
            _ => return Err(pos.err("expected `leaf` or `diagram`")),
        }
    }
    let term = term.ok_or_else(|| Pos { line: 1, col: 1 }.err("missing `diagram = ...;`"))?;
    let schema = FileSchema {
        leaves,
        diagram: TermSchema::of_term(&term),
    };
    schema_to_diagram(&schema, Some(&positions))
}

/// Parses the JSON rendering.
pub fn parse_json(text: &str) -> Result<Diagram> {
    let schema: FileSchema = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        col: e.column(),
        msg: e.to_string(),
    })?;
    schema_to_diagram(&schema, None)
}

/// Dispatches on the file extension: `.json` is the JSON rendering,
/// anything else the text form.
pub fn parse_path_text(path: &std::path::Path, text: &str) -> Result<Diagram> {
    if path.extension().and_then(|e| e.to_str()) == Some("json") {
        parse_json(text)
    } else {
        parse_sd(text)
    }
}

pub fn parse_file(path: &std::path::Path) -> Result<Diagram> {
    let text = std::fs::read_to_string(path)?;
    parse_path_text(path, &text)
}

fn leaf_schema_of(r: &RoMdp) -> LeafSchema {
    let g = r.graph();
    let name = |v: usize| g.label(v).to_string();
    LeafSchema {
        players1: g.player1_vertices().map(name).collect(),
        prob: g.probabilistic_vertices().map(name).collect(),
        edges: g.edges().map(|(u, v)| [name(u), name(v)]).collect(),
        entrances: r.entrances().iter().map(|&v| name(v)).collect(),
        exits: r.exits().iter().map(|&v| name(v)).collect(),
        buchi: g.buchi().iter().map(name).collect(),
    }
}

/// Prints the text form; `parse_sd` of the output reproduces the diagram.
pub fn print_sd(d: &Diagram) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    for (name, leaf) in &d.leaves {
        let s = leaf_schema_of(leaf);
        let list = |names: &[String]| names.join(", ");
        let _ = writeln!(out, "leaf {name} {{");
        let _ = writeln!(out, "  players1 [{}];", list(&s.players1));
        let _ = writeln!(out, "  prob [{}];", list(&s.prob));
        let edges: Vec<String> = s.edges.iter().map(|[a, b]| format!("{a} -> {b}")).collect();
        let _ = writeln!(out, "  edges [{}];", edges.join(", "));
        let _ = writeln!(out, "  entrances [{}];", list(&s.entrances));
        let _ = writeln!(out, "  exits [{}];", list(&s.exits));
        let _ = writeln!(out, "  buchi [{}];", list(&s.buchi));
        let _ = writeln!(out, "}}");
    }
    let _ = writeln!(out, "diagram = {};", d.term);
    out
}

/// Prints the JSON rendering.
pub fn print_json(d: &Diagram) -> String {
    let schema = FileSchema {
        leaves: d
            .leaves
            .iter()
            .map(|(n, l)| (n.clone(), leaf_schema_of(l)))
            .collect(),
        diagram: TermSchema::of_term(&d.term),
    };
    let mut s = serde_json::to_string_pretty(&schema).expect("schema serializes");
    s.push('\n');
    s
}
