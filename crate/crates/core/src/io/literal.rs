//! Textual as-graph literals.
//!
//! A graph is written as a parenthesized term starting at the root:
//!
//! ```text
//! (n0 / --LEX-- <root> :BV(n1 <det>))
//! (n0 <root> <o[s]>)
//! (n0 <root> <neg> :adv_ARG1-of(n1 / --LEX--))
//! ```
//!
//! Markers are `<root>`, `<src>` or `<src[request]>`; requests are comma
//! separated source names, each optionally carrying a nested `[..]`. Edges
//! are `:label(child)`, with a `-of` suffix when the edge points towards
//! the current node, and a bare node id inside the parentheses for
//! reentrant references. Printing is canonical: node ids are renamed in
//! visitation order, markers and edges are sorted, so printing the same
//! value twice is byte-identical and structurally equal graphs print alike.
//! Edge labels may not themselves end in `-of`.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::AlgebraMode;
use crate::graph::{AsGraph, NodeId, RequestType, SourceName, ROOT_MARKER};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("bad graph literal at offset {position}: {message}")]
pub struct LiteralError {
    pub position: usize,
    pub message: String,
}

fn is_word_char(c: char) -> bool {
    !c.is_whitespace() && !matches!(c, '(' | ')' | '[' | ']' | '<' | '>' | ':' | '/' | ',' | ';')
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Dir {
    Out,
    In,
}

struct Printer<'g> {
    graph: &'g AsGraph,
    names: BTreeMap<NodeId, String>,
    visited_edges: BTreeSet<(NodeId, NodeId, String)>,
    out: String,
}

impl<'g> Printer<'g> {
    fn node_sort_key(&self, id: NodeId) -> (String, Vec<String>, bool, NodeId) {
        let rec = self.graph.node(id).expect("node exists");
        let sources: Vec<String> = self.graph.sources_at(id).iter().map(|s| s.to_string()).collect();
        (rec.label.clone().unwrap_or_default(), sources, id == self.graph.root(), id)
    }

    fn next_edge(&self, id: NodeId) -> Option<(String, Dir, NodeId)> {
        let mut edges: Vec<(String, Dir, NodeId)> = Vec::new();
        for e in self.graph.edges() {
            if self.visited_edges.contains(&(e.from, e.to, e.label.clone())) {
                continue;
            }
            if e.from == id {
                edges.push((e.label.clone(), Dir::Out, e.to));
            } else if e.to == id {
                edges.push((e.label.clone(), Dir::In, e.from));
            }
        }
        edges.sort_by(|a, b| (&a.0, a.1, self.node_sort_key(a.2)).cmp(&(&b.0, b.1, self.node_sort_key(b.2))));
        edges.into_iter().next()
    }

    fn print_node(&mut self, id: NodeId) {
        let name = format!("n{}", self.names.len());
        self.names.insert(id, name.clone());
        self.out.push('(');
        self.out.push_str(&name);
        let rec = self.graph.node(id).expect("node exists");
        if let Some(label) = &rec.label {
            self.out.push_str(" / ");
            self.out.push_str(label);
        }
        if id == self.graph.root() {
            self.out.push_str(" <root>");
        }
        let mut marks: Vec<(&SourceName, &RequestType)> =
            self.graph.sources().filter(|(_, m)| m.node == id).map(|(n, m)| (n, &m.request)).collect();
        marks.sort_by_key(|(n, _)| n.to_string());
        for (source, request) in marks {
            if request.is_empty() {
                self.out.push_str(&format!(" <{source}>"));
            } else {
                self.out.push_str(&format!(" <{source}[{request}]>"));
            }
        }
        // Re-scan after each child: printing a subtree consumes edges that
        // may also have been incident here.
        while let Some((label, dir, other)) = self.next_edge(id) {
            let key = match dir {
                Dir::Out => (id, other, label.clone()),
                Dir::In => (other, id, label.clone()),
            };
            self.visited_edges.insert(key);
            match dir {
                Dir::Out => self.out.push_str(&format!(" :{label}")),
                Dir::In => self.out.push_str(&format!(" :{label}-of")),
            }
            if let Some(seen) = self.names.get(&other) {
                self.out.push_str(&format!("({seen})"));
            } else {
                self.print_node(other);
            }
        }
        self.out.push(')');
    }
}

/// Canonical text for a graph. Disconnected components, should they ever
/// occur, are appended after `;` separators.
pub fn print_graph(g: &AsGraph) -> String {
    let mut p = Printer { graph: g, names: BTreeMap::new(), visited_edges: BTreeSet::new(), out: String::new() };
    p.print_node(g.root());
    let mut parts = vec![std::mem::take(&mut p.out)];
    loop {
        let mut unvisited: Vec<NodeId> = g.node_ids().filter(|id| !p.names.contains_key(id)).collect();
        unvisited.sort();
        let Some(start) = unvisited.first().copied() else { break };
        p.print_node(start);
        parts.push(std::mem::take(&mut p.out));
    }
    let (first, rest) = parts.split_first().expect("root component");
    let mut rest: Vec<&String> = rest.iter().collect();
    rest.sort();
    let mut out = first.clone();
    for part in rest {
        out.push_str(" ; ");
        out.push_str(part);
    }
    out
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
    graph: AsGraph,
    ids: BTreeMap<String, NodeId>,
    root_seen: Option<NodeId>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, message: impl Into<String>) -> Result<T, LiteralError> {
        Err(LiteralError { position: self.pos, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text.get(self.pos).map(|b| *b as char)
    }

    fn eat(&mut self, c: char) -> Result<(), LiteralError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {c:?}"))
        }
    }

    fn word(&mut self) -> Result<String, LiteralError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.text.len() && is_word_char(self.text[self.pos] as char) {
            self.pos += 1;
        }
        if self.pos == start {
            return self.err("expected a name");
        }
        match std::str::from_utf8(&self.text[start..self.pos]) {
            Ok(w) => Ok(w.to_string()),
            Err(_) => self.err("name is not valid UTF-8"),
        }
    }

    fn request(&mut self) -> Result<RequestType, LiteralError> {
        let mut request = RequestType::empty();
        loop {
            let name = self.word()?;
            let name = match SourceName::new(name) {
                Ok(n) => n,
                Err(e) => return self.err(e.to_string()),
            };
            let nested = if self.peek() == Some('[') {
                self.eat('[')?;
                let inner = self.request()?;
                self.eat(']')?;
                inner
            } else {
                RequestType::empty()
            };
            request.insert(name, nested);
            if self.peek() == Some(',') {
                self.eat(',')?;
            } else {
                return Ok(request);
            }
        }
    }

    /// The part of a node after its id: optional label, markers, edges.
    fn node_body(&mut self, id: NodeId) -> Result<(), LiteralError> {
        if self.peek() == Some('/') {
            self.eat('/')?;
            let label = self.word()?;
            if label == crate::graph::LEX_PLACEHOLDER {
                self.graph.set_lex_slot(id);
            } else {
                self.graph.set_label(id, label);
            }
        }
        while self.peek() == Some('<') {
            self.eat('<')?;
            let name = self.word()?;
            if name == ROOT_MARKER {
                if self.root_seen.is_some() {
                    return self.err("second <root> marker");
                }
                self.root_seen = Some(id);
            } else {
                let source = match SourceName::new(name) {
                    Ok(s) => s,
                    Err(e) => return self.err(e.to_string()),
                };
                let request = if self.peek() == Some('[') {
                    self.eat('[')?;
                    let r = self.request()?;
                    self.eat(']')?;
                    r
                } else {
                    RequestType::empty()
                };
                if let Err(e) = self.graph.mark_source(source, id, request) {
                    return self.err(e.to_string());
                }
            }
            self.eat('>')?;
        }
        while self.peek() == Some(':') {
            self.eat(':')?;
            let raw = self.word()?;
            let (label, inverse) = match raw.strip_suffix("-of") {
                Some(base) if !base.is_empty() => (base.to_string(), true),
                _ => (raw, false),
            };
            self.eat('(')?;
            let child_id = self.word()?;
            let target = if self.ids.contains_key(&child_id) {
                // A bare known id is a reentrant reference.
                if self.peek() != Some(')') {
                    return self.err(format!("node id {child_id:?} declared twice"));
                }
                self.ids[&child_id]
            } else {
                let fresh = self.declare(child_id)?;
                self.node_body(fresh)?;
                fresh
            };
            self.eat(')')?;
            if inverse {
                self.graph.add_edge(target, id, label);
            } else {
                self.graph.add_edge(id, target, label);
            }
        }
        Ok(())
    }

    fn declare(&mut self, id_text: String) -> Result<NodeId, LiteralError> {
        if self.ids.contains_key(&id_text) {
            return self.err(format!("node id {id_text:?} declared twice"));
        }
        let id = self.graph.add_node();
        self.ids.insert(id_text, id);
        Ok(id)
    }

    fn node(&mut self) -> Result<NodeId, LiteralError> {
        self.eat('(')?;
        let id_text = self.word()?;
        let id = self.declare(id_text)?;
        self.node_body(id)?;
        self.eat(')')?;
        Ok(id)
    }
}

/// Parse a graph literal. The result is validated under AM+, the laxer
/// mode; callers enforce AM separately where it matters.
pub fn parse_graph(text: &str) -> Result<AsGraph, LiteralError> {
    let mut parser =
        Parser { text: text.as_bytes(), pos: 0, graph: AsGraph::parser_seed(), ids: BTreeMap::new(), root_seen: None };
    let first = parser.node()?;
    while parser.peek() == Some(';') {
        parser.eat(';')?;
        parser.node()?;
    }
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return parser.err("trailing input");
    }
    let root = parser.root_seen.unwrap_or(first);
    parser.graph.set_root(root);
    let g = parser.graph;
    if let Err(e) = g.validate(AlgebraMode::AmPlus) {
        return Err(LiteralError { position: text.len(), message: e.to_string() });
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(text: &str) -> String {
        let g = parse_graph(text).unwrap();
        let printed = print_graph(&g);
        let g2 = parse_graph(&printed).unwrap();
        assert!(g.structural_eq(&g2), "reparse changed {text:?}");
        assert_eq!(print_graph(&g2), printed, "canonical print not idempotent for {text:?}");
        printed
    }

    #[test]
    fn plain_constant() {
        assert_eq!(roundtrip("(x / cat <root>)"), "(n0 / cat <root>)");
    }

    #[test]
    fn markers_and_requests() {
        let printed = roundtrip("(a / be <root> :verb_ARG2(c <o[s]>) :verb_ARG1(b <s>))");
        assert_eq!(printed, "(n0 / be <root> :verb_ARG1(n1 <s>) :verb_ARG2(n2 <o[s]>))");
    }

    #[test]
    fn inverse_edges_reach_into_the_root() {
        let printed = roundtrip("(v <root> <neg> :adv_ARG1-of(n / --LEX--))");
        assert_eq!(printed, "(n0 <root> <neg> :adv_ARG1-of(n1 / --LEX--))");
    }

    #[test]
    fn reentrant_reference() {
        let g = parse_graph("(a / be <root> :ARG1(b / cat) :ARG2(c / lazy :ARG1(b)))").unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 3);
        roundtrip("(a / be <root> :ARG1(b / cat) :ARG2(c / lazy :ARG1(b)))");
    }

    #[test]
    fn double_marked_root_parses() {
        let g = parse_graph("(u <root> <o[s]>)").unwrap();
        assert_eq!(g.source_count(), 1);
        assert!(g.validate(AlgebraMode::AmPlus).is_ok());
        assert_eq!(roundtrip("(u <root> <o[s]>)"), "(n0 <root> <o[s]>)");
    }

    #[test]
    fn errors_carry_positions() {
        let err = parse_graph("(a / cat <root> :BV(b <det>)").unwrap_err();
        assert!(err.position > 0);
        assert!(parse_graph("(a / cat <root> <root>)").is_err());
        assert!(parse_graph("(a :lbl(zzz) :x(zzz <s>))").is_err(), "redeclared reference");
    }

    #[test]
    fn duplicate_source_rejected() {
        assert!(parse_graph("(a <s> :x(b <s>))").is_err());
    }

    #[test]
    fn parallel_edges_with_same_label_print_apart() {
        let printed = roundtrip("(a / --LEX-- <root> :m.member(x <op1>) :m.member(y <op2>))");
        assert_eq!(printed, "(n0 / --LEX-- <root> :m.member(n1 <op1>) :m.member(n2 <op2>))");
    }
}
