//! Bilexical sentence graphs in the style of the SDP 2015 graphbanks.

use std::collections::BTreeSet;

use crate::graph::GraphError;

/// One token row. `index` is 1-based; `frame` is carried opaquely for
/// round-tripping and never interpreted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub pos: String,
    pub frame: Option<String>,
}

impl Token {
    pub fn new(index: usize, form: &str, lemma: &str, pos: &str) -> Self {
        Token { index, form: form.into(), lemma: lemma.into(), pos: pos.into(), frame: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SdpEdge {
    pub head: usize,
    pub dep: usize,
    pub label: String,
}

impl SdpEdge {
    pub fn new(head: usize, dep: usize, label: &str) -> Self {
        SdpEdge { head, dep, label: label.into() }
    }
}

/// A token-anchored semantic graph: the evaluation target of an AM
/// dependency tree and the unit the graph metrics compare.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpGraph {
    pub id: Option<String>,
    pub tokens: Vec<Token>,
    pub nodes: BTreeSet<usize>,
    pub edges: BTreeSet<SdpEdge>,
    pub tops: BTreeSet<usize>,
}

impl SdpGraph {
    pub fn new(tokens: Vec<Token>) -> Self {
        SdpGraph { id: None, tokens, nodes: BTreeSet::new(), edges: BTreeSet::new(), tops: BTreeSet::new() }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let n = self.tokens.len();
        for (pos, tok) in self.tokens.iter().enumerate() {
            if tok.index != pos + 1 {
                return Err(GraphError::TokenMismatch(pos + 1));
            }
        }
        for e in &self.edges {
            for end in [e.head, e.dep] {
                if end == 0 || end > n || !self.nodes.contains(&end) {
                    return Err(GraphError::NoSuchNode(crate::graph::NodeId(end as u32)));
                }
            }
        }
        for t in &self.tops {
            if *t == 0 || *t > n {
                return Err(GraphError::NoSuchNode(crate::graph::NodeId(*t as u32)));
            }
        }
        Ok(())
    }

    /// Default punctuation test: a POS tag with no alphanumeric characters.
    pub fn is_punct_pos(pos: &str) -> bool {
        !pos.is_empty() && !pos.chars().any(|c| c.is_alphanumeric())
    }

    fn punct_tokens(&self, punct_pos: &BTreeSet<String>) -> BTreeSet<usize> {
        self.tokens
            .iter()
            .filter(|t| punct_pos.contains(&t.pos) || (punct_pos.is_empty() && Self::is_punct_pos(&t.pos)))
            .map(|t| t.index)
            .collect()
    }

    /// Edges with punctuation-incident ones removed when `include_punct`
    /// is false. An empty `punct_pos` set means the default POS test.
    pub fn scored_edges(&self, include_punct: bool, punct_pos: &BTreeSet<String>) -> BTreeSet<SdpEdge> {
        if include_punct {
            return self.edges.clone();
        }
        let punct = self.punct_tokens(punct_pos);
        self.edges.iter().filter(|e| !punct.contains(&e.head) && !punct.contains(&e.dep)).cloned().collect()
    }
}

fn same_forms(a: &SdpGraph, b: &SdpGraph) -> Result<(), GraphError> {
    if a.tokens.len() != b.tokens.len() {
        return Err(GraphError::TokenMismatch(a.tokens.len().min(b.tokens.len()) + 1));
    }
    for (ta, tb) in a.tokens.iter().zip(&b.tokens) {
        if ta.form != tb.form {
            return Err(GraphError::TokenMismatch(ta.index));
        }
    }
    Ok(())
}

/// Exact equality of node, edge and top sets over the same token sequence.
/// With `include_punct` false, punctuation tokens and their edges are
/// ignored on both sides; the punctuation set is the union over both
/// graphs' POS columns, keeping the relation symmetric.
pub fn graph_equals(
    a: &SdpGraph,
    b: &SdpGraph,
    include_punct: bool,
    punct_pos: &BTreeSet<String>,
) -> Result<bool, GraphError> {
    same_forms(a, b)?;
    if include_punct {
        return Ok(a.nodes == b.nodes && a.edges == b.edges && a.tops == b.tops);
    }
    let mut punct = a.punct_tokens(punct_pos);
    punct.extend(b.punct_tokens(punct_pos));
    let filter = |s: &BTreeSet<usize>| -> BTreeSet<usize> { s.iter().filter(|t| !punct.contains(t)).copied().collect() };
    let edges = |g: &SdpGraph| -> BTreeSet<SdpEdge> {
        g.edges.iter().filter(|e| !punct.contains(&e.head) && !punct.contains(&e.dep)).cloned().collect()
    };
    Ok(filter(&a.nodes) == filter(&b.nodes) && edges(a) == edges(b) && filter(&a.tops) == filter(&b.tops))
}
