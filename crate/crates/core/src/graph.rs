//! Annotated s-graphs: the graph fragments combined by the algebra.
//!
//! An [`AsGraph`] is a small labeled graph with one distinguished root node
//! and a set of named *sources*, open slots where other graphs attach. Each
//! source stores a [`RequestType`] describing the open sources its argument
//! must still carry. Graphs are immutable values; every operation returns a
//! new graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::algebra::AlgebraMode;

/// Reserved marker name for the root; never a valid source name.
pub const ROOT_MARKER: &str = "root";

/// Placeholder label for the delexicalized slot of a supertag.
pub const LEX_PLACEHOLDER: &str = "--LEX--";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("invalid source name {0:?}")]
    InvalidSourceName(String),
    #[error("node {0:?} not in graph")]
    NoSuchNode(NodeId),
    #[error("label clash merging nodes: {0:?} vs {1:?}")]
    LabelClash(String, String),
    #[error("anchor clash merging nodes: token {0} vs token {1}")]
    AnchorClash(usize, usize),
    #[error("node would carry sources {0:?}, beyond what mode {1} allows")]
    SourceClash(Vec<String>, AlgebraMode),
    #[error("source {0} marked more than once")]
    DuplicateSource(String),
    #[error("root node missing from node set")]
    DanglingRoot,
    #[error("more than one lexical slot")]
    MultipleLexSlots,
    #[error("anchor {0} used by more than one node")]
    DuplicateAnchor(usize),
    #[error("token sequences differ at position {0}")]
    TokenMismatch(usize),
}

/// A named source. Never the reserved `root` marker, never empty.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
#[serde(transparent)]
pub struct SourceName(String);

impl SourceName {
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        if name.is_empty() || name == ROOT_MARKER {
            return Err(GraphError::InvalidSourceName(name));
        }
        Ok(SourceName(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SourceName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for SourceName {
    type Err = GraphError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SourceName::new(s)
    }
}

/// A finite mapping from source names to nested requests. The type of a
/// graph is such a mapping over its open sources; the annotation stored at
/// a source is the type its argument must have.
#[derive(Debug, Clone, PartialEq, Eq, Default, PartialOrd, Ord)]
pub struct RequestType(BTreeMap<SourceName, RequestType>);

impl RequestType {
    pub fn empty() -> Self {
        RequestType::default()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn singleton(name: SourceName, request: RequestType) -> Self {
        let mut map = BTreeMap::new();
        map.insert(name, request);
        RequestType(map)
    }

    pub fn insert(&mut self, name: SourceName, request: RequestType) {
        self.0.insert(name, request);
    }

    /// Does `name` occur at the top level of this request?
    pub fn mentions(&self, name: &SourceName) -> bool {
        self.0.contains_key(name)
    }

    pub fn get(&self, name: &SourceName) -> Option<&RequestType> {
        self.0.get(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &SourceName> {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SourceName, &RequestType)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }
}

impl FromIterator<(SourceName, RequestType)> for RequestType {
    fn from_iter<T: IntoIterator<Item = (SourceName, RequestType)>>(iter: T) -> Self {
        RequestType(iter.into_iter().collect())
    }
}

impl fmt::Display for RequestType {
    /// Canonical rendering: comma separated, sorted, nested in brackets.
    /// `{s: {}, o: {s: {}}}` prints as `o[s],s`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, nested) in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{name}")?;
            if !nested.is_empty() {
                write!(f, "[{nested}]")?;
            }
        }
        Ok(())
    }
}

/// Opaque node identity, local to one graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub(crate) u32);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeRecord {
    pub label: Option<String>,
    pub lex_slot: bool,
    pub anchor: Option<usize>,
}

impl NodeRecord {
    fn empty() -> Self {
        NodeRecord { label: None, lex_slot: false, anchor: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceMark {
    pub node: NodeId,
    pub request: RequestType,
}

/// An annotated s-graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AsGraph {
    nodes: BTreeMap<NodeId, NodeRecord>,
    edges: BTreeSet<Edge>,
    root: NodeId,
    sources: BTreeMap<SourceName, SourceMark>,
    next_id: u32,
}

impl AsGraph {
    /// A graph with a single unlabeled root node.
    pub fn single_node() -> Self {
        let mut nodes = BTreeMap::new();
        nodes.insert(NodeId(0), NodeRecord::empty());
        AsGraph { nodes, edges: BTreeSet::new(), root: NodeId(0), sources: BTreeMap::new(), next_id: 1 }
    }

    /// Node-less shell for the literal parser, which repoints the root
    /// after reading the term. Invalid until a node is added.
    pub(crate) fn parser_seed() -> Self {
        AsGraph { nodes: BTreeMap::new(), edges: BTreeSet::new(), root: NodeId(0), sources: BTreeMap::new(), next_id: 0 }
    }

    pub fn add_node(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        self.nodes.insert(id, NodeRecord::empty());
        id
    }

    pub fn set_label(&mut self, node: NodeId, label: impl Into<String>) {
        self.nodes.get_mut(&node).expect("node exists").label = Some(label.into());
    }

    pub fn set_lex_slot(&mut self, node: NodeId) {
        let rec = self.nodes.get_mut(&node).expect("node exists");
        rec.lex_slot = true;
        rec.label = Some(LEX_PLACEHOLDER.to_string());
    }

    pub fn set_anchor(&mut self, node: NodeId, token: usize) {
        self.nodes.get_mut(&node).expect("node exists").anchor = Some(token);
    }

    pub fn set_root(&mut self, node: NodeId) {
        debug_assert!(self.nodes.contains_key(&node));
        self.root = node;
    }

    pub fn add_edge(&mut self, from: NodeId, to: NodeId, label: impl Into<String>) {
        self.edges.insert(Edge { from, to, label: label.into() });
    }

    pub fn mark_source(&mut self, name: SourceName, node: NodeId, request: RequestType) -> Result<(), GraphError> {
        if self.sources.contains_key(&name) {
            return Err(GraphError::DuplicateSource(name.to_string()));
        }
        self.sources.insert(name, SourceMark { node, request });
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeRecord> {
        self.nodes.get(&id)
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn sources(&self) -> impl Iterator<Item = (&SourceName, &SourceMark)> {
        self.sources.iter()
    }

    pub fn source(&self, name: &SourceName) -> Option<&SourceMark> {
        self.sources.get(name)
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    /// Source names marked on `node`.
    pub fn sources_at(&self, node: NodeId) -> Vec<&SourceName> {
        self.sources.iter().filter(|(_, m)| m.node == node).map(|(n, _)| n).collect()
    }

    pub fn lex_slot_node(&self) -> Option<NodeId> {
        self.nodes.iter().find(|(_, r)| r.lex_slot).map(|(id, _)| *id)
    }

    pub fn anchored_nodes(&self) -> impl Iterator<Item = (NodeId, usize)> + '_ {
        self.nodes.iter().filter_map(|(id, r)| r.anchor.map(|a| (*id, a)))
    }

    /// Replace the lexical placeholder with `label` and anchor the slot to
    /// `token`, consuming the slot. No-op when the graph has none.
    pub fn fill_lex(&mut self, label: &str, token: usize) {
        if let Some(id) = self.lex_slot_node() {
            let rec = self.nodes.get_mut(&id).expect("node exists");
            rec.label = Some(label.to_string());
            rec.anchor = Some(token);
            rec.lex_slot = false;
        }
    }

    /// Remove the source mark for `name`, if any.
    pub fn unmark_source(&mut self, name: &SourceName) -> Option<SourceMark> {
        self.sources.remove(name)
    }

    pub fn remove_edge(&mut self, from: NodeId, to: NodeId, label: &str) -> bool {
        self.edges.remove(&Edge { from, to, label: label.to_string() })
    }

    /// Remove a node that carries no edges, marks or root. Returns false
    /// when the node is still in use.
    pub fn remove_isolated_node(&mut self, id: NodeId) -> bool {
        if self.root == id
            || self.edges.iter().any(|e| e.from == id || e.to == id)
            || self.sources.values().any(|m| m.node == id)
        {
            return false;
        }
        self.nodes.remove(&id).is_some()
    }

    /// Check all value invariants under `mode` without mutating.
    pub fn validate(&self, mode: AlgebraMode) -> Result<(), GraphError> {
        if !self.nodes.contains_key(&self.root) {
            return Err(GraphError::DanglingRoot);
        }
        for edge in &self.edges {
            if !self.nodes.contains_key(&edge.from) {
                return Err(GraphError::NoSuchNode(edge.from));
            }
            if !self.nodes.contains_key(&edge.to) {
                return Err(GraphError::NoSuchNode(edge.to));
            }
        }
        let mut lex_slots = 0;
        let mut anchors = BTreeSet::new();
        for rec in self.nodes.values() {
            if rec.lex_slot {
                lex_slots += 1;
            }
            if let Some(a) = rec.anchor {
                if !anchors.insert(a) {
                    return Err(GraphError::DuplicateAnchor(a));
                }
            }
        }
        if lex_slots > 1 {
            return Err(GraphError::MultipleLexSlots);
        }
        for mark in self.sources.values() {
            if !self.nodes.contains_key(&mark.node) {
                return Err(GraphError::NoSuchNode(mark.node));
            }
        }
        // Source-per-node limits: one per non-root node, and the root node
        // carries none under AM, at most one under AM+.
        let mut per_node: BTreeMap<NodeId, Vec<String>> = BTreeMap::new();
        for (name, mark) in &self.sources {
            per_node.entry(mark.node).or_default().push(name.to_string());
        }
        for (node, names) in per_node {
            let limit = if node == self.root {
                match mode {
                    AlgebraMode::Am => 0,
                    AlgebraMode::AmPlus => 1,
                }
            } else {
                1
            };
            if names.len() > limit {
                return Err(GraphError::SourceClash(names, mode));
            }
        }
        Ok(())
    }

    /// Merge `absorb` into `keep`: edges are re-targeted, label/anchor/lex
    /// slot and source marks propagate from whichever node carried them.
    /// The mode only governs how many sources may pile up on one node.
    pub fn merge_nodes(&self, keep: NodeId, absorb: NodeId, mode: AlgebraMode) -> Result<AsGraph, GraphError> {
        if !self.nodes.contains_key(&keep) {
            return Err(GraphError::NoSuchNode(keep));
        }
        if !self.nodes.contains_key(&absorb) {
            return Err(GraphError::NoSuchNode(absorb));
        }
        if keep == absorb {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        let absorbed = out.nodes.remove(&absorb).expect("checked above");
        let target = out.nodes.get_mut(&keep).expect("checked above");
        match (&target.label, &absorbed.label) {
            (Some(a), Some(b)) if a != b => {
                return Err(GraphError::LabelClash(a.clone(), b.clone()));
            }
            (None, Some(b)) => target.label = Some(b.clone()),
            _ => {}
        }
        match (target.anchor, absorbed.anchor) {
            (Some(a), Some(b)) if a != b => return Err(GraphError::AnchorClash(a, b)),
            (None, Some(b)) => target.anchor = Some(b),
            _ => {}
        }
        target.lex_slot = target.lex_slot || absorbed.lex_slot;
        let redirect = |id: NodeId| if id == absorb { keep } else { id };
        out.edges = out
            .edges
            .iter()
            .map(|e| Edge { from: redirect(e.from), to: redirect(e.to), label: e.label.clone() })
            .collect();
        for mark in out.sources.values_mut() {
            mark.node = redirect(mark.node);
        }
        if out.root == absorb {
            out.root = keep;
        }
        out.validate(mode)?;
        Ok(out)
    }

    /// Copy every node and edge of `other` into `self` with fresh ids.
    /// Source marks of `other` are returned alongside the id mapping rather
    /// than installed, since the caller decides how they combine.
    pub(crate) fn absorb_disjoint(&mut self, other: &AsGraph) -> BTreeMap<NodeId, NodeId> {
        let mut mapping = BTreeMap::new();
        for (id, rec) in &other.nodes {
            let new_id = self.add_node();
            *self.nodes.get_mut(&new_id).expect("fresh node") = rec.clone();
            mapping.insert(*id, new_id);
        }
        for edge in &other.edges {
            self.add_edge(mapping[&edge.from], mapping[&edge.to], edge.label.clone());
        }
        mapping
    }

    /// Structural equality up to node ids, via canonical rendering.
    pub fn structural_eq(&self, other: &AsGraph) -> bool {
        crate::io::literal::print_graph(self) == crate::io::literal::print_graph(other)
    }
}

/// The multiset of edge endpoints, used by tests to check that merging
/// preserves incidence up to the keep/absorb substitution.
pub fn endpoint_multiset(g: &AsGraph) -> BTreeMap<(NodeId, String), usize> {
    let mut counts = BTreeMap::new();
    for e in g.edges() {
        *counts.entry((e.from, format!(">{}", e.label))).or_insert(0) += 1;
        *counts.entry((e.to, format!("<{}", e.label))).or_insert(0) += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(name: &str) -> SourceName {
        SourceName::new(name).unwrap()
    }

    #[test]
    fn source_name_rejects_reserved_and_empty() {
        assert!(SourceName::new("root").is_err());
        assert!(SourceName::new("").is_err());
        assert!(SourceName::new("s").is_ok());
    }

    #[test]
    fn request_type_equality_is_order_insensitive() {
        let a: RequestType = [(src("s"), RequestType::empty()), (src("o"), RequestType::singleton(src("s"), RequestType::empty()))]
            .into_iter()
            .collect();
        let b: RequestType = [(src("o"), RequestType::singleton(src("s"), RequestType::empty())), (src("s"), RequestType::empty())]
            .into_iter()
            .collect();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "o[s],s");
    }

    #[test]
    fn merge_unlabeled_root_into_labeled_keeps_root_and_label() {
        let mut g = AsGraph::single_node();
        let cat = g.add_node();
        g.set_label(cat, "cat");
        g.add_edge(g.root(), cat, "BV");
        let root = g.root();
        let merged = g.merge_nodes(cat, root, AlgebraMode::Am).unwrap();
        assert_eq!(merged.root(), cat);
        assert_eq!(merged.node(cat).unwrap().label.as_deref(), Some("cat"));
        assert_eq!(merged.node_count(), 1);
    }

    #[test]
    fn merge_with_distinct_labels_clashes() {
        let mut g = AsGraph::single_node();
        g.set_label(g.root(), "lazy");
        let cat = g.add_node();
        g.set_label(cat, "cat");
        let root = g.root();
        assert!(matches!(g.merge_nodes(root, cat, AlgebraMode::Am), Err(GraphError::LabelClash(_, _))));
    }

    #[test]
    fn merge_two_placeholders_preserves_edge_count() {
        // Independent oracle: build the expected edge set directly.
        let mut g = AsGraph::single_node();
        g.set_label(g.root(), "hub");
        let a = g.add_node();
        let b = g.add_node();
        g.add_edge(g.root(), a, "x");
        g.add_edge(b, g.root(), "y");
        let before = endpoint_multiset(&g);
        assert_eq!(g.edge_count(), 2);

        let merged = g.merge_nodes(a, b, AlgebraMode::Am).unwrap();
        assert_eq!(merged.edge_count(), 2);
        let mut expected = AsGraph::single_node();
        expected.set_label(expected.root(), "hub");
        let ab = expected.add_node();
        expected.add_edge(expected.root(), ab, "x");
        expected.add_edge(ab, expected.root(), "y");
        assert!(merged.structural_eq(&expected));

        // Endpoint multiset is preserved up to the a/b substitution.
        let after = endpoint_multiset(&merged);
        let substituted: BTreeMap<_, _> = before
            .into_iter()
            .map(|((id, lbl), n)| ((if id == b { a } else { id }, lbl), n))
            .collect();
        assert_eq!(after, substituted);
    }

    #[test]
    fn merge_with_distinct_anchors_clashes() {
        let mut g = AsGraph::single_node();
        let other = g.add_node();
        g.set_anchor(g.root(), 1);
        g.set_anchor(other, 2);
        let root = g.root();
        assert!(matches!(g.merge_nodes(root, other, AlgebraMode::Am), Err(GraphError::AnchorClash(1, 2))));
    }

    #[test]
    fn merge_respects_source_limits_per_mode() {
        let mut g = AsGraph::single_node();
        let a = g.add_node();
        let b = g.add_node();
        g.add_edge(g.root(), a, "x");
        g.add_edge(g.root(), b, "y");
        g.mark_source(src("s"), a, RequestType::empty()).unwrap();
        g.mark_source(src("o"), b, RequestType::empty()).unwrap();
        assert!(matches!(g.merge_nodes(a, b, AlgebraMode::AmPlus), Err(GraphError::SourceClash(_, _))));
        // Merging a source onto the root is an AM violation but fine in AM+.
        let root = g.root();
        assert!(matches!(g.merge_nodes(root, a, AlgebraMode::Am), Err(GraphError::SourceClash(_, _))));
        assert!(g.merge_nodes(root, a, AlgebraMode::AmPlus).is_ok());
    }

    #[test]
    fn validate_flags_duplicate_anchor() {
        let mut g = AsGraph::single_node();
        let a = g.add_node();
        g.set_anchor(g.root(), 3);
        g.set_anchor(a, 3);
        assert!(matches!(g.validate(AlgebraMode::Am), Err(GraphError::DuplicateAnchor(3))));
    }
}
