//! AM dependency trees and their evaluation to sentence graphs.
//!
//! A tree stores, per token, an optional supertag (the lexical as-graph),
//! an optional lexical label, and a head operation: `APP_x`, `MOD_x`,
//! `IGNORE` or `ROOT`. Evaluation is bottom-up. Each child subtree is
//! evaluated first; at the head, the child operations are combined in some
//! admissible order. The algebra's typing constraints (request discharge
//! before source consumption, complex modifiers needing open sources)
//! rule out most interleavings, and all admissible ones evaluate to the
//! same graph on well-typed trees. The default scheduler tries children in
//! token order and backtracks; the perturbable variant exists so tests can
//! check that schedule choice never changes the result.
//!
//! Anchoring: the supertag's lexical slot is the node that stands for the
//! token. Filling it during evaluation both writes the lexical label and
//! anchors the node to the token index. Constants without a lexical slot
//! (the vacuous ones) contribute no node of their own.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{apply, modify, type_of, AlgebraError, AlgebraMode};
use crate::graph::{AsGraph, RequestType, SourceName};
use crate::sdp::{SdpEdge, SdpGraph, Token};

/// The operation on a token's incoming tree edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeOp {
    App(SourceName),
    Mod(SourceName),
    Ignore,
    Root,
}

impl EdgeOp {
    pub fn is_ignore(&self) -> bool {
        matches!(self, EdgeOp::Ignore)
    }

    pub fn is_app(&self) -> bool {
        matches!(self, EdgeOp::App(_))
    }
}

impl fmt::Display for EdgeOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeOp::App(s) => write!(f, "APP_{s}"),
            EdgeOp::Mod(s) => write!(f, "MOD_{s}"),
            EdgeOp::Ignore => f.write_str("IGNORE"),
            EdgeOp::Root => f.write_str("ROOT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeEntry {
    pub supertag: Option<AsGraph>,
    pub lex_label: Option<String>,
    pub head: usize,
    pub op: EdgeOp,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmDependencyTree {
    pub id: Option<String>,
    pub tokens: Vec<Token>,
    pub entries: Vec<TreeEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("token rows and entries differ in length")]
    LengthMismatch,
    #[error("token {0} has index {1}, expected consecutive 1-based indices")]
    BadTokenIndex(usize, usize),
    #[error("no ROOT edge")]
    NoRoot,
    #[error("more than one ROOT edge (tokens {0} and {1})")]
    MultipleRoots(usize, usize),
    #[error("token {token} has head {head}, which is out of range or ignored")]
    BadHead { token: usize, head: usize },
    #[error("cycle through token {0}")]
    Cycle(usize),
    #[error("ignored token {0} carries a supertag or lexical label")]
    IgnoreWithSupertag(usize),
    #[error("token {0} has no supertag but is not ignored")]
    MissingSupertag(usize),
    #[error("supertag of token {token} is anchored to foreign token {anchor}")]
    ForeignAnchor { token: usize, anchor: usize },
    #[error("ROOT edge of token {0} must attach to position 0")]
    RootNotAtZero(usize),
}

/// One unconsumed child at a stuck head, with the last error it produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StuckChild {
    pub token: usize,
    pub op: EdgeOp,
    pub error: AlgebraError,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("token {0} has a lexical slot but no lexical label")]
    MissingLexLabel(usize),
    #[error("not well-typed: no admissible schedule at token {head}; unconsumed children: {}",
            .unconsumed.iter().map(|c| format!("{} ({}: {})", c.token, c.op, c.error)).collect::<Vec<_>>().join("; "))]
    NotWellTyped { head: usize, unconsumed: Vec<StuckChild> },
    #[error("algebra error at head {head}, child {child}: {source}")]
    Algebra { head: usize, child: usize, source: AlgebraError },
    #[error("evaluation leaves open sources [{0}] at the root")]
    OpenSourcesAtRoot(RequestType),
    #[error("edge {0:?} has an endpoint no token is anchored to")]
    UnanchoredEdge(String),
    #[error("the result root is not anchored to any token")]
    UnanchoredTop,
}

/// What open sources the full sentence graph may still carry.
#[derive(Debug, Clone, Default)]
pub struct EvalOptions {
    pub allowed_open: BTreeSet<SourceName>,
}

/// Hook that may reorder the candidate children the scheduler tries next.
pub type SchedulePerturbation<'a> = &'a mut dyn FnMut(&mut Vec<usize>);

impl AmDependencyTree {
    pub fn new(id: Option<String>, tokens: Vec<Token>, entries: Vec<TreeEntry>) -> Self {
        AmDependencyTree { id, tokens, entries }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn entry(&self, token: usize) -> &TreeEntry {
        &self.entries[token - 1]
    }

    pub fn entry_mut(&mut self, token: usize) -> &mut TreeEntry {
        &mut self.entries[token - 1]
    }

    pub fn token(&self, token: usize) -> &Token {
        &self.tokens[token - 1]
    }

    pub fn root_token(&self) -> Result<usize, TreeError> {
        let mut root = None;
        for (i, e) in self.entries.iter().enumerate() {
            if matches!(e.op, EdgeOp::Root) {
                match root {
                    None => root = Some(i + 1),
                    Some(first) => return Err(TreeError::MultipleRoots(first, i + 1)),
                }
            }
        }
        root.ok_or(TreeError::NoRoot)
    }

    /// Non-ignored children of `head`, ascending by token index.
    pub fn children_of(&self, head: usize) -> Vec<usize> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, e)| e.head == head && matches!(e.op, EdgeOp::App(_) | EdgeOp::Mod(_)))
            .map(|(i, _)| i + 1)
            .collect()
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if self.tokens.len() != self.entries.len() {
            return Err(TreeError::LengthMismatch);
        }
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(TreeError::BadTokenIndex(i + 1, tok.index));
            }
        }
        let root = self.root_token()?;
        if self.entry(root).head != 0 {
            return Err(TreeError::RootNotAtZero(root));
        }
        for (i, e) in self.entries.iter().enumerate() {
            let token = i + 1;
            match &e.op {
                EdgeOp::Ignore => {
                    if e.supertag.is_some() || e.lex_label.is_some() {
                        return Err(TreeError::IgnoreWithSupertag(token));
                    }
                }
                op => {
                    if e.supertag.is_none() {
                        return Err(TreeError::MissingSupertag(token));
                    }
                    if let EdgeOp::App(_) | EdgeOp::Mod(_) = op {
                        let ok = e.head >= 1
                            && e.head <= self.entries.len()
                            && e.head != token
                            && !self.entry(e.head).op.is_ignore();
                        if !ok {
                            return Err(TreeError::BadHead { token, head: e.head });
                        }
                    }
                }
            }
            if let Some(st) = &e.supertag {
                for (_, anchor) in st.anchored_nodes() {
                    if anchor != token {
                        return Err(TreeError::ForeignAnchor { token, anchor });
                    }
                }
            }
        }
        // Every non-ignored token must reach the root without cycling.
        for (i, e) in self.entries.iter().enumerate() {
            if e.op.is_ignore() {
                continue;
            }
            let mut cur = i + 1;
            let mut steps = 0;
            while cur != 0 {
                cur = self.entry(cur).head;
                steps += 1;
                if steps > self.entries.len() {
                    return Err(TreeError::Cycle(i + 1));
                }
            }
        }
        Ok(())
    }

    fn prepared_supertag(&self, token: usize) -> Result<AsGraph, EvalError> {
        let entry = self.entry(token);
        let mut g = entry.supertag.clone().ok_or(TreeError::MissingSupertag(token))?;
        if g.lex_slot_node().is_some() {
            let label = entry.lex_label.as_deref().ok_or(EvalError::MissingLexLabel(token))?;
            g.fill_lex(label, token);
        }
        g
            .validate(AlgebraMode::AmPlus)
            .map_err(|e| EvalError::Algebra { head: token, child: token, source: AlgebraError::Graph(e) })?;
        Ok(g)
    }

    fn eval_rec(
        &self,
        mode: AlgebraMode,
        token: usize,
        perturb: SchedulePerturbation<'_>,
    ) -> Result<AsGraph, EvalError> {
        let kids = self.children_of(token);
        let mut kid_graphs = Vec::with_capacity(kids.len());
        for &kid in &kids {
            kid_graphs.push(self.eval_rec(mode, kid, perturb)?);
        }
        let start = self.prepared_supertag(token)?;
        let remaining: Vec<usize> = (0..kids.len()).collect();
        let mut best_stuck: Option<(usize, Vec<StuckChild>)> = None;
        match self.search(mode, start, remaining, &kids, &kid_graphs, perturb, &mut best_stuck) {
            Some(result) => Ok(result),
            None => {
                let (_, unconsumed) = best_stuck.expect("search failed, so some state was stuck");
                Err(EvalError::NotWellTyped { head: token, unconsumed })
            }
        }
    }

    /// Depth-first search over combination orders at one head. Returns the
    /// first complete combination; records the most advanced stuck state.
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        mode: AlgebraMode,
        current: AsGraph,
        remaining: Vec<usize>,
        kids: &[usize],
        kid_graphs: &[AsGraph],
        perturb: SchedulePerturbation<'_>,
        best_stuck: &mut Option<(usize, Vec<StuckChild>)>,
    ) -> Option<AsGraph> {
        if remaining.is_empty() {
            return Some(current);
        }
        let mut order = remaining.clone();
        perturb(&mut order);
        let mut failures = Vec::new();
        for &k in &order {
            let child_token = kids[k];
            let op = &self.entry(child_token).op;
            let attempt = match op {
                EdgeOp::App(x) => apply(mode, &current, x, &kid_graphs[k]),
                EdgeOp::Mod(x) => modify(mode, &current, x, &kid_graphs[k]),
                _ => unreachable!("children are APP or MOD"),
            };
            match attempt {
                Ok(next) => {
                    let rest: Vec<usize> = remaining.iter().copied().filter(|r| *r != k).collect();
                    if let Some(done) =
                        self.search(mode, next, rest, kids, kid_graphs, perturb, best_stuck)
                    {
                        return Some(done);
                    }
                }
                Err(e) => failures.push(StuckChild { token: child_token, op: op.clone(), error: e }),
            }
        }
        // Every candidate failed here (or deeper). Keep the stuck state
        // with the fewest unconsumed children for diagnostics.
        if !failures.is_empty() {
            let better = match best_stuck {
                None => true,
                Some((n, _)) => remaining.len() < *n,
            };
            if better {
                *best_stuck = Some((remaining.len(), failures));
            }
        }
        None
    }

    /// Evaluate the subtree rooted at `token` to an as-graph.
    pub fn evaluate_subgraph(&self, mode: AlgebraMode, token: usize) -> Result<AsGraph, EvalError> {
        self.eval_rec(mode, token, &mut |_| ())
    }

    pub fn evaluate(&self, mode: AlgebraMode) -> Result<SdpGraph, EvalError> {
        self.evaluate_with(mode, &EvalOptions::default(), &mut |_| ())
    }

    pub fn evaluate_with(
        &self,
        mode: AlgebraMode,
        options: &EvalOptions,
        perturb: SchedulePerturbation<'_>,
    ) -> Result<SdpGraph, EvalError> {
        self.validate()?;
        let root = self.root_token()?;
        let graph = self.eval_rec(mode, root, perturb)?;
        let open = type_of(&graph);
        if open.names().any(|n| !options.allowed_open.contains(n)) {
            return Err(EvalError::OpenSourcesAtRoot(open));
        }
        self.project(&graph)
    }

    /// Evaluation under a randomized admissible schedule. Exists so tests
    /// can check that all schedules agree.
    pub fn evaluate_shuffled<R: Rng>(
        &self,
        mode: AlgebraMode,
        options: &EvalOptions,
        rng: &mut R,
    ) -> Result<SdpGraph, EvalError> {
        self.evaluate_with(mode, options, &mut |order| order.shuffle(rng))
    }

    pub fn well_typed(&self, mode: AlgebraMode) -> Result<(), EvalError> {
        self.evaluate(mode).map(|_| ())
    }

    fn project(&self, g: &AsGraph) -> Result<SdpGraph, EvalError> {
        let mut sdp = SdpGraph::new(self.tokens.clone());
        sdp.id = self.id.clone();
        for (_, anchor) in g.anchored_nodes() {
            sdp.nodes.insert(anchor);
        }
        for e in g.edges() {
            // An unanchored endpoint marked as a source is a permitted
            // open slot; its edge has no bilexical representation.
            let anchor_of = |id| -> Result<Option<usize>, EvalError> {
                let rec = g.node(id).expect("edge endpoints exist");
                match rec.anchor {
                    Some(a) => Ok(Some(a)),
                    None if !g.sources_at(id).is_empty() => Ok(None),
                    None => Err(EvalError::UnanchoredEdge(e.label.clone())),
                }
            };
            if let (Some(head), Some(dep)) = (anchor_of(e.from)?, anchor_of(e.to)?) {
                sdp.edges.insert(SdpEdge { head, dep, label: e.label.clone() });
            }
        }
        let top = g.node(g.root()).and_then(|r| r.anchor).ok_or(EvalError::UnanchoredTop)?;
        sdp.tops.insert(top);
        Ok(sdp)
    }
}
