//! The Apply and Modify operations and their typing discipline.
//!
//! `apply(head, x, arg)` fills the head's `x`-source with the argument's
//! root; nodes carrying the same source name in both graphs are merged,
//! which is where reentrancies come from. `modify(head, x, modifier)`
//! attaches the modifier at the head's root through the modifier's
//! `x`-source; the head keeps its root and its open sources.
//!
//! The two modes differ in one point only: AM forbids any source on a root
//! node, while AM+ permits one extra source there. The double-marked root
//! is what makes semantically vacuous heads expressible: applying into a
//! root-marked source hands the root over to the argument.

use std::fmt;

use crate::graph::{AsGraph, GraphError, RequestType, SourceName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum AlgebraMode {
    Am,
    AmPlus,
}

impl fmt::Display for AlgebraMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlgebraMode::Am => f.write_str("AM"),
            AlgebraMode::AmPlus => f.write_str("AM+"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("no source {0} in graph")]
    NoSuchSource(SourceName),
    #[error("type mismatch at {at}: expected [{expected}], argument has [{actual}]")]
    TypeMismatch { at: SourceName, expected: RequestType, actual: RequestType },
    #[error("source {blocked} is still requested at {requester} and cannot be filled yet")]
    BlockedSource { blocked: SourceName, requester: SourceName },
    #[error("modifier source {0} is not open in the head")]
    IncompatibleModifier(SourceName),
    #[error("mode violation: {0}")]
    ModeViolation(GraphError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn validated(g: AsGraph, mode: AlgebraMode) -> Result<AsGraph, AlgebraError> {
    g.validate(mode).map_err(AlgebraError::ModeViolation)?;
    Ok(g)
}

fn check_input(g: &AsGraph, mode: AlgebraMode) -> Result<(), AlgebraError> {
    g.validate(mode).map_err(AlgebraError::ModeViolation)
}

/// The type of a graph: its open sources with their stored requests.
pub fn type_of(g: &AsGraph) -> RequestType {
    g.sources().map(|(name, mark)| (name.clone(), mark.request.clone())).collect()
}

/// Merge a batch of node pairs, in order. Mode checks are deferred to the
/// end so that intermediate states may transiently exceed source limits.
fn merge_all(mut g: AsGraph, pairs: Vec<(crate::graph::NodeId, crate::graph::NodeId)>, mode: AlgebraMode) -> Result<AsGraph, AlgebraError> {
    let mut rename: Vec<(crate::graph::NodeId, crate::graph::NodeId)> = Vec::new();
    for (mut keep, mut absorb) in pairs {
        for (k, a) in &rename {
            if keep == *a {
                keep = *k;
            }
            if absorb == *a {
                absorb = *k;
            }
        }
        if keep == absorb {
            continue;
        }
        g = g.merge_nodes(keep, absorb, AlgebraMode::AmPlus).map_err(|e| match e {
            GraphError::SourceClash(names, _) => AlgebraError::ModeViolation(GraphError::SourceClash(names, mode)),
            other => AlgebraError::Graph(other),
        })?;
        rename.push((keep, absorb));
    }
    Ok(g)
}

/// APP_x(head, arg): plug the argument's root into the head's x-source.
///
/// The argument's type must equal the request stored at x. Filling x is
/// refused while some other open source of the head still requests x at
/// the top level; discharging that request is what unifies the two slots,
/// so consuming x early would break the pending reentrancy.
pub fn apply(mode: AlgebraMode, head: &AsGraph, x: &SourceName, arg: &AsGraph) -> Result<AsGraph, AlgebraError> {
    check_input(head, mode)?;
    check_input(arg, mode)?;
    let mark = head.source(x).ok_or_else(|| AlgebraError::NoSuchSource(x.clone()))?.clone();
    for (name, other) in head.sources() {
        if name != x && other.request.mentions(x) {
            return Err(AlgebraError::BlockedSource { blocked: x.clone(), requester: name.clone() });
        }
    }
    let actual = type_of(arg);
    if actual != mark.request {
        return Err(AlgebraError::TypeMismatch { at: x.clone(), expected: mark.request, actual });
    }

    let mut out = head.clone();
    let mapping = out.absorb_disjoint(arg);
    out.unmark_source(x);

    let mut pairs = vec![(mark.node, mapping[&arg.root()])];
    // Same-named open sources of head and argument denote the same slot.
    for (name, arg_mark) in arg.sources() {
        if let Some(head_mark) = head.source(name) {
            pairs.push((head_mark.node, mapping[&arg_mark.node]));
        } else {
            out.mark_source(name.clone(), mapping[&arg_mark.node], arg_mark.request.clone())?;
        }
    }
    let mut merged = merge_all(out, pairs, mode)?;
    // A double-marked root hands the root over to the argument's structure;
    // otherwise the head keeps it. merge_nodes already moved the root if
    // the absorbed node carried it, so only the plain case needs fixing.
    if mark.node != head.root() {
        merged.set_root(head.root());
    }
    validated(merged, mode)
}

/// MOD_x(head, modifier): attach the modifier at the head's root.
///
/// The modifier's x-node is merged into the head's root and its own root
/// marker is discarded. Every other open source of the modifier must be
/// open in the head as well (complex modification); a non-empty request at
/// x must equal the head's current type.
pub fn modify(mode: AlgebraMode, head: &AsGraph, x: &SourceName, modifier: &AsGraph) -> Result<AsGraph, AlgebraError> {
    check_input(head, mode)?;
    check_input(modifier, mode)?;
    let mark = modifier.source(x).ok_or_else(|| AlgebraError::NoSuchSource(x.clone()))?.clone();
    if !mark.request.is_empty() {
        let head_type = type_of(head);
        if mark.request != head_type {
            return Err(AlgebraError::TypeMismatch { at: x.clone(), expected: mark.request, actual: head_type });
        }
    }
    for (name, modifier_mark) in modifier.sources() {
        if name == x {
            continue;
        }
        match head.source(name) {
            None => return Err(AlgebraError::IncompatibleModifier(name.clone())),
            Some(head_mark) => {
                if !modifier_mark.request.is_empty() && modifier_mark.request != head_mark.request {
                    return Err(AlgebraError::IncompatibleModifier(name.clone()));
                }
            }
        }
    }

    let mut out = head.clone();
    let mapping = out.absorb_disjoint(modifier);
    let mut pairs = vec![(head.root(), mapping[&mark.node])];
    for (name, modifier_mark) in modifier.sources() {
        if name != x {
            let head_mark = head.source(name).expect("checked above");
            pairs.push((head_mark.node, mapping[&modifier_mark.node]));
        }
    }
    let mut merged = merge_all(out, pairs, mode)?;
    merged.set_root(head.root());
    validated(merged, mode)
}
