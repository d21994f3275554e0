//! Corpus-level plumbing: aligned tree triples and the map/reduce helpers
//! the corpus operations run on. With the `parallel` feature (default),
//! sentences are processed on the rayon pool; without it, the same entry
//! points run sequentially. The `_seq` variants are always sequential and
//! exist so the benchmarks can compare both paths in one build.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::algebra::AlgebraMode;
use crate::graph::GraphError;
use crate::sdp::SdpGraph;
use crate::tree::{AmDependencyTree, EvalError};

/// One of the three graphbanks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub enum Bank {
    Dm,
    Pas,
    Psd,
}

impl Bank {
    pub const ALL: [Bank; 3] = [Bank::Dm, Bank::Pas, Bank::Psd];

    pub fn name(&self) -> &'static str {
        match self {
            Bank::Dm => "DM",
            Bank::Pas => "PAS",
            Bank::Psd => "PSD",
        }
    }
}

impl std::fmt::Display for Bank {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The three banks' trees for one sentence, token-aligned by form.
#[derive(Debug, Clone)]
pub struct TreeTriple {
    pub dm: AmDependencyTree,
    pub pas: AmDependencyTree,
    pub psd: AmDependencyTree,
}

impl TreeTriple {
    pub fn new(dm: AmDependencyTree, pas: AmDependencyTree, psd: AmDependencyTree) -> Result<Self, GraphError> {
        check_alignment(&dm, &pas, &psd)?;
        Ok(TreeTriple { dm, pas, psd })
    }

    pub fn len(&self) -> usize {
        self.dm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dm.is_empty()
    }

    pub fn id(&self) -> Option<&str> {
        self.dm.id.as_deref()
    }

    pub fn tree(&self, bank: Bank) -> &AmDependencyTree {
        match bank {
            Bank::Dm => &self.dm,
            Bank::Pas => &self.pas,
            Bank::Psd => &self.psd,
        }
    }

    pub fn tree_mut(&mut self, bank: Bank) -> &mut AmDependencyTree {
        match bank {
            Bank::Dm => &mut self.dm,
            Bank::Pas => &mut self.pas,
            Bank::Psd => &mut self.psd,
        }
    }
}

/// Trees over the same sentence must agree on the token forms. Lemmas are
/// bank-specific (PSD writes `#Neg` for "not") and POS is shared in
/// practice, so forms are the alignment key.
pub fn check_alignment(
    dm: &AmDependencyTree,
    pas: &AmDependencyTree,
    psd: &AmDependencyTree,
) -> Result<(), GraphError> {
    for other in [pas, psd] {
        if dm.len() != other.len() {
            return Err(GraphError::TokenMismatch(dm.len().min(other.len()) + 1));
        }
        for (a, b) in dm.tokens.iter().zip(&other.tokens) {
            if a.form != b.form {
                return Err(GraphError::TokenMismatch(a.index));
            }
        }
    }
    Ok(())
}

/// Zip three equally long tree files into aligned triples.
pub fn zip_triples(
    dm: Vec<AmDependencyTree>,
    pas: Vec<AmDependencyTree>,
    psd: Vec<AmDependencyTree>,
) -> Result<Vec<TreeTriple>, GraphError> {
    if dm.len() != pas.len() || dm.len() != psd.len() {
        return Err(GraphError::TokenMismatch(0));
    }
    dm.into_iter()
        .zip(pas)
        .zip(psd)
        .map(|((dm, pas), psd)| TreeTriple::new(dm, pas, psd))
        .collect()
}

/// Size the worker pool used by the corpus entry points. A no-op without
/// the `parallel` feature; fails if the pool is already initialized.
#[cfg(feature = "parallel")]
pub fn configure_workers(threads: usize) -> Result<(), String> {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().map_err(|e| e.to_string())
}

#[cfg(not(feature = "parallel"))]
pub fn configure_workers(_threads: usize) -> Result<(), String> {
    Ok(())
}

pub(crate) fn map_vec<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Fallible map followed by an associative reduce, in input order.
pub(crate) fn try_map_reduce<T, A, E, F, I, R>(items: &[T], f: F, init: I, reduce: R) -> Result<A, E>
where
    T: Sync,
    A: Send,
    E: Send,
    F: Fn(&T) -> Result<A, E> + Sync + Send,
    I: Fn() -> A,
    R: Fn(A, A) -> A,
{
    let mapped: Vec<Result<A, E>> = map_vec(items, f);
    let mut acc = init();
    for item in mapped {
        acc = reduce(acc, item?);
    }
    Ok(acc)
}

/// Evaluate every tree of a corpus, in input order.
pub fn evaluate_corpus(trees: &[AmDependencyTree], mode: AlgebraMode) -> Vec<Result<SdpGraph, EvalError>> {
    map_vec(trees, |t| t.evaluate(mode))
}

/// [`evaluate_corpus`] with evaluation options applied per sentence.
pub fn evaluate_corpus_with(
    trees: &[AmDependencyTree],
    mode: AlgebraMode,
    options: &crate::tree::EvalOptions,
) -> Vec<Result<SdpGraph, EvalError>> {
    map_vec(trees, |t| t.evaluate_with(mode, options, &mut |_| ()))
}

/// Always-sequential twin of [`evaluate_corpus`].
pub fn evaluate_corpus_seq(trees: &[AmDependencyTree], mode: AlgebraMode) -> Vec<Result<SdpGraph, EvalError>> {
    trees.iter().map(|t| t.evaluate(mode)).collect()
}
