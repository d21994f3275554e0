//! Graph algebra, AM dependency trees, and cross-graphbank normalization
//! for the DM, PAS and PSD semantic dependency banks.
//!
//! The pieces, bottom up:
//!
//! - [`graph`]: annotated s-graphs (node-labeled fragments with a root
//!   marker and named source slots) and bilexical sentence graphs.
//! - [`algebra`]: the Apply and Modify operations with their typing rules,
//!   in two modes; the AM+ mode additionally allows one source on a root
//!   node, which makes semantically vacuous heads expressible.
//! - [`tree`]: AM dependency trees over tokens, evaluating deterministically
//!   to sentence graphs.
//! - [`patterns`]: the nine-way local pattern classification per token and
//!   the ⟨DM,PAS,PSD⟩ signature census.
//! - [`transforms`]: seven graph-preserving tree rewrites (determiners,
//!   punctuation, auxiliaries, prepositions, coordination, copula,
//!   negation) applied in a fixed order.
//! - [`metrics`]: exact-rational structural similarity scores.
//! - [`io`]: the `.amtree` and `.sdp` file formats and the as-graph
//!   literal syntax.
//!
//! Corpus-level entry points process sentences in parallel when the
//! `parallel` feature (on by default) is enabled, and sequentially
//! otherwise; `*_seq` variants are always sequential.
//!
//! ```
//! use amnorm::io::parse_graph;
//! use amnorm::{apply, type_of, AlgebraMode};
//!
//! // A copula fragment whose object slot requests an argument that still
//! // has an open subject; filling it shares the subject slot.
//! let be = parse_graph("(b / be <root> :ARG1(s <s>) :ARG2(o <o[s]>))")?;
//! let lazy = parse_graph("(l / lazy <root> :ARG1(s <s>))")?;
//! let partial = apply(AlgebraMode::Am, &be, &"o".parse()?, &lazy)?;
//! assert_eq!(type_of(&partial).to_string(), "s");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod algebra;
pub mod corpus;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod patterns;
pub mod sdp;
pub mod transforms;
pub mod tree;

pub use algebra::{apply, modify, type_of, AlgebraError, AlgebraMode};
pub use corpus::{evaluate_corpus, evaluate_corpus_seq, zip_triples, Bank, TreeTriple};
pub use graph::{AsGraph, GraphError, RequestType, SourceName};
pub use patterns::{census, classify, signature, LocalPattern, PatternSignature};
pub use sdp::{graph_equals, SdpEdge, SdpGraph, Token};
pub use transforms::{
    normalize_corpus, normalize_corpus_seq, preservation_check, stage_report, RuleId, TransformConfig,
    TransformReport,
};
pub use tree::{AmDependencyTree, EdgeOp, EvalError, EvalOptions, TreeEntry, TreeError};
