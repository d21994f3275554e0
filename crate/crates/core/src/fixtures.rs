//! A small bundled corpus: four hand-checked sentences with aligned DM,
//! PAS and PSD trees, the graphs they evaluate to, and the trees the
//! normalization pipeline is expected to produce. Used by the test suites
//! and benchmarks; handy as example input for the CLI.

use crate::corpus::{zip_triples, TreeTriple};
use crate::io::{read_am_trees_str, read_sdp_str, SdpOptions};
use crate::sdp::SdpGraph;
use crate::tree::AmDependencyTree;

pub use crate::corpus::Bank;

pub const SOURCE_DM: &str = include_str!("../fixtures/source.dm.amtree");
pub const SOURCE_PAS: &str = include_str!("../fixtures/source.pas.amtree");
pub const SOURCE_PSD: &str = include_str!("../fixtures/source.psd.amtree");
pub const NORMALIZED_DM: &str = include_str!("../fixtures/normalized.dm.amtree");
pub const NORMALIZED_PAS: &str = include_str!("../fixtures/normalized.pas.amtree");
pub const NORMALIZED_PSD: &str = include_str!("../fixtures/normalized.psd.amtree");
pub const GRAPHS_DM: &str = include_str!("../fixtures/graphs.dm.sdp");
pub const GRAPHS_PAS: &str = include_str!("../fixtures/graphs.pas.sdp");
pub const GRAPHS_PSD: &str = include_str!("../fixtures/graphs.psd.sdp");

fn trees(text: &str) -> Vec<AmDependencyTree> {
    read_am_trees_str(text).expect("bundled fixture parses")
}

pub fn source_trees(bank: Bank) -> Vec<AmDependencyTree> {
    match bank {
        Bank::Dm => trees(SOURCE_DM),
        Bank::Pas => trees(SOURCE_PAS),
        Bank::Psd => trees(SOURCE_PSD),
    }
}

pub fn normalized_trees(bank: Bank) -> Vec<AmDependencyTree> {
    match bank {
        Bank::Dm => trees(NORMALIZED_DM),
        Bank::Pas => trees(NORMALIZED_PAS),
        Bank::Psd => trees(NORMALIZED_PSD),
    }
}

pub fn graphs(bank: Bank) -> Vec<SdpGraph> {
    let text = match bank {
        Bank::Dm => GRAPHS_DM,
        Bank::Pas => GRAPHS_PAS,
        Bank::Psd => GRAPHS_PSD,
    };
    read_sdp_str(text, SdpOptions::default()).expect("bundled fixture parses")
}

/// The aligned corpus of source trees.
pub fn source_corpus() -> Vec<TreeTriple> {
    zip_triples(source_trees(Bank::Dm), source_trees(Bank::Pas), source_trees(Bank::Psd))
        .expect("bundled fixtures are aligned")
}

/// What the normalization pipeline is expected to produce.
pub fn expected_normalized_corpus() -> Vec<TreeTriple> {
    zip_triples(normalized_trees(Bank::Dm), normalized_trees(Bank::Pas), normalized_trees(Bank::Psd))
        .expect("bundled fixtures are aligned")
}
