//! Local patterns and cross-graphbank pattern signatures.
//!
//! Every token of an AM dependency tree falls into exactly one of nine
//! classes, read off its incoming edge kind, its number of outgoing APP
//! edges, and its supertag's sources. Source names and outgoing MOD edges
//! never matter. The signature of a token is the triple of its patterns in
//! the DM, PAS and PSD trees, always in that order.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::corpus::{check_alignment, TreeTriple};
use crate::graph::GraphError;
use crate::tree::{AmDependencyTree, EdgeOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LocalPattern {
    O,
    Mod,
    Cmod,
    App1,
    App2,
    Capp2,
    Conn,
    Basic,
    Other,
}

impl fmt::Display for LocalPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            LocalPattern::O => "O",
            LocalPattern::Mod => "MOD",
            LocalPattern::Cmod => "CMOD",
            LocalPattern::App1 => "APP1",
            LocalPattern::App2 => "APP2",
            LocalPattern::Capp2 => "CAPP2",
            LocalPattern::Conn => "CONN",
            LocalPattern::Basic => "BASIC",
            LocalPattern::Other => "OTHER",
        };
        f.write_str(name)
    }
}

/// Why a token fell into the OTHER bucket; kept for triage reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OtherReason {
    ThreeOrMoreArgs,
    RequestBearingApp1,
    RequestBearingConn,
    ModifierWithArgs,
}

/// The ⟨DM, PAS, PSD⟩ triple for one aligned token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PatternSignature {
    pub dm: LocalPattern,
    pub pas: LocalPattern,
    pub psd: LocalPattern,
}

impl PatternSignature {
    pub fn new(dm: LocalPattern, pas: LocalPattern, psd: LocalPattern) -> Self {
        PatternSignature { dm, pas, psd }
    }

    /// All three banks use the same pattern.
    pub fn is_aligned(&self) -> bool {
        self.dm == self.pas && self.pas == self.psd
    }
}

impl fmt::Display for PatternSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{},{},{}>", self.dm, self.pas, self.psd)
    }
}

/// Classify token `i` with the reason when the answer is OTHER.
pub fn classify_detailed(tree: &AmDependencyTree, token: usize) -> (LocalPattern, Option<OtherReason>) {
    let entry = tree.entry(token);
    if entry.op.is_ignore() {
        return (LocalPattern::O, None);
    }
    let app_children =
        tree.children_of(token).into_iter().filter(|c| tree.entry(*c).op.is_app()).count();
    let st = entry.supertag.as_ref().expect("non-ignored tokens carry supertags");
    let source_count = st.source_count();
    let request_bearing = st.sources().any(|(_, m)| !m.request.is_empty());
    match entry.op {
        EdgeOp::Mod(_) => match app_children {
            0 => {
                if source_count > 1 || request_bearing {
                    (LocalPattern::Cmod, None)
                } else {
                    (LocalPattern::Mod, None)
                }
            }
            1 if !request_bearing => (LocalPattern::Conn, None),
            1 => (LocalPattern::Other, Some(OtherReason::RequestBearingConn)),
            _ => (LocalPattern::Other, Some(OtherReason::ModifierWithArgs)),
        },
        EdgeOp::App(_) | EdgeOp::Root => match app_children {
            0 => (LocalPattern::Basic, None),
            1 if !request_bearing => (LocalPattern::App1, None),
            1 => (LocalPattern::Other, Some(OtherReason::RequestBearingApp1)),
            2 if request_bearing => (LocalPattern::Capp2, None),
            2 => (LocalPattern::App2, None),
            _ => (LocalPattern::Other, Some(OtherReason::ThreeOrMoreArgs)),
        },
        EdgeOp::Ignore => unreachable!("handled above"),
    }
}

pub fn classify(tree: &AmDependencyTree, token: usize) -> LocalPattern {
    classify_detailed(tree, token).0
}

/// The ⟨DM,PAS,PSD⟩ signature of a token across three aligned trees.
pub fn signature(
    dm: &AmDependencyTree,
    pas: &AmDependencyTree,
    psd: &AmDependencyTree,
    token: usize,
) -> Result<PatternSignature, GraphError> {
    check_alignment(dm, pas, psd)?;
    Ok(PatternSignature::new(classify(dm, token), classify(pas, token), classify(psd, token)))
}

#[derive(Debug, Clone, Serialize)]
pub struct CensusRow {
    #[serde(serialize_with = "serialize_signature")]
    pub signature: PatternSignature,
    pub count: usize,
    /// Percentage of all classified tokens, in tenths of a percent.
    pub per_mille: u64,
    pub top_pos: Vec<(String, usize)>,
    pub top_lemmas: Vec<(String, usize)>,
}

fn serialize_signature<S: serde::Serializer>(sig: &PatternSignature, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&sig.to_string())
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CensusReport {
    pub total_tokens: usize,
    pub rows: Vec<CensusRow>,
}

impl CensusReport {
    pub fn row(&self, sig: &PatternSignature) -> Option<&CensusRow> {
        self.rows.iter().find(|r| r.signature == *sig)
    }

    pub fn aligned_tokens(&self) -> usize {
        self.rows.iter().filter(|r| r.signature.is_aligned()).map(|r| r.count).sum()
    }
}

#[derive(Debug, Default, Clone)]
pub struct CensusTally {
    total: usize,
    counts: BTreeMap<PatternSignature, usize>,
    pos: BTreeMap<PatternSignature, BTreeMap<String, usize>>,
    lemmas: BTreeMap<PatternSignature, BTreeMap<String, usize>>,
}

impl CensusTally {
    pub fn add_sentence(&mut self, triple: &TreeTriple) -> Result<(), GraphError> {
        check_alignment(&triple.dm, &triple.pas, &triple.psd)?;
        for token in 1..=triple.dm.len() {
            let sig = PatternSignature::new(
                classify(&triple.dm, token),
                classify(&triple.pas, token),
                classify(&triple.psd, token),
            );
            self.total += 1;
            *self.counts.entry(sig).or_default() += 1;
            let tok = triple.dm.token(token);
            *self.pos.entry(sig).or_default().entry(tok.pos.clone()).or_default() += 1;
            *self.lemmas.entry(sig).or_default().entry(tok.lemma.clone()).or_default() += 1;
        }
        Ok(())
    }

    /// Tallies merge associatively, so per-sentence counts can be reduced
    /// in any order.
    pub fn merge(mut self, other: CensusTally) -> CensusTally {
        self.total += other.total;
        for (sig, n) in other.counts {
            *self.counts.entry(sig).or_default() += n;
        }
        for (sig, map) in other.pos {
            let entry = self.pos.entry(sig).or_default();
            for (k, v) in map {
                *entry.entry(k).or_default() += v;
            }
        }
        for (sig, map) in other.lemmas {
            let entry = self.lemmas.entry(sig).or_default();
            for (k, v) in map {
                *entry.entry(k).or_default() += v;
            }
        }
        self
    }

    pub fn into_report(self) -> CensusReport {
        let mut rows: Vec<CensusRow> = self
            .counts
            .iter()
            .map(|(sig, count)| CensusRow {
                signature: *sig,
                count: *count,
                per_mille: if self.total == 0 { 0 } else { (*count as u64 * 1000 + (self.total as u64 / 2)) / self.total as u64 },
                top_pos: top_entries(self.pos.get(sig)),
                top_lemmas: top_entries(self.lemmas.get(sig)),
            })
            .collect();
        rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.signature.cmp(&b.signature)));
        CensusReport { total_tokens: self.total, rows }
    }
}

fn top_entries(map: Option<&BTreeMap<String, usize>>) -> Vec<(String, usize)> {
    let Some(map) = map else { return Vec::new() };
    let mut entries: Vec<(String, usize)> = map.iter().map(|(k, v)| (k.clone(), *v)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(3);
    entries
}

/// Frequency census over a corpus of aligned tree triples.
pub fn census(corpus: &[TreeTriple]) -> Result<CensusReport, GraphError> {
    let tally = crate::corpus::try_map_reduce(
        corpus,
        |triple| {
            let mut t = CensusTally::default();
            t.add_sentence(triple)?;
            Ok(t)
        },
        CensusTally::default,
        CensusTally::merge,
    )?;
    Ok(tally.into_report())
}
