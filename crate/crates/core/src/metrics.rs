//! Structural similarity scores between trees and between graphs.
//!
//! Tree scores compare edge sets at three levels of strictness: UF on bare
//! (head, dependent) pairs, A/M F additionally on the operation kind with
//! source names ignored, LF on the full edge label. The ROOT attachment
//! counts as an edge from position 0 so that moved roots are penalized.
//! All scores are exact rationals, rounded only when rendered.

use std::collections::BTreeSet;

use num_rational::Rational64;
use num_traits::Zero;

use crate::graph::GraphError;
use crate::sdp::SdpGraph;
use crate::tree::{AmDependencyTree, EdgeOp};

/// Matched/predicted/gold counts; the unit that merges across sentences.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MatchCounts {
    pub matched: i64,
    pub predicted: i64,
    pub gold: i64,
}

impl MatchCounts {
    pub fn new(matched: i64, predicted: i64, gold: i64) -> Self {
        MatchCounts { matched, predicted, gold }
    }

    pub fn add(&mut self, other: MatchCounts) {
        self.matched += other.matched;
        self.predicted += other.predicted;
        self.gold += other.gold;
    }

    pub fn score(&self) -> FScore {
        let ratio = |num: i64, den: i64| if den == 0 { Rational64::zero() } else { Rational64::new(num, den) };
        let p = ratio(self.matched, self.predicted);
        let r = ratio(self.matched, self.gold);
        let f = if self.predicted + self.gold == 0 {
            Rational64::zero()
        } else {
            Rational64::new(2 * self.matched, self.predicted + self.gold)
        };
        FScore { precision: p, recall: r, f, degenerate: self.predicted == 0 && self.gold == 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FScore {
    pub precision: Rational64,
    pub recall: Rational64,
    pub f: Rational64,
    /// True when both sides were empty; f is 0 by convention then.
    pub degenerate: bool,
}

/// Render a rational in `[0,1]` as a percentage with one decimal, the
/// layout scores are reported in.
pub fn percent(value: Rational64) -> String {
    let scaled = value * Rational64::new(1000, 1);
    let rounded = scaled.round().to_integer();
    format!("{}.{}", rounded / 10, (rounded % 10).abs())
}

impl std::fmt::Display for FScore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "P={} R={} F={}", percent(self.precision), percent(self.recall), percent(self.f))?;
        if self.degenerate {
            f.write_str(" (degenerate: no edges on either side)")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FScoreTriple {
    pub uf: FScore,
    pub amf: FScore,
    pub lf: FScore,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TreeMatchCounts {
    pub uf: MatchCounts,
    pub amf: MatchCounts,
    pub lf: MatchCounts,
}

impl TreeMatchCounts {
    pub fn add(&mut self, other: TreeMatchCounts) {
        self.uf.add(other.uf);
        self.amf.add(other.amf);
        self.lf.add(other.lf);
    }

    pub fn score(&self) -> FScoreTriple {
        FScoreTriple { uf: self.uf.score(), amf: self.amf.score(), lf: self.lf.score() }
    }
}

/// Intersection counts of two sets, `a` as prediction, `b` as gold.
pub fn directed_counts<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> MatchCounts {
    MatchCounts::new(a.intersection(b).count() as i64, a.len() as i64, b.len() as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum OpKind {
    App,
    Mod,
    Root,
}

fn edge_items(tree: &AmDependencyTree) -> Vec<(usize, usize, OpKind, String)> {
    tree.entries
        .iter()
        .enumerate()
        .filter_map(|(i, e)| {
            let dep = i + 1;
            let kind = match &e.op {
                EdgeOp::App(_) => OpKind::App,
                EdgeOp::Mod(_) => OpKind::Mod,
                EdgeOp::Root => OpKind::Root,
                EdgeOp::Ignore => return None,
            };
            Some((e.head, dep, kind, e.op.to_string()))
        })
        .collect()
}

fn check_tree_tokens(a: &AmDependencyTree, b: &AmDependencyTree) -> Result<(), GraphError> {
    if a.len() != b.len() {
        return Err(GraphError::TokenMismatch(a.len().min(b.len()) + 1));
    }
    for (ta, tb) in a.tokens.iter().zip(&b.tokens) {
        if ta.form != tb.form {
            return Err(GraphError::TokenMismatch(ta.index));
        }
    }
    Ok(())
}

pub fn tree_counts(a: &AmDependencyTree, b: &AmDependencyTree) -> Result<TreeMatchCounts, GraphError> {
    check_tree_tokens(a, b)?;
    let ea = edge_items(a);
    let eb = edge_items(b);
    let project = |items: &[(usize, usize, OpKind, String)]| {
        let uf: BTreeSet<(usize, usize)> = items.iter().map(|(h, d, _, _)| (*h, *d)).collect();
        let amf: BTreeSet<(usize, usize, OpKind)> = items.iter().map(|(h, d, k, _)| (*h, *d, *k)).collect();
        let lf: BTreeSet<(usize, usize, String)> = items.iter().map(|(h, d, _, l)| (*h, *d, l.clone())).collect();
        (uf, amf, lf)
    };
    let (ua, aa, la) = project(&ea);
    let (ub, ab, lb) = project(&eb);
    Ok(TreeMatchCounts {
        uf: directed_counts(&ua, &ub),
        amf: directed_counts(&aa, &ab),
        lf: directed_counts(&la, &lb),
    })
}

/// UF, A/M F and LF between two trees; `a` is scored against gold `b`.
pub fn tree_f(a: &AmDependencyTree, b: &AmDependencyTree) -> Result<FScoreTriple, GraphError> {
    Ok(tree_counts(a, b)?.score())
}

pub fn graph_counts(
    a: &SdpGraph,
    b: &SdpGraph,
    directed: bool,
    include_punct: bool,
    punct_pos: &BTreeSet<String>,
) -> Result<MatchCounts, GraphError> {
    if a.tokens.len() != b.tokens.len() || a.tokens.iter().zip(&b.tokens).any(|(x, y)| x.form != y.form) {
        return Err(GraphError::TokenMismatch(a.tokens.len().min(b.tokens.len()) + 1));
    }
    let ea = a.scored_edges(include_punct, punct_pos);
    let eb = b.scored_edges(include_punct, punct_pos);
    if directed {
        let pa: BTreeSet<(usize, usize)> = ea.iter().map(|e| (e.head, e.dep)).collect();
        let pb: BTreeSet<(usize, usize)> = eb.iter().map(|e| (e.head, e.dep)).collect();
        Ok(directed_counts(&pa, &pb))
    } else {
        let und = |edges: &BTreeSet<crate::sdp::SdpEdge>| -> BTreeSet<(usize, usize)> {
            edges.iter().map(|e| (e.head.min(e.dep), e.head.max(e.dep))).collect()
        };
        Ok(directed_counts(&und(&ea), &und(&eb)))
    }
}

/// Unlabeled graph F-score, directed or undirected.
pub fn graph_f(
    a: &SdpGraph,
    b: &SdpGraph,
    directed: bool,
    include_punct: bool,
    punct_pos: &BTreeSet<String>,
) -> Result<FScore, GraphError> {
    Ok(graph_counts(a, b, directed, include_punct, punct_pos)?.score())
}

/// Micro average: sum the per-sentence counts, then score once.
pub fn micro<I: IntoIterator<Item = MatchCounts>>(counts: I) -> FScore {
    let mut total = MatchCounts::default();
    for c in counts {
        total.add(c);
    }
    total.score()
}

/// Fraction of lexical as-graphs that differ between two aligned corpora.
/// A token counts when it carries a supertag on either side; it changed
/// when the supertag appeared, vanished, or differs structurally.
pub fn lexicon_change_rate(
    before: &[AmDependencyTree],
    after: &[AmDependencyTree],
) -> Result<Rational64, GraphError> {
    if before.len() != after.len() {
        return Err(GraphError::TokenMismatch(0));
    }
    let mut considered = 0i64;
    let mut changed = 0i64;
    for (a, b) in before.iter().zip(after) {
        check_tree_tokens(a, b)?;
        for token in 1..=a.len() {
            let sa = a.entry(token).supertag.as_ref();
            let sb = b.entry(token).supertag.as_ref();
            match (sa, sb) {
                (None, None) => {}
                (Some(x), Some(y)) => {
                    considered += 1;
                    if !x.structural_eq(y) {
                        changed += 1;
                    }
                }
                _ => {
                    considered += 1;
                    changed += 1;
                }
            }
        }
    }
    if considered == 0 {
        return Ok(Rational64::zero());
    }
    Ok(Rational64::new(changed, considered))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraMode;
    use crate::fixtures::{self, Bank};

    #[test]
    fn identical_trees_score_one() {
        for triple in fixtures::source_corpus() {
            let scores = tree_f(&triple.pas, &triple.pas).unwrap();
            for s in [scores.uf, scores.amf, scores.lf] {
                assert_eq!(s.f, Rational64::new(1, 1));
            }
        }
    }

    #[test]
    fn directed_set_example() {
        // Hand arithmetic: intersection {(2,1),(4,2)} of three edges each.
        let a: BTreeSet<(usize, usize)> = [(2, 1), (2, 3), (4, 2)].into();
        let b: BTreeSet<(usize, usize)> = [(2, 1), (3, 2), (4, 2)].into();
        let s = directed_counts(&a, &b).score();
        assert_eq!(s.precision, Rational64::new(2, 3));
        assert_eq!(s.recall, Rational64::new(2, 3));
        assert_eq!(s.f, Rational64::new(2, 3));
    }

    #[test]
    fn graph_direction_example() {
        use crate::sdp::{SdpEdge, SdpGraph, Token};
        let tokens = vec![Token::new(1, "a", "a", "X"), Token::new(2, "b", "b", "X"), Token::new(3, "c", "c", "X")];
        let mut g1 = SdpGraph::new(tokens.clone());
        g1.nodes.extend(1..=3);
        g1.edges.insert(SdpEdge::new(1, 2, "e"));
        g1.edges.insert(SdpEdge::new(2, 3, "e"));
        let mut g2 = SdpGraph::new(tokens);
        g2.nodes.extend(1..=3);
        g2.edges.insert(SdpEdge::new(2, 1, "e"));
        g2.edges.insert(SdpEdge::new(2, 3, "e"));
        let directed = graph_f(&g1, &g2, true, true, &BTreeSet::new()).unwrap();
        assert_eq!(directed.f, Rational64::new(1, 2));
        let undirected = graph_f(&g1, &g2, false, true, &BTreeSet::new()).unwrap();
        assert_eq!(undirected.f, Rational64::new(1, 1));
    }

    #[test]
    fn micro_average_example() {
        let s = micro([MatchCounts::new(1, 2, 2), MatchCounts::new(3, 3, 4)]);
        assert_eq!(s.precision, Rational64::new(4, 5));
        assert_eq!(s.recall, Rational64::new(4, 6));
        assert_eq!(s.f, Rational64::new(8, 11));
        assert!(!s.degenerate);
        let single = micro([MatchCounts::new(1, 2, 2)]);
        assert_eq!(single.f, MatchCounts::new(1, 2, 2).score().f);
    }

    #[test]
    fn degenerate_case_is_flagged() {
        let s = micro([MatchCounts::new(0, 0, 0)]);
        assert!(s.degenerate);
        assert_eq!(s.f, Rational64::zero());
    }

    #[test]
    fn lf_at_most_amf_at_most_uf_on_all_fixture_pairs() {
        let corpus = fixtures::source_corpus();
        for triple in &corpus {
            for (a, b) in
                [(&triple.dm, &triple.pas), (&triple.dm, &triple.psd), (&triple.pas, &triple.psd)]
            {
                let s = tree_f(a, b).unwrap();
                assert!(s.lf.f <= s.amf.f, "lf <= amf on {:?}", triple.id());
                assert!(s.amf.f <= s.uf.f, "amf <= uf on {:?}", triple.id());
            }
        }
    }

    #[test]
    fn directed_at_most_undirected_on_fixture_graphs() {
        let dm = fixtures::graphs(Bank::Dm);
        let pas = fixtures::graphs(Bank::Pas);
        let psd = fixtures::graphs(Bank::Psd);
        for i in 0..dm.len() {
            for (a, b) in [(&dm[i], &pas[i]), (&dm[i], &psd[i]), (&pas[i], &psd[i])] {
                let d = graph_f(a, b, true, true, &BTreeSet::new()).unwrap();
                let u = graph_f(a, b, false, true, &BTreeSet::new()).unwrap();
                assert!(d.f <= u.f);
            }
        }
    }

    #[test]
    fn f_is_symmetric_and_p_r_swap() {
        let corpus = fixtures::source_corpus();
        for triple in &corpus {
            let ab = tree_f(&triple.dm, &triple.pas).unwrap();
            let ba = tree_f(&triple.pas, &triple.dm).unwrap();
            assert_eq!(ab.uf.f, ba.uf.f);
            assert_eq!(ab.uf.precision, ba.uf.recall);
            assert_eq!(ab.uf.recall, ba.uf.precision);
        }
    }

    #[test]
    fn lexicon_change_rate_examples() {
        let trees = fixtures::source_trees(Bank::Pas);
        assert_eq!(lexicon_change_rate(&trees, &trees).unwrap(), Rational64::zero());

        // One of four supertagged tokens changes: 25%.
        let before = fixtures::source_trees(Bank::Psd);
        let mut after = before.clone();
        let tree = &mut after[2];
        tree.entry_mut(2).supertag = Some(crate::io::parse_graph("(x / --LEX-- <root> :EXTRA(y <s>))").unwrap());
        let rate = lexicon_change_rate(&before[2..3], &after[2..3]).unwrap();
        assert_eq!(rate, Rational64::new(1, 4));
    }

    #[test]
    fn evaluated_fixture_graphs_match_transcribed_files() {
        for bank in Bank::ALL {
            let trees = fixtures::source_trees(bank);
            let expected = fixtures::graphs(bank);
            assert_eq!(trees.len(), expected.len());
            for (tree, gold) in trees.iter().zip(&expected) {
                let eval = tree.evaluate(AlgebraMode::AmPlus).unwrap();
                assert!(
                    crate::sdp::graph_equals(&eval, gold, true, &BTreeSet::new()).unwrap(),
                    "{} {:?}: evaluated {:?} vs transcribed {:?}",
                    bank.name(),
                    tree.id,
                    eval.edges,
                    gold.edges
                );
            }
        }
    }

    #[test]
    fn graph_equality_is_reflexive_and_symmetric_on_fixtures() {
        for include_punct in [true, false] {
            for bank in Bank::ALL {
                for g in fixtures::graphs(bank) {
                    assert!(crate::sdp::graph_equals(&g, &g, include_punct, &BTreeSet::new()).unwrap());
                }
            }
            let dm = fixtures::graphs(Bank::Dm);
            let pas = fixtures::graphs(Bank::Pas);
            for (a, b) in dm.iter().zip(&pas) {
                let ab = crate::sdp::graph_equals(a, b, include_punct, &BTreeSet::new()).unwrap();
                let ba = crate::sdp::graph_equals(b, a, include_punct, &BTreeSet::new()).unwrap();
                assert_eq!(ab, ba);
            }
        }
    }

    #[test]
    fn different_banks_never_compare_equal() {
        let dm = fixtures::graphs(Bank::Dm);
        let pas = fixtures::graphs(Bank::Pas);
        for (a, b) in dm.iter().zip(&pas) {
            assert!(!crate::sdp::graph_equals(a, b, true, &BTreeSet::new()).unwrap());
        }
    }

    #[test]
    fn percengage_rendering_rounds_to_one_decimal() {
        assert_eq!(percent(Rational64::new(763, 1000)), "76.3");
        assert_eq!(percent(Rational64::new(1, 1)), "100.0");
        assert_eq!(percent(Rational64::new(2, 3)), "66.7");
        assert_eq!(percent(Rational64::zero()), "0.0");
    }
}
