//! Acceptance suite. One test per criterion; each prints a PASS line with
//! the numbers it checked (run with `--nocapture` to see them).
//!
//! Criterion 8 needs the licensed SDP 2015 corpora and is gated on the
//! `SDP_DATA_DIR` environment variable; without it, criteria 1-7 stand
//! alone and the test reports itself as skipped.

use std::collections::BTreeSet;
use std::time::Instant;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use rand::SeedableRng;

use amnorm::corpus::{zip_triples, Bank, TreeTriple};
use amnorm::io::{read_am_trees_str, read_sdp_str, write_am_trees_string, write_sdp_string, SdpOptions};
use amnorm::metrics::{graph_counts, graph_f, micro, tree_counts, tree_f, MatchCounts, TreeMatchCounts};
use amnorm::patterns::census;
use amnorm::transforms::{normalize_corpus, preservation_check, TransformConfig};
use amnorm::tree::{AmDependencyTree, EvalOptions};
use amnorm::{apply, fixtures, graph_equals, modify, AlgebraError, AlgebraMode, SourceName};

fn normalized() -> Vec<TreeTriple> {
    let (out, report) = normalize_corpus(&fixtures::source_corpus(), &TransformConfig::default());
    assert!(report.sentence_errors.is_empty());
    out
}

fn no_punct() -> BTreeSet<String> {
    BTreeSet::new()
}

/// Criterion 1: normalize-then-evaluate equals the original evaluation for
/// every fixture sentence and bank, exactly, in under a second.
#[test]
fn criterion_1_graph_preservation() {
    let started = Instant::now();
    let source = fixtures::source_corpus();
    let after = normalized();
    let failures = preservation_check(&source, &after, AlgebraMode::AmPlus);
    assert!(failures.is_empty(), "{failures:?}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "preservation suite took {elapsed:?}");
    println!(
        "criterion 1 PASS: graph preservation exact on {} sentences x 3 banks in {elapsed:?}",
        source.len()
    );
}

/// Criterion 2: the normalized trees for the copula/negation sentence and
/// the coordination sentence match the transcribed expectations edge for
/// edge, and pairwise tree UF across banks is 100.0 on the first.
#[test]
fn criterion_2_expected_tree_reproduction() {
    let got = normalized();
    let want = fixtures::expected_normalized_corpus();
    for sentence in [0, 1] {
        for bank in Bank::ALL {
            let g = got[sentence].tree(bank);
            let w = want[sentence].tree(bank);
            for token in 1..=g.len() {
                assert_eq!(
                    (g.entry(token).head, &g.entry(token).op),
                    (w.entry(token).head, &w.entry(token).op),
                    "sentence {sentence}, bank {}, token {token}",
                    bank.name()
                );
            }
        }
    }
    let s1 = &got[0];
    for (a, b) in [(&s1.dm, &s1.pas), (&s1.dm, &s1.psd), (&s1.pas, &s1.psd)] {
        let scores = tree_f(a, b).unwrap();
        assert_eq!(scores.uf.f, Rational64::new(1, 1), "pairwise UF must be 100.0");
    }
    println!("criterion 2 PASS: normalized trees match transcriptions edge-for-edge; pairwise UF = 100.0");
}

/// Criterion 3: the census over the bundled corpus contains exactly the
/// expected divergent rows, with counts from the documented hand count.
#[test]
fn criterion_3_pattern_census() {
    // Hand count over the four sentences (token: signature):
    //   s1: The <MOD,MOD,O>, cat <BASIC,BASIC,BASIC>, is <O,CAPP2,APP2>,
    //       not <APP1,MOD,MOD>, lazy <APP1,BASIC,BASIC>
    //   s2: Cats <APP1,BASIC,BASIC>, and <O,APP2,APP2>, cute <MOD,MOD,MOD>,
    //       dogs <BASIC,BASIC,BASIC>, are <O,CMOD,O>, playing
    //       <APP1,APP1,APP1>, in <CONN,CONN,O>, the <MOD,MOD,O>,
    //       house <BASIC,BASIC,MOD>, . <O,MOD,O>
    //   s3: Mice <BASIC,BASIC,BASIC>, run <CAPP2,BASIC,BASIC>,
    //       and <O,OTHER,OTHER>, hide <BASIC,BASIC,BASIC>
    //   s4: The <MOD,MOD,O>, roof <BASIC,BASIC,BASIC>, of <O,CONN,O>,
    //       the <MOD,MOD,O>, house <MOD,BASIC,MOD>
    let expected = [
        ("<MOD,MOD,O>", 4),
        ("<O,CMOD,O>", 1),
        ("<O,CAPP2,APP2>", 1),
        ("<APP1,MOD,MOD>", 1),
        ("<O,APP2,APP2>", 1),
        ("<CONN,CONN,O>", 1),
        ("<BASIC,BASIC,MOD>", 1),
    ];
    let report = census(&fixtures::source_corpus()).unwrap();
    assert_eq!(report.total_tokens, 24);
    for (sig, count) in expected {
        let row = report
            .rows
            .iter()
            .find(|r| r.signature.to_string() == sig)
            .unwrap_or_else(|| panic!("census is missing {sig}"));
        assert_eq!(row.count, count, "count for {sig}");
    }
    println!("criterion 3 PASS: census rows match the hand count over 24 tokens");
}

/// Criterion 4: 100 randomized admissible schedules per well-typed fixture
/// tree all evaluate to the same graph.
#[test]
fn criterion_4_schedule_determinism() {
    let mut trees: Vec<AmDependencyTree> = Vec::new();
    for triple in fixtures::source_corpus().iter().chain(&normalized()) {
        for bank in Bank::ALL {
            trees.push(triple.tree(bank).clone());
        }
    }
    let mut checked = 0;
    for tree in &trees {
        let reference = tree.evaluate(AlgebraMode::AmPlus).unwrap();
        for seed in 0..100u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let shuffled = tree
                .evaluate_shuffled(AlgebraMode::AmPlus, &EvalOptions::default(), &mut rng)
                .unwrap();
            assert!(
                graph_equals(&shuffled, &reference, true, &no_punct()).unwrap(),
                "schedule {seed} changed the result on {:?}",
                tree.id
            );
        }
        checked += 1;
    }
    println!("criterion 4 PASS: {checked} trees x 100 schedules, all evaluations equal");
}

/// Criterion 5: every double-marked-root constant the fixes introduce is a
/// mode violation under AM and fine under AM+, both on validation and in
/// the operations that consume it.
#[test]
fn criterion_5_mode_gate() {
    let mut gated = 0;
    for triple in &normalized() {
        for bank in Bank::ALL {
            let tree = triple.tree(bank);
            for token in 1..=tree.len() {
                let Some(st) = &tree.entry(token).supertag else { continue };
                if st.sources_at(st.root()).is_empty() {
                    continue;
                }
                assert!(st.validate(AlgebraMode::AmPlus).is_ok(), "AM+ accepts {:?}/{token}", tree.id);
                assert!(st.validate(AlgebraMode::Am).is_err(), "AM rejects {:?}/{token}", tree.id);
                gated += 1;
            }
        }
    }
    assert!(gated >= 10, "expected the fixes to introduce many AM+ constants, found {gated}");

    // The operations themselves refuse the constants under AM.
    let vacuous_det = amnorm::io::parse_graph("(u <root> <det>)").unwrap();
    let copula = amnorm::io::parse_graph("(u <root> <o[s]>)").unwrap();
    let lazy = amnorm::io::parse_graph("(a / lazy <root> :ARG1(b <s>))").unwrap();
    let cat = amnorm::io::parse_graph("(a / cat <root>)").unwrap();
    let det = SourceName::new("det").unwrap();
    let o = SourceName::new("o").unwrap();
    assert!(matches!(modify(AlgebraMode::Am, &cat, &det, &vacuous_det), Err(AlgebraError::ModeViolation(_))));
    assert!(modify(AlgebraMode::AmPlus, &cat, &det, &vacuous_det).unwrap().structural_eq(&cat));
    assert!(matches!(apply(AlgebraMode::Am, &copula, &o, &lazy), Err(AlgebraError::ModeViolation(_))));
    assert!(apply(AlgebraMode::AmPlus, &copula, &o, &lazy).unwrap().structural_eq(&lazy));
    println!("criterion 5 PASS: {gated} AM+ constants rejected under AM, accepted under AM+");
}

/// Criterion 6: lf <= amf <= uf and directed <= undirected on all fixture
/// pairs, and the hand-computed metric examples reproduce exactly.
#[test]
fn criterion_6_metric_ordering() {
    let mut pairs = 0;
    for corpus in [fixtures::source_corpus(), normalized()] {
        for triple in &corpus {
            for (a, b) in [(&triple.dm, &triple.pas), (&triple.dm, &triple.psd), (&triple.pas, &triple.psd)] {
                let s = tree_f(a, b).unwrap();
                assert!(s.lf.f <= s.amf.f && s.amf.f <= s.uf.f);
                pairs += 1;
            }
        }
    }
    let dm = fixtures::graphs(Bank::Dm);
    let pas = fixtures::graphs(Bank::Pas);
    let psd = fixtures::graphs(Bank::Psd);
    for ((gd, gp), gs) in dm.iter().zip(&pas).zip(&psd) {
        for (x, y) in [(gd, gp), (gd, gs), (gp, gs)] {
            let d = graph_f(x, y, true, true, &no_punct()).unwrap();
            let u = graph_f(x, y, false, true, &no_punct()).unwrap();
            assert!(d.f <= u.f);
        }
    }

    // The frozen hand-computed examples.
    let a: BTreeSet<(usize, usize)> = [(2, 1), (2, 3), (4, 2)].into();
    let b: BTreeSet<(usize, usize)> = [(2, 1), (3, 2), (4, 2)].into();
    let s = amnorm::metrics::directed_counts(&a, &b).score();
    assert_eq!((s.precision, s.recall, s.f), (Rational64::new(2, 3), Rational64::new(2, 3), Rational64::new(2, 3)));
    let m = micro([MatchCounts::new(1, 2, 2), MatchCounts::new(3, 3, 4)]);
    assert_eq!((m.precision, m.recall, m.f), (Rational64::new(4, 5), Rational64::new(2, 3), Rational64::new(8, 11)));
    println!("criterion 6 PASS: metric ordering holds on {pairs} tree pairs; hand examples exact");
}

/// Criterion 7: read -> write -> read identity for .amtree and .sdp on all
/// fixtures, with byte-identical canonical output.
#[test]
fn criterion_7_round_trips() {
    let tree_files = [
        fixtures::SOURCE_DM,
        fixtures::SOURCE_PAS,
        fixtures::SOURCE_PSD,
        fixtures::NORMALIZED_DM,
        fixtures::NORMALIZED_PAS,
        fixtures::NORMALIZED_PSD,
    ];
    for text in tree_files {
        let first = read_am_trees_str(text).unwrap();
        let written = write_am_trees_string(&first);
        let second = read_am_trees_str(&written).unwrap();
        assert_eq!(first.len(), second.len());
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.tokens, b.tokens);
            for token in 1..=a.len() {
                let (ea, eb) = (a.entry(token), b.entry(token));
                assert_eq!((ea.head, &ea.op, &ea.lex_label), (eb.head, &eb.op, &eb.lex_label));
                match (&ea.supertag, &eb.supertag) {
                    (None, None) => {}
                    (Some(x), Some(y)) => assert!(x.structural_eq(y)),
                    _ => panic!("supertag presence changed in round-trip"),
                }
            }
        }
        assert_eq!(write_am_trees_string(&second), written, "canonical output must be a fixpoint");
    }
    let graph_files = [fixtures::GRAPHS_DM, fixtures::GRAPHS_PAS, fixtures::GRAPHS_PSD];
    for text in graph_files {
        let first = read_sdp_str(text, SdpOptions::default()).unwrap();
        let written = write_sdp_string(&first, SdpOptions::default());
        let second = read_sdp_str(&written, SdpOptions::default()).unwrap();
        assert_eq!(first.len(), second.len());
        for (a, b) in first.iter().zip(&second) {
            assert!(graph_equals(a, b, true, &no_punct()).unwrap());
            assert_eq!(a.tokens, b.tokens);
        }
        assert_eq!(write_sdp_string(&second, SdpOptions::default()), written);
    }
    println!("criterion 7 PASS: 6 tree files and 3 graph files round-trip byte-identically");
}

/// Criterion 8, data-gated: with the licensed corpora under SDP_DATA_DIR
/// ({dm,pas,psd}.sdp and {dm,pas,psd}.amtree), reproduce the published
/// corpus-level scores. Skipped without the data; criteria 1-7 then
/// constitute acceptance.
#[test]
fn criterion_8_full_corpora_when_available() {
    let Ok(dir) = std::env::var("SDP_DATA_DIR") else {
        println!("criterion 8 SKIP: SDP_DATA_DIR not set; criteria 1-7 constitute acceptance");
        return;
    };
    let started = Instant::now();
    let dir = std::path::Path::new(&dir);
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    let graphs: Vec<Vec<_>> = ["dm.sdp", "pas.sdp", "psd.sdp"]
        .iter()
        .map(|n| read_sdp_str(&read(n), SdpOptions::default()).expect("graph file parses"))
        .collect();

    // Directed unlabeled graph F, punctuation included.
    let graph_targets = [(0usize, 1usize, 64.2), (0, 2, 26.1), (1, 2, 29.6)];
    for (x, y, target) in graph_targets {
        let counts: Vec<MatchCounts> = graphs[x]
            .iter()
            .zip(&graphs[y])
            .map(|(a, b)| graph_counts(a, b, true, true, &no_punct()).expect("aligned"))
            .collect();
        let f = micro(counts).f.to_f64().unwrap() * 100.0;
        assert!((f - target).abs() <= 0.5, "graph UF {x}-{y}: got {f:.1}, want {target} +/- 0.5");
    }

    let trees: Vec<Vec<_>> = ["dm.amtree", "pas.amtree", "psd.amtree"]
        .iter()
        .map(|n| read_am_trees_str(&read(n)).expect("tree file parses"))
        .collect();
    let triples = zip_triples(trees[0].clone(), trees[1].clone(), trees[2].clone()).expect("aligned");
    let (normalized, _) = normalize_corpus(&triples, &TransformConfig::default());

    let tree_targets = [(Bank::Dm, Bank::Pas, 76.3), (Bank::Dm, Bank::Psd, 78.8), (Bank::Pas, Bank::Psd, 82.0)];
    for (a, b, target) in tree_targets {
        let mut counts = TreeMatchCounts::default();
        for triple in &normalized {
            counts.add(tree_counts(triple.tree(a), triple.tree(b)).expect("aligned"));
        }
        let f = counts.score().uf.f.to_f64().unwrap() * 100.0;
        assert!(
            (f - target).abs() <= 1.5,
            "normalized tree UF {}-{}: got {f:.1}, want {target} +/- 1.5",
            a.name(),
            b.name()
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 600, "full-corpus run took {elapsed:?}");
    println!("criterion 8 PASS: published corpus scores reproduced in {elapsed:?}");
}
