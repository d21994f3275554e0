//! End-to-end runs of the binary against the bundled fixture files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amnorm")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn validate_fixtures_is_clean() {
    for bank in ["dm", "pas", "psd"] {
        let out = run(&["validate", fixture(&format!("source.{bank}.amtree")).to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("all 4 sentences well-typed"));
    }
}

#[test]
fn validate_rejects_am_plus_constants_under_am_mode() {
    let out = run(&["validate", fixture("normalized.dm.amtree").to_str().unwrap(), "--mode", "am"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["validate", fixture("normalized.dm.amtree").to_str().unwrap(), "--mode", "am-plus"]);
    assert!(out.status.success());
}

#[test]
fn eval_reproduces_the_transcribed_graph_files() {
    let dir = tempfile::tempdir().unwrap();
    for bank in ["dm", "pas", "psd"] {
        let out_path = dir.path().join(format!("{bank}.sdp"));
        let out = run(&[
            "eval",
            fixture(&format!("source.{bank}.amtree")).to_str().unwrap(),
            "-o",
            out_path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let written = std::fs::read_to_string(&out_path).unwrap();
        let expected = std::fs::read_to_string(fixture(&format!("graphs.{bank}.sdp"))).unwrap();
        assert_eq!(written, expected, "evaluated {bank} graphs differ from the transcribed file");
    }
}

#[test]
fn compare_trees_with_itself_is_all_hundred() {
    let path = fixture("source.pas.amtree");
    let out = run(&["compare-trees", path.to_str().unwrap(), path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches("100.0").count(), 9, "{text}");
}

#[test]
fn normalize_writes_expected_trees_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.jsonl");
    let stages = dir.path().join("stages.tsv");
    let out = run(&[
        "normalize",
        fixture("source.dm.amtree").to_str().unwrap(),
        fixture("source.pas.amtree").to_str().unwrap(),
        fixture("source.psd.amtree").to_str().unwrap(),
        "-o",
        dir.path().to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
        "--stage-report",
        stages.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("preservation check passed"));

    // Output trees match the expected normalization, scored by the tool.
    for bank in ["dm", "pas", "psd"] {
        let produced = dir.path().join(format!("{bank}.amtree"));
        let expected = fixture(&format!("normalized.{bank}.amtree"));
        let cmp = run(&["compare-trees", produced.to_str().unwrap(), expected.to_str().unwrap()]);
        assert!(cmp.status.success());
        assert_eq!(stdout(&cmp).matches("100.0").count(), 9, "{bank}: {}", stdout(&cmp));
    }

    let jsonl = std::fs::read_to_string(&report).unwrap();
    assert!(jsonl.lines().count() >= 12, "expected one record per trigger match");
    let stage_text = std::fs::read_to_string(&stages).unwrap();
    assert!(stage_text.starts_with("pair\tmetric\tbase\t+DET"));
}

#[test]
fn patterns_census_lists_the_determiner_row() {
    let out = run(&[
        "patterns",
        fixture("source.dm.amtree").to_str().unwrap(),
        fixture("source.pas.amtree").to_str().unwrap(),
        fixture("source.psd.amtree").to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let det_row = text.lines().find(|l| l.starts_with("<MOD,MOD,O>")).expect("determiner row");
    assert!(det_row.contains(" 4 "), "{det_row}");
    assert!(text.contains("total classified tokens: 24"));
}

#[test]
fn compare_graphs_directed_and_undirected() {
    let dm = fixture("graphs.dm.sdp");
    let pas = fixture("graphs.pas.sdp");
    let same = run(&["compare-graphs", dm.to_str().unwrap(), dm.to_str().unwrap()]);
    assert!(same.status.success());
    assert!(stdout(&same).contains("F=100.0"));
    let directed = run(&["compare-graphs", dm.to_str().unwrap(), pas.to_str().unwrap()]);
    let undirected = run(&["compare-graphs", dm.to_str().unwrap(), pas.to_str().unwrap(), "--undirected"]);
    assert!(directed.status.success() && undirected.status.success());
    assert!(stdout(&directed).contains("directed unlabeled F"));
    assert!(stdout(&undirected).contains("undirected unlabeled F"));
}

#[test]
fn io_failures_exit_with_code_two() {
    let out = run(&["validate", "/nonexistent/path.amtree"]);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.amtree");
    std::fs::write(&bad, "1\tcat\tcat\tNN\t_\t_\t0\tAPX_s\n").unwrap();
    let out = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown edge label"));
}

#[test]
fn normalize_output_is_byte_deterministic() {
    let run_into = |dir: &Path| {
        let out = run(&[
            "normalize",
            fixture("source.dm.amtree").to_str().unwrap(),
            fixture("source.pas.amtree").to_str().unwrap(),
            fixture("source.psd.amtree").to_str().unwrap(),
            "-o",
            dir.to_str().unwrap(),
            "--report",
            dir.join("report.jsonl").to_str().unwrap(),
        ]);
        assert!(out.status.success());
    };
    let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    run_into(d1.path());
    run_into(d2.path());
    for name in ["dm.amtree", "pas.amtree", "psd.amtree", "report.jsonl"] {
        let a = std::fs::read(d1.path().join(name)).unwrap();
        let b = std::fs::read(d2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across runs");
    }
}

#[test]
fn worker_count_env_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_amnorm"))
        .env("AM_WORKERS", "2")
        .args(["validate", fixture("source.dm.amtree").to_str().unwrap()])
        .output()
        .expect("binary runs");
    assert!(out.status.success());
}
