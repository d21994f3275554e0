//! Batch commands over `.amtree` and `.sdp` files: validate and evaluate
//! trees, census pattern signatures across the three banks, run the
//! normalization pipeline, and score tree/graph similarity.
//!
//! Exit codes: 0 success, 1 validation failure, 2 I/O or format error.
//! `AM_WORKERS` caps the worker pool for corpus-parallel commands.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use amnorm::corpus::{configure_workers, evaluate_corpus_with, zip_triples, Bank, TreeTriple};
use amnorm::io::{read_am_trees_str, read_sdp_str, write_am_trees_string, write_sdp_string, SdpOptions};
use amnorm::metrics::{graph_counts, micro, percent, tree_counts, FScore, TreeMatchCounts};
use amnorm::patterns::{census, CensusReport};
use amnorm::sdp::SdpGraph;
use amnorm::transforms::{
    normalize_corpus, preservation_check, stage_report_with, RuleId, TransformConfig,
};
use amnorm::tree::{AmDependencyTree, EvalOptions};
use amnorm::{AlgebraMode, SourceName};

#[derive(Parser)]
#[command(name = "amnorm", version, about = "AM dependency tree evaluation, censuses, normalization and scoring")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Am,
    AmPlus,
}

impl From<ModeArg> for AlgebraMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Am => AlgebraMode::Am,
            ModeArg::AmPlus => AlgebraMode::AmPlus,
        }
    }
}

#[derive(Args)]
struct ModeOpt {
    /// Algebra mode; AM+ additionally allows one source on a root node.
    #[arg(long, value_enum, default_value = "am-plus")]
    mode: ModeArg,
}

#[derive(Subcommand)]
enum Command {
    /// Well-typedness diagnostics for every sentence of a tree file.
    Validate {
        trees: PathBuf,
        #[command(flatten)]
        mode: ModeOpt,
    },
    /// Evaluate trees to graphs and write them as an .sdp file.
    Eval {
        trees: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        mode: ModeOpt,
        /// Source names the sentence graph may leave open.
        #[arg(long, value_delimiter = ',')]
        allow_open: Vec<String>,
        /// Write .sdp rows without the frame column.
        #[arg(long)]
        no_frame_column: bool,
    },
    /// Pattern-signature census over aligned DM, PAS and PSD tree files.
    Patterns {
        dm: PathBuf,
        pas: PathBuf,
        psd: PathBuf,
        /// Also write the census as TSV.
        #[arg(long)]
        tsv: Option<PathBuf>,
    },
    /// Run the normalization pipeline and write the rewritten tree files.
    Normalize {
        dm: PathBuf,
        pas: PathBuf,
        psd: PathBuf,
        /// Directory for dm.amtree, pas.amtree, psd.amtree.
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        mode: ModeOpt,
        /// Comma-separated rule order, overriding DET,AUX,PREP,COORD,COPULA,NEG,PUNCT.
        #[arg(long, value_delimiter = ',')]
        order: Vec<String>,
        /// POS tags the PUNCT rule treats as punctuation, on top of the
        /// all-non-alphanumeric default.
        #[arg(long, value_delimiter = ',', default_values_t = ["IN".to_string(), "TO".to_string(), "RP".to_string()])]
        punct_extra: Vec<String>,
        /// Write one JSON record per rule decision.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Write the per-decision report as TSV.
        #[arg(long)]
        report_tsv: Option<PathBuf>,
        /// Write cumulative per-stage cross-bank scores as TSV.
        #[arg(long)]
        stage_report: Option<PathBuf>,
        /// Skip the inline graph-preservation check.
        #[arg(long)]
        no_check: bool,
    },
    /// UF, A/M F and LF between two tree files (first file scored against the second).
    CompareTrees { a: PathBuf, b: PathBuf },
    /// Unlabeled F between two graph files.
    CompareGraphs {
        a: PathBuf,
        b: PathBuf,
        /// Compare unordered endpoint pairs.
        #[arg(long)]
        undirected: bool,
        /// Drop edges incident to punctuation tokens.
        #[arg(long)]
        no_punct: bool,
        /// POS tags counted as punctuation (default: tags with no alphanumerics).
        #[arg(long, value_delimiter = ',')]
        punct_pos: Vec<String>,
        /// Read .sdp rows without the frame column.
        #[arg(long)]
        no_frame_column: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(message: impl std::fmt::Display) -> Self {
        Failure { code: 2, message: message.to_string() }
    }

    fn validation(message: impl std::fmt::Display) -> Self {
        Failure { code: 1, message: message.to_string() }
    }
}

fn read_trees(path: &Path) -> Result<Vec<AmDependencyTree>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    read_am_trees_str(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn read_graphs(path: &Path, options: SdpOptions) -> Result<Vec<SdpGraph>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    read_sdp_str(&text, options).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn read_triples(dm: &Path, pas: &Path, psd: &Path) -> Result<Vec<TreeTriple>, Failure> {
    zip_triples(read_trees(dm)?, read_trees(pas)?, read_trees(psd)?)
        .map_err(|e| Failure::io(format!("tree files are not aligned: {e}")))
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn sentence_label(index: usize, tree: &AmDependencyTree) -> String {
    match &tree.id {
        Some(id) => format!("sentence {} ({id})", index + 1),
        None => format!("sentence {}", index + 1),
    }
}

fn print_triple_scores(counts: &TreeMatchCounts) {
    let scores = counts.score();
    for (name, s) in [("UF", scores.uf), ("A/M F", scores.amf), ("LF", scores.lf)] {
        println!("{name:6} {s}");
    }
}

fn cmd_validate(trees: &Path, mode: AlgebraMode) -> Result<(), Failure> {
    let trees = read_trees(trees)?;
    let results = evaluate_corpus_with(&trees, mode, &EvalOptions::default());
    let mut bad = 0;
    for (i, (tree, result)) in trees.iter().zip(&results).enumerate() {
        match result {
            Ok(_) => println!("{}: well-typed", sentence_label(i, tree)),
            Err(e) => {
                bad += 1;
                println!("{}: {e}", sentence_label(i, tree));
            }
        }
    }
    if bad > 0 {
        return Err(Failure::validation(format!("{bad} of {} sentences are not well-typed", trees.len())));
    }
    println!("all {} sentences well-typed", trees.len());
    Ok(())
}

fn cmd_eval(
    trees: &Path,
    output: &Path,
    mode: AlgebraMode,
    allow_open: &[String],
    frame_column: bool,
) -> Result<(), Failure> {
    let trees = read_trees(trees)?;
    let mut options = EvalOptions::default();
    for name in allow_open {
        options
            .allowed_open
            .insert(SourceName::new(name.clone()).map_err(|e| Failure::io(e.to_string()))?);
    }
    let mut graphs = Vec::with_capacity(trees.len());
    let mut errors = Vec::new();
    for (i, (tree, result)) in trees.iter().zip(evaluate_corpus_with(&trees, mode, &options)).enumerate() {
        match result {
            Ok(g) => graphs.push(g),
            Err(e) => errors.push(format!("{}: {e}", sentence_label(i, tree))),
        }
    }
    if !errors.is_empty() {
        return Err(Failure::validation(errors.join("\n")));
    }
    write_file(output, &write_sdp_string(&graphs, SdpOptions { frame_column }))?;
    println!("wrote {} graphs to {}", graphs.len(), output.display());
    Ok(())
}

fn census_table(report: &CensusReport) -> String {
    let fmt_pairs = |pairs: &[(String, usize)]| {
        pairs.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(" ")
    };
    let mut out = format!("{:<24} {:>7} {:>7}  {:<24} {}\n", "signature", "count", "%", "top POS", "top lemmas");
    for row in &report.rows {
        out.push_str(&format!(
            "{:<24} {:>7} {:>6}.{}  {:<24} {}\n",
            row.signature.to_string(),
            row.count,
            row.per_mille / 10,
            row.per_mille % 10,
            fmt_pairs(&row.top_pos),
            fmt_pairs(&row.top_lemmas),
        ));
    }
    out.push_str(&format!("total classified tokens: {}\n", report.total_tokens));
    out
}

fn census_tsv(report: &CensusReport) -> String {
    let fmt_pairs = |pairs: &[(String, usize)]| {
        pairs.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(",")
    };
    let mut out = String::from("signature\tcount\tpercent\ttop_pos\ttop_lemmas\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{}\t{}\t{}.{}\t{}\t{}\n",
            row.signature,
            row.count,
            row.per_mille / 10,
            row.per_mille % 10,
            fmt_pairs(&row.top_pos),
            fmt_pairs(&row.top_lemmas),
        ));
    }
    out
}

fn cmd_patterns(dm: &Path, pas: &Path, psd: &Path, tsv: Option<&Path>) -> Result<(), Failure> {
    let triples = read_triples(dm, pas, psd)?;
    let report = census(&triples).map_err(|e| Failure::io(e.to_string()))?;
    print!("{}", census_table(&report));
    if let Some(path) = tsv {
        write_file(path, &census_tsv(&report))?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_normalize(
    dm: &Path,
    pas: &Path,
    psd: &Path,
    output: &Path,
    mode: AlgebraMode,
    order: &[String],
    punct_extra: &[String],
    report_path: Option<&Path>,
    report_tsv: Option<&Path>,
    stage_path: Option<&Path>,
    check: bool,
) -> Result<(), Failure> {
    let triples = read_triples(dm, pas, psd)?;
    let mut cfg = TransformConfig { mode, ..TransformConfig::default() };
    cfg.punct_extra = punct_extra.iter().cloned().collect();
    if !order.is_empty() {
        cfg.order = order
            .iter()
            .map(|s| s.parse::<RuleId>())
            .collect::<Result<_, _>>()
            .map_err(Failure::io)?;
    }
    let (normalized, report) = normalize_corpus(&triples, &cfg);

    fs::create_dir_all(output).map_err(|e| Failure::io(format!("{}: {e}", output.display())))?;
    for bank in Bank::ALL {
        let trees: Vec<AmDependencyTree> = normalized.iter().map(|t| t.tree(bank).clone()).collect();
        let path = output.join(format!("{}.amtree", bank.name().to_ascii_lowercase()));
        write_file(&path, &write_am_trees_string(&trees))?;
    }
    if let Some(path) = report_path {
        write_file(path, &report.to_jsonl())?;
    }
    if let Some(path) = report_tsv {
        write_file(path, &report.to_tsv())?;
    }
    if let Some(path) = stage_path {
        write_file(path, &stage_report_with(&triples, &cfg).to_tsv())?;
    }

    for rule in &cfg.order {
        println!("{rule:6} applied {:>4}  skipped {:>4}", report.applied(*rule), report.skipped(*rule));
    }
    for (bank, rate) in &report.lexicon_change {
        println!("lexical as-graphs changed in {bank}: {}%", percent(*rate));
    }
    for err in &report.sentence_errors {
        eprintln!("sentence {}: {}", err.sentence + 1, err.message);
    }

    if check {
        let failures = preservation_check(&triples, &normalized, mode);
        if !failures.is_empty() {
            let lines: Vec<String> = failures
                .iter()
                .map(|f| format!("sentence {} {}: {}", f.sentence + 1, f.bank, f.detail))
                .collect();
            return Err(Failure::validation(format!(
                "graph preservation violated:\n{}",
                lines.join("\n")
            )));
        }
        println!("preservation check passed: {} sentences, all banks unchanged", triples.len());
    }
    Ok(())
}

fn cmd_compare_trees(a: &Path, b: &Path) -> Result<(), Failure> {
    let ta = read_trees(a)?;
    let tb = read_trees(b)?;
    if ta.len() != tb.len() {
        return Err(Failure::io(format!("{} sentences vs {}", ta.len(), tb.len())));
    }
    let mut counts = TreeMatchCounts::default();
    for (x, y) in ta.iter().zip(&tb) {
        counts.add(tree_counts(x, y).map_err(|e| Failure::io(e.to_string()))?);
    }
    print_triple_scores(&counts);
    Ok(())
}

fn cmd_compare_graphs(
    a: &Path,
    b: &Path,
    undirected: bool,
    include_punct: bool,
    punct_pos: &[String],
    frame_column: bool,
) -> Result<(), Failure> {
    let options = SdpOptions { frame_column };
    let ga = read_graphs(a, options)?;
    let gb = read_graphs(b, options)?;
    if ga.len() != gb.len() {
        return Err(Failure::io(format!("{} graphs vs {}", ga.len(), gb.len())));
    }
    let punct: BTreeSet<String> = punct_pos.iter().cloned().collect();
    let counts: Result<Vec<_>, _> = ga
        .iter()
        .zip(&gb)
        .map(|(x, y)| graph_counts(x, y, !undirected, include_punct, &punct))
        .collect();
    let score: FScore = micro(counts.map_err(|e| Failure::io(e.to_string()))?);
    let direction = if undirected { "undirected" } else { "directed" };
    let punct_note = if include_punct { "with punctuation" } else { "without punctuation" };
    println!("{direction} unlabeled F ({punct_note}): {score}");
    Ok(())
}

fn run() -> Result<(), Failure> {
    if let Ok(raw) = std::env::var("AM_WORKERS") {
        let threads: usize = raw.parse().map_err(|_| Failure::io(format!("AM_WORKERS={raw:?} is not a number")))?;
        if threads > 0 {
            let _ = configure_workers(threads);
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { trees, mode } => cmd_validate(&trees, mode.mode.into()),
        Command::Eval { trees, output, mode, allow_open, no_frame_column } => {
            cmd_eval(&trees, &output, mode.mode.into(), &allow_open, !no_frame_column)
        }
        Command::Patterns { dm, pas, psd, tsv } => cmd_patterns(&dm, &pas, &psd, tsv.as_deref()),
        Command::Normalize {
            dm,
            pas,
            psd,
            output,
            mode,
            order,
            punct_extra,
            report,
            report_tsv,
            stage_report,
            no_check,
        } => cmd_normalize(
            &dm,
            &pas,
            &psd,
            &output,
            mode.mode.into(),
            &order,
            &punct_extra,
            report.as_deref(),
            report_tsv.as_deref(),
            stage_report.as_deref(),
            !no_check,
        ),
        Command::CompareTrees { a, b } => cmd_compare_trees(&a, &b),
        Command::CompareGraphs { a, b, undirected, no_punct, punct_pos, no_frame_column } => {
            cmd_compare_graphs(&a, &b, undirected, !no_punct, &punct_pos, !no_frame_column)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
