//! The `.amtree` file format: one blank-line separated block per sentence,
//! an optional `#id` comment line, then eight tab-separated columns per
//! token: index, form, lemma, POS, supertag literal or `_`, lexical label
//! or `_`, head (0 for ROOT and IGNORE), and the edge label
//! (`APP_src`, `MOD_src`, `IGNORE`, `ROOT`).

use std::io::{BufRead, Write};

use crate::graph::SourceName;
use crate::io::literal::{parse_graph, print_graph, LiteralError};
use crate::sdp::Token;
use crate::tree::{AmDependencyTree, EdgeOp, TreeEntry, TreeError};

#[derive(Debug, thiserror::Error)]
pub enum AmTreeFileError {
    #[error("line {line}: expected 8 columns, found {found}")]
    ColumnCount { line: usize, found: usize },
    #[error("line {line}: {0}", .source)]
    BadNumber { line: usize, source: std::num::ParseIntError },
    #[error("line {line}: unknown edge label {label:?}")]
    UnknownEdgeLabel { line: usize, label: String },
    #[error("line {line}: {source}")]
    BadGraphLiteral { line: usize, source: LiteralError },
    #[error("sentence ending at line {line}: {source}")]
    InvalidTree { line: usize, source: TreeError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_edge_op(raw: &str, line: usize) -> Result<EdgeOp, AmTreeFileError> {
    match raw {
        "IGNORE" => Ok(EdgeOp::Ignore),
        "ROOT" => Ok(EdgeOp::Root),
        other => {
            let unknown = || AmTreeFileError::UnknownEdgeLabel { line, label: other.to_string() };
            let (kind, src) = other.split_once('_').ok_or_else(unknown)?;
            let src = SourceName::new(src).map_err(|_| unknown())?;
            match kind {
                "APP" => Ok(EdgeOp::App(src)),
                "MOD" => Ok(EdgeOp::Mod(src)),
                _ => Err(unknown()),
            }
        }
    }
}

pub fn read_am_trees<R: BufRead>(reader: R) -> Result<Vec<AmDependencyTree>, AmTreeFileError> {
    let mut trees = Vec::new();
    let mut id: Option<String> = None;
    let mut tokens: Vec<Token> = Vec::new();
    let mut entries: Vec<TreeEntry> = Vec::new();
    let mut line_no = 0;

    let mut flush = |id: &mut Option<String>,
                     tokens: &mut Vec<Token>,
                     entries: &mut Vec<TreeEntry>,
                     line: usize|
     -> Result<(), AmTreeFileError> {
        if tokens.is_empty() {
            *id = None;
            return Ok(());
        }
        let tree = AmDependencyTree::new(id.take(), std::mem::take(tokens), std::mem::take(entries));
        tree.validate().map_err(|source| AmTreeFileError::InvalidTree { line, source })?;
        trees.push(tree);
        Ok(())
    };

    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() {
            flush(&mut id, &mut tokens, &mut entries, line_no)?;
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if tokens.is_empty() {
                id = Some(comment.to_string());
            }
            continue;
        }
        let cols: Vec<&str> = trimmed.split('\t').collect();
        if cols.len() != 8 {
            return Err(AmTreeFileError::ColumnCount { line: line_no, found: cols.len() });
        }
        let index: usize = cols[0].parse().map_err(|source| AmTreeFileError::BadNumber { line: line_no, source })?;
        let head: usize = cols[6].parse().map_err(|source| AmTreeFileError::BadNumber { line: line_no, source })?;
        let supertag = match cols[4] {
            "_" => None,
            text => Some(parse_graph(text).map_err(|source| AmTreeFileError::BadGraphLiteral { line: line_no, source })?),
        };
        let lex_label = match cols[5] {
            "_" => None,
            text => Some(text.to_string()),
        };
        tokens.push(Token::new(index, cols[1], cols[2], cols[3]));
        entries.push(TreeEntry { supertag, lex_label, head, op: parse_edge_op(cols[7], line_no)? });
    }
    flush(&mut id, &mut tokens, &mut entries, line_no)?;
    Ok(trees)
}

pub fn read_am_trees_str(text: &str) -> Result<Vec<AmDependencyTree>, AmTreeFileError> {
    read_am_trees(text.as_bytes())
}

/// Canonical writer: supertags in canonical literal form, blocks separated
/// by one blank line, LF endings. Writing is deterministic, so write∘read
/// is a fixpoint on its own output.
pub fn write_am_trees<W: Write>(trees: &[AmDependencyTree], mut out: W) -> std::io::Result<()> {
    for (i, tree) in trees.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        if let Some(id) = &tree.id {
            writeln!(out, "#{id}")?;
        }
        for (tok, entry) in tree.tokens.iter().zip(&tree.entries) {
            let st = entry.supertag.as_ref().map(print_graph).unwrap_or_else(|| "_".into());
            let lex = entry.lex_label.as_deref().unwrap_or("_");
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                tok.index, tok.form, tok.lemma, tok.pos, st, lex, entry.head, entry.op
            )?;
        }
    }
    Ok(())
}

pub fn write_am_trees_string(trees: &[AmDependencyTree]) -> String {
    let mut buf = Vec::new();
    write_am_trees(trees, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("writer emits UTF-8")
}
