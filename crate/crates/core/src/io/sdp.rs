//! The SDP tab-separated graph format: `#id` comment lines, then one row
//! per token with columns id, form, lemma, pos, top (`+`/`-`), pred
//! (`+`/`-`), an optional frame column, and one argument column per
//! `+`-pred token of the sentence. The frame column is carried as an
//! opaque string; whether it exists at all is a reader flag, since the
//! graphbank releases differ.

use std::io::{BufRead, Write};

use crate::sdp::{SdpEdge, SdpGraph, Token};

#[derive(Debug, Clone, Copy)]
pub struct SdpOptions {
    pub frame_column: bool,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { frame_column: true }
    }
}

impl SdpOptions {
    fn fixed_columns(&self) -> usize {
        if self.frame_column {
            7
        } else {
            6
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SdpFileError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("line {line}: expected {expected} columns, found {found}")]
    ColumnCountMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: {found} argument columns for {preds} predicates")]
    DanglingArgColumn { line: usize, found: usize, preds: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

struct RawRow {
    line: usize,
    token: Token,
    top: bool,
    pred: bool,
    args: Vec<String>,
}

fn parse_flag(cell: &str, line: usize) -> Result<bool, SdpFileError> {
    match cell {
        "+" => Ok(true),
        "-" => Ok(false),
        other => Err(SdpFileError::MalformedRow { line, reason: format!("flag column must be + or -, found {other:?}") }),
    }
}

fn finish_block(rows: Vec<RawRow>, id: Option<String>) -> Result<SdpGraph, SdpFileError> {
    let pred_tokens: Vec<usize> = rows.iter().filter(|r| r.pred).map(|r| r.token.index).collect();
    let mut tokens = Vec::with_capacity(rows.len());
    let mut edges = std::collections::BTreeSet::new();
    let mut tops = std::collections::BTreeSet::new();
    for row in &rows {
        if row.args.len() != pred_tokens.len() {
            return Err(SdpFileError::DanglingArgColumn { line: row.line, found: row.args.len(), preds: pred_tokens.len() });
        }
        if row.top {
            tops.insert(row.token.index);
        }
        for (k, cell) in row.args.iter().enumerate() {
            if cell != "_" {
                edges.insert(SdpEdge { head: pred_tokens[k], dep: row.token.index, label: cell.clone() });
            }
        }
        tokens.push(row.token.clone());
    }
    let mut nodes = std::collections::BTreeSet::new();
    for e in &edges {
        nodes.insert(e.head);
        nodes.insert(e.dep);
    }
    nodes.extend(tops.iter().copied());
    let mut graph = SdpGraph::new(tokens);
    graph.id = id;
    graph.nodes = nodes;
    graph.edges = edges;
    graph.tops = tops;
    Ok(graph)
}

pub fn read_sdp<R: BufRead>(reader: R, options: SdpOptions) -> Result<Vec<SdpGraph>, SdpFileError> {
    let fixed = options.fixed_columns();
    let mut graphs = Vec::new();
    let mut rows: Vec<RawRow> = Vec::new();
    let mut id: Option<String> = None;
    let mut line_no = 0;
    for line in reader.lines() {
        let line = line?;
        line_no += 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() {
            if !rows.is_empty() {
                graphs.push(finish_block(std::mem::take(&mut rows), id.take())?);
            }
            id = None;
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if rows.is_empty() {
                id = Some(comment.to_string());
            }
            continue;
        }
        let cols: Vec<&str> = trimmed.split('\t').collect();
        if cols.len() < fixed {
            return Err(SdpFileError::ColumnCountMismatch { line: line_no, expected: fixed, found: cols.len() });
        }
        let index: usize = cols[0]
            .parse()
            .map_err(|e| SdpFileError::MalformedRow { line: line_no, reason: format!("bad token index: {e}") })?;
        if index != rows.len() + 1 {
            return Err(SdpFileError::MalformedRow { line: line_no, reason: format!("token index {index} out of order") });
        }
        let mut token = Token::new(index, cols[1], cols[2], cols[3]);
        if options.frame_column {
            token.frame = match cols[6] {
                "_" => None,
                other => Some(other.to_string()),
            };
        }
        rows.push(RawRow {
            line: line_no,
            token,
            top: parse_flag(cols[4], line_no)?,
            pred: parse_flag(cols[5], line_no)?,
            args: cols[fixed..].iter().map(|s| s.to_string()).collect(),
        });
    }
    if !rows.is_empty() {
        graphs.push(finish_block(rows, id)?);
    }
    Ok(graphs)
}

pub fn read_sdp_str(text: &str, options: SdpOptions) -> Result<Vec<SdpGraph>, SdpFileError> {
    read_sdp(text.as_bytes(), options)
}

/// Canonical writer. A token counts as a predicate iff it has an outgoing
/// edge; tops come from the top set; the frame cell round-trips opaquely.
pub fn write_sdp<W: Write>(graphs: &[SdpGraph], mut out: W, options: SdpOptions) -> std::io::Result<()> {
    for (i, g) in graphs.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
        }
        if let Some(id) = &g.id {
            writeln!(out, "#{id}")?;
        }
        let preds: Vec<usize> = g
            .tokens
            .iter()
            .map(|t| t.index)
            .filter(|t| g.edges.iter().any(|e| e.head == *t))
            .collect();
        for tok in &g.tokens {
            let mut cells: Vec<String> = vec![
                tok.index.to_string(),
                tok.form.clone(),
                tok.lemma.clone(),
                tok.pos.clone(),
                if g.tops.contains(&tok.index) { "+" } else { "-" }.into(),
                if preds.contains(&tok.index) { "+" } else { "-" }.into(),
            ];
            if options.frame_column {
                cells.push(tok.frame.clone().unwrap_or_else(|| "_".into()));
            }
            for p in &preds {
                let label = g.edges.iter().find(|e| e.head == *p && e.dep == tok.index).map(|e| e.label.as_str());
                cells.push(label.unwrap_or("_").to_string());
            }
            writeln!(out, "{}", cells.join("\t"))?;
        }
    }
    Ok(())
}

pub fn write_sdp_string(graphs: &[SdpGraph], options: SdpOptions) -> String {
    let mut buf = Vec::new();
    write_sdp(graphs, &mut buf, options).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("writer emits UTF-8")
}
