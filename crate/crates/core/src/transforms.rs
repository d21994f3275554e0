//! The seven normalization rules and the fixed-order pipeline.
//!
//! A rule fires on a token when its pattern signature matches one of the
//! rule's triggers and the POS/lemma/structural restrictions hold; the
//! rewrite then changes one or two banks' trees so that all three agree on
//! the token, without changing any evaluated graph. Signatures are
//! recomputed between rules because earlier rewrites change patterns.
//! When a rule's structural search fails the token is left untouched and
//! the reason recorded; there are no partial rewrites.

use std::collections::BTreeSet;

use num_rational::Rational64;
use serde::Serialize;

use crate::algebra::{type_of, AlgebraMode};
use crate::corpus::{map_vec, Bank, TreeTriple};
use crate::graph::{AsGraph, NodeId, RequestType, SourceName};
use crate::metrics::lexicon_change_rate;
use crate::patterns::{classify, LocalPattern, PatternSignature};
use crate::sdp::{graph_equals, SdpGraph};
use crate::tree::{AmDependencyTree, EdgeOp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum RuleId {
    Det,
    Aux,
    Prep,
    Coord,
    Copula,
    Neg,
    Punct,
}

impl RuleId {
    /// The order the pipeline always applies by default.
    pub const DEFAULT_ORDER: [RuleId; 7] =
        [RuleId::Det, RuleId::Aux, RuleId::Prep, RuleId::Coord, RuleId::Copula, RuleId::Neg, RuleId::Punct];

    pub fn name(&self) -> &'static str {
        match self {
            RuleId::Det => "DET",
            RuleId::Aux => "AUX",
            RuleId::Prep => "PREP",
            RuleId::Coord => "COORD",
            RuleId::Copula => "COPULA",
            RuleId::Neg => "NEG",
            RuleId::Punct => "PUNCT",
        }
    }
}

impl std::fmt::Display for RuleId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RuleId {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "DET" => Ok(RuleId::Det),
            "AUX" => Ok(RuleId::Aux),
            "PREP" => Ok(RuleId::Prep),
            "COORD" => Ok(RuleId::Coord),
            "COPULA" => Ok(RuleId::Copula),
            "NEG" => Ok(RuleId::Neg),
            "PUNCT" => Ok(RuleId::Punct),
            other => Err(format!("unknown rule {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TransformConfig {
    pub mode: AlgebraMode,
    pub order: Vec<RuleId>,
    /// POS tags treated like punctuation by the PUNCT rule, on top of the
    /// all-non-alphanumeric default.
    pub punct_extra: BTreeSet<String>,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            mode: AlgebraMode::AmPlus,
            order: RuleId::DEFAULT_ORDER.to_vec(),
            punct_extra: ["IN", "TO", "RP"].iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SkipReason {
    /// A POS or lemma restriction did not hold.
    Restriction,
    /// The determiner has no head in the DM tree to borrow.
    NoDmHead,
    /// No APP edge between adjective and subject in the DM tree.
    NoDmEdge,
    /// No usable tree edge between the preposition's neighbours.
    NoMatchingEdge,
    /// The coordination has a number of member edges other than two.
    NotBinary,
    /// No conjunction edge between the two conjuncts in the DM tree.
    NoConjEdge,
    /// The negated word's subtree does not evaluate, so no request type.
    SubtreeNotTypable,
    /// The supertag around the target edge is too entangled to detach.
    ComplexSupertag,
    /// The PSD tree does not evaluate, so member edges cannot be counted.
    PsdNotEvaluable,
    /// The attachment site is ignored in the bank being rewritten.
    TargetHeadIgnored,
    /// The rewritten tree failed validation; nothing was committed.
    RewriteInvalid,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Action {
    Applied { banks: Vec<Bank> },
    Skipped { reason: SkipReason },
}

/// One trigger match: what the rule did at this token.
#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub sentence: usize,
    pub sentence_id: Option<String>,
    pub token: usize,
    pub form: String,
    pub rule: RuleId,
    pub action: Action,
    #[serde(serialize_with = "sig_as_string")]
    pub before: PatternSignature,
    #[serde(serialize_with = "sig_as_string")]
    pub after: PatternSignature,
}

fn sig_as_string<S: serde::Serializer>(sig: &PatternSignature, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&sig.to_string())
}

#[derive(Debug, Clone)]
pub struct SentenceError {
    pub sentence: usize,
    pub sentence_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default)]
pub struct TransformReport {
    pub decisions: Vec<Decision>,
    pub sentence_errors: Vec<SentenceError>,
    /// Fraction of lexical as-graphs changed, per bank.
    pub lexicon_change: Vec<(Bank, Rational64)>,
}

impl TransformReport {
    pub fn applied(&self, rule: RuleId) -> usize {
        self.decisions.iter().filter(|d| d.rule == rule && matches!(d.action, Action::Applied { .. })).count()
    }

    pub fn skipped(&self, rule: RuleId) -> usize {
        self.decisions.iter().filter(|d| d.rule == rule && matches!(d.action, Action::Skipped { .. })).count()
    }

    /// One JSON object per decision, newline separated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.decisions {
            out.push_str(&serde_json::to_string(d).expect("decisions serialize"));
            out.push('\n');
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("sentence\tsentence_id\ttoken\tform\trule\taction\tbefore\tafter\n");
        for d in &self.decisions {
            let action = match &d.action {
                Action::Applied { banks } => {
                    format!("applied:{}", banks.iter().map(|b| b.name()).collect::<Vec<_>>().join("+"))
                }
                Action::Skipped { reason } => format!("skipped:{reason:?}"),
            };
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                d.sentence,
                d.sentence_id.as_deref().unwrap_or("-"),
                d.token,
                d.form,
                d.rule,
                action,
                d.before,
                d.after
            ));
        }
        out
    }
}

fn sig_of(triple: &TreeTriple, token: usize) -> PatternSignature {
    PatternSignature::new(classify(&triple.dm, token), classify(&triple.pas, token), classify(&triple.psd, token))
}

fn triggers(rule: RuleId, sig: PatternSignature) -> bool {
    use LocalPattern::*;
    let s = (sig.dm, sig.pas, sig.psd);
    match rule {
        RuleId::Det => s == (Mod, Mod, O),
        RuleId::Punct => s == (O, Mod, O),
        RuleId::Aux => s == (O, Cmod, O),
        RuleId::Copula => s == (O, Capp2, App2),
        RuleId::Neg => s == (App1, Mod, Mod),
        RuleId::Prep => s == (Conn, Conn, O) || s == (O, Conn, O),
        RuleId::Coord => s == (O, App2, App2) || s == (O, Other, Other) || s == (O, App2, Other),
    }
}

fn src(name: &str) -> SourceName {
    SourceName::new(name).expect("static source name")
}

fn vacuous_attacher(source: &SourceName) -> AsGraph {
    let mut g = AsGraph::single_node();
    g.mark_source(source.clone(), g.root(), RequestType::empty()).expect("fresh graph");
    g
}

fn mod_source(op: &EdgeOp) -> Option<&SourceName> {
    match op {
        EdgeOp::Mod(x) => Some(x),
        _ => None,
    }
}

/// Install `candidate` as bank `bank` of `triple` if it validates.
fn commit(triple: &mut TreeTriple, bank: Bank, candidate: AmDependencyTree) -> Result<(), SkipReason> {
    candidate.validate().map_err(|_| SkipReason::RewriteInvalid)?;
    *triple.tree_mut(bank) = candidate;
    Ok(())
}

// ---------------------------------------------------------------------------
// Individual rules. Each returns the banks it changed, or the reason it
// left the token alone. Checks happen on immutable state; mutations only
// land through `commit`.
// ---------------------------------------------------------------------------

fn rule_det(triple: &mut TreeTriple, i: usize) -> Result<Vec<Bank>, SkipReason> {
    if triple.dm.token(i).pos != "DT" {
        return Err(SkipReason::Restriction);
    }
    let dm_entry = triple.dm.entry(i);
    if dm_entry.op.is_ignore() {
        return Err(SkipReason::NoDmHead);
    }
    let head = dm_entry.head;
    if head == 0 || triple.psd.entry(head).op.is_ignore() {
        return Err(SkipReason::TargetHeadIgnored);
    }
    let det = src("det");
    let mut cand = triple.psd.clone();
    {
        let e = cand.entry_mut(i);
        e.supertag = Some(vacuous_attacher(&det));
        e.lex_label = None;
        e.head = head;
        e.op = EdgeOp::Mod(det);
    }
    commit(triple, Bank::Psd, cand)?;
    Ok(vec![Bank::Psd])
}

/// The shared PUNCT/AUX fix: give DM and PSD a vacuous modifier at the
/// PAS attachment site, with the PAS edge's source name.
fn add_vacuous_modifiers(triple: &mut TreeTriple, i: usize) -> Result<Vec<Bank>, SkipReason> {
    let pas_entry = triple.pas.entry(i);
    let source = mod_source(&pas_entry.op).ok_or(SkipReason::NoMatchingEdge)?.clone();
    let head = pas_entry.head;
    let mut candidates = Vec::new();
    for bank in [Bank::Dm, Bank::Psd] {
        if head == 0 || triple.tree(bank).entry(head).op.is_ignore() {
            continue;
        }
        let mut cand = triple.tree(bank).clone();
        {
            let e = cand.entry_mut(i);
            e.supertag = Some(vacuous_attacher(&source));
            e.lex_label = None;
            e.head = head;
            e.op = EdgeOp::Mod(source.clone());
        }
        cand.validate().map_err(|_| SkipReason::RewriteInvalid)?;
        candidates.push((bank, cand));
    }
    if candidates.is_empty() {
        return Err(SkipReason::TargetHeadIgnored);
    }
    let mut changed = Vec::new();
    for (bank, cand) in candidates {
        *triple.tree_mut(bank) = cand;
        changed.push(bank);
    }
    Ok(changed)
}

fn rule_punct(triple: &mut TreeTriple, i: usize, cfg: &TransformConfig) -> Result<Vec<Bank>, SkipReason> {
    let pos = &triple.dm.token(i).pos;
    if !(SdpGraph::is_punct_pos(pos) || cfg.punct_extra.contains(pos)) {
        return Err(SkipReason::Restriction);
    }
    add_vacuous_modifiers(triple, i)
}

fn rule_aux(triple: &mut TreeTriple, i: usize) -> Result<Vec<Bank>, SkipReason> {
    if !triple.dm.token(i).pos.starts_with('V') {
        return Err(SkipReason::Restriction);
    }
    add_vacuous_modifiers(triple, i)
}

fn rule_copula(triple: &mut TreeTriple, i: usize) -> Result<Vec<Bank>, SkipReason> {
    if triple.psd.token(i).lemma != "be" {
        return Err(SkipReason::Restriction);
    }
    // The PSD tree identifies subject and predicate: exactly APP_s and
    // APP_o children, the predicate an adjective.
    let (s, o) = (src("s"), src("o"));
    let mut subj = None;
    let mut adj = None;
    for child in triple.psd.children_of(i) {
        match &triple.psd.entry(child).op {
            EdgeOp::App(x) if *x == s => subj = Some(child),
            EdgeOp::App(x) if *x == o => adj = Some(child),
            EdgeOp::App(_) => return Err(SkipReason::Restriction),
            _ => {}
        }
    }
    let (Some(subj), Some(adj)) = (subj, adj) else { return Err(SkipReason::Restriction) };
    if !triple.psd.token(adj).pos.starts_with("JJ") {
        return Err(SkipReason::Restriction);
    }
    // The DM edge to replace: the adjective applying to the subject.
    if !(triple.dm.entry(subj).head == adj && triple.dm.entry(subj).op.is_app()) {
        return Err(SkipReason::NoDmEdge);
    }
    let mut copula = AsGraph::single_node();
    copula
        .mark_source(o.clone(), copula.root(), RequestType::singleton(s.clone(), RequestType::empty()))
        .expect("fresh graph");

    let mut cand = triple.dm.clone();
    let (adj_head, adj_op) = (cand.entry(adj).head, cand.entry(adj).op.clone());
    {
        let e = cand.entry_mut(i);
        e.supertag = Some(copula);
        e.lex_label = None;
        e.head = adj_head;
        e.op = adj_op;
    }
    {
        let e = cand.entry_mut(adj);
        e.head = i;
        e.op = EdgeOp::App(o);
    }
    {
        let e = cand.entry_mut(subj);
        e.head = i;
        e.op = EdgeOp::App(s);
    }
    commit(triple, Bank::Dm, cand)?;
    Ok(vec![Bank::Dm])
}

/// Shift the root of a modifier supertag onto its attachment node, which
/// then carries root and a neg-source with the given request.
fn shift_root_to_attachment(st: &AsGraph, x: &SourceName, request: RequestType) -> Option<AsGraph> {
    let node = st.source(x)?.node;
    let mut g = st.clone();
    g.unmark_source(x);
    g.set_root(node);
    g.mark_source(src("neg"), node, request).ok()?;
    Some(g)
}

fn rule_neg(triple: &mut TreeTriple, i: usize, mode: AlgebraMode) -> Result<Vec<Bank>, SkipReason> {
    let lemma = &triple.psd.token(i).lemma;
    if lemma != "#Neg" && lemma != "never" {
        return Err(SkipReason::Restriction);
    }
    let neg = src("neg");
    // Build both banks' candidates before committing either, so a failure
    // in one leaves the token fully untouched.
    let mut candidates = Vec::new();
    for bank in [Bank::Pas, Bank::Psd] {
        let tree = triple.tree(bank);
        let entry = tree.entry(i);
        let Some(x) = mod_source(&entry.op).cloned() else { return Err(SkipReason::NoMatchingEdge) };
        let v = entry.head;
        let (v_head, v_op) = (tree.entry(v).head, tree.entry(v).op.clone());

        // Rewire first, then read the type the negated subtree evaluates
        // to; the request at the neg-source must match it.
        let mut cand = tree.clone();
        {
            let e = cand.entry_mut(i);
            e.head = v_head;
            e.op = v_op;
        }
        {
            let e = cand.entry_mut(v);
            e.head = i;
            e.op = EdgeOp::App(neg.clone());
        }
        let request = match cand.evaluate_subgraph(mode, v) {
            Ok(g) => type_of(&g),
            Err(_) => return Err(SkipReason::SubtreeNotTypable),
        };
        let shifted = tree
            .entry(i)
            .supertag
            .as_ref()
            .and_then(|st| shift_root_to_attachment(st, &x, request))
            .ok_or(SkipReason::ComplexSupertag)?;
        cand.entry_mut(i).supertag = Some(shifted);
        cand.validate().map_err(|_| SkipReason::RewriteInvalid)?;
        candidates.push((bank, cand));
    }
    let mut changed = Vec::new();
    for (bank, cand) in candidates {
        *triple.tree_mut(bank) = cand;
        changed.push(bank);
    }
    Ok(changed)
}

/// The single edge incident to `node`, if there is exactly one.
fn sole_incident_edge(st: &AsGraph, node: NodeId) -> Option<(NodeId, NodeId, String)> {
    let mut found = None;
    for e in st.edges() {
        if e.from == node || e.to == node {
            if found.is_some() {
                return None;
            }
            found = Some((e.from, e.to, e.label.clone()));
        }
    }
    found
}

fn rule_prep(triple: &mut TreeTriple, i: usize, sig: PatternSignature) -> Result<Vec<Bank>, SkipReason> {
    let pos = &triple.dm.token(i).pos;
    if pos != "IN" && pos != "TO" {
        return Err(SkipReason::Restriction);
    }
    let banks_to_fix: &[Bank] =
        if sig.dm == LocalPattern::O { &[Bank::Dm, Bank::Psd] } else { &[Bank::Psd] };

    // PAS names the two neighbours: the head the preposition modifies and
    // the argument it applies to.
    let pas_entry = triple.pas.entry(i);
    if mod_source(&pas_entry.op).is_none() {
        return Err(SkipReason::NoMatchingEdge);
    }
    let h = pas_entry.head;
    let apps: Vec<usize> =
        triple.pas.children_of(i).into_iter().filter(|c| triple.pas.entry(*c).op.is_app()).collect();
    let [n] = apps.as_slice() else { return Err(SkipReason::NoMatchingEdge) };
    let n = *n;

    let mut changed = Vec::new();
    let mut last_skip = None;
    for &bank in banks_to_fix {
        match fix_prep_bank(triple, bank, i, h, n) {
            Ok(()) => changed.push(bank),
            Err(reason) => last_skip = Some(reason),
        }
    }
    if changed.is_empty() {
        return Err(last_skip.unwrap_or(SkipReason::NoMatchingEdge));
    }
    Ok(changed)
}

fn fix_prep_bank(triple: &mut TreeTriple, bank: Bank, i: usize, h: usize, n: usize) -> Result<(), SkipReason> {
    let tree = triple.tree(bank);
    // The bank must connect H and N directly by a MOD edge.
    let n_entry = tree.entry(n);
    if n_entry.head != h {
        return Err(SkipReason::NoMatchingEdge);
    }
    let Some(attachment) = mod_source(&n_entry.op).cloned() else { return Err(SkipReason::NoMatchingEdge) };
    let st_n = n_entry.supertag.as_ref().ok_or(SkipReason::NoMatchingEdge)?;
    let att_node = st_n.source(&attachment).ok_or(SkipReason::ComplexSupertag)?.node;
    let att_rec = st_n.node(att_node).expect("marked node exists");
    if att_rec.label.is_some() || att_rec.lex_slot {
        return Err(SkipReason::ComplexSupertag);
    }
    let (from, to, label) = sole_incident_edge(st_n, att_node).ok_or(SkipReason::ComplexSupertag)?;

    // Detach the edge from N's supertag.
    let mut new_n = st_n.clone();
    new_n.remove_edge(from, to, &label);
    new_n.unmark_source(&attachment);
    if !new_n.remove_isolated_node(att_node) {
        return Err(SkipReason::ComplexSupertag);
    }

    // The preposition's new supertag is that edge alone: the attachment
    // end doubles as the root, the other end takes the argument source.
    let argument = if attachment.as_str() == "o" { src("s") } else { src("o") };
    let mut st_i = AsGraph::single_node();
    let arg_node = st_i.add_node();
    if from == att_node {
        st_i.add_edge(st_i.root(), arg_node, label);
    } else {
        st_i.add_edge(arg_node, st_i.root(), label);
    }
    st_i.mark_source(attachment.clone(), st_i.root(), RequestType::empty()).expect("fresh graph");
    st_i.mark_source(argument.clone(), arg_node, RequestType::empty()).expect("fresh graph");

    let mut cand = tree.clone();
    cand.entry_mut(n).supertag = Some(new_n);
    {
        let e = cand.entry_mut(n);
        e.head = i;
        e.op = EdgeOp::App(argument);
    }
    {
        let e = cand.entry_mut(i);
        e.supertag = Some(st_i);
        e.lex_label = None;
        e.head = h;
        e.op = EdgeOp::Mod(attachment);
    }
    commit(triple, bank, cand)
}

fn rule_coord(triple: &mut TreeTriple, i: usize, mode: AlgebraMode) -> Result<Vec<Bank>, SkipReason> {
    if triple.dm.token(i).pos != "CC" {
        return Err(SkipReason::Restriction);
    }
    // Binarity is checked on the PSD graph: exactly two *.member edges
    // out of the conjunction token.
    let psd_graph = triple.psd.evaluate(mode).map_err(|_| SkipReason::PsdNotEvaluable)?;
    let mut conjuncts: Vec<usize> = psd_graph
        .edges
        .iter()
        .filter(|e| e.head == i && e.label.ends_with(".member"))
        .map(|e| e.dep)
        .collect();
    conjuncts.sort_unstable();
    let [c1, c2] = conjuncts.as_slice() else { return Err(SkipReason::NotBinary) };
    let (c1, c2) = (*c1, *c2);

    // One conjunct heads the other in DM, via the source whose node holds
    // the dedicated conjunction edge.
    let (head_conj, other_conj) = if triple.dm.entry(c2).head == c1 && triple.dm.entry(c2).op.is_app() {
        (c1, c2)
    } else if triple.dm.entry(c1).head == c2 && triple.dm.entry(c1).op.is_app() {
        (c2, c1)
    } else {
        return Err(SkipReason::NoConjEdge);
    };
    let EdgeOp::App(conj_source) = triple.dm.entry(other_conj).op.clone() else {
        return Err(SkipReason::NoConjEdge);
    };
    let st_h = triple.dm.entry(head_conj).supertag.as_ref().ok_or(SkipReason::NoConjEdge)?;
    let conj_mark = st_h.source(&conj_source).ok_or(SkipReason::NoConjEdge)?.clone();
    let (from, to, label) = sole_incident_edge(st_h, conj_mark.node).ok_or(SkipReason::ComplexSupertag)?;
    let root_end = if from == conj_mark.node { to } else { from };
    if root_end != st_h.root() {
        return Err(SkipReason::ComplexSupertag);
    }

    // Head conjunct keeps its supertag minus the conjunction edge.
    let mut new_h = st_h.clone();
    new_h.remove_edge(from, to, &label);
    new_h.unmark_source(&conj_source);
    if !new_h.remove_isolated_node(conj_mark.node) {
        return Err(SkipReason::ComplexSupertag);
    }

    // The conjunction's supertag: op1 and op2 slots joined by the edge,
    // rooted where the former head conjunct goes, shared-argument
    // requests copied onto both slots.
    let request = conj_mark.request.clone();
    let (op1, op2) = (src("op1"), src("op2"));
    let (head_src, other_src) = if head_conj == c1 { (&op1, &op2) } else { (&op2, &op1) };
    let mut st_i = AsGraph::single_node();
    let other_node = st_i.add_node();
    if from == root_end {
        st_i.add_edge(st_i.root(), other_node, label);
    } else {
        st_i.add_edge(other_node, st_i.root(), label);
    }
    st_i.mark_source(head_src.clone(), st_i.root(), request.clone()).expect("fresh graph");
    st_i.mark_source(other_src.clone(), other_node, request.clone()).expect("fresh graph");

    let mut cand = triple.dm.clone();
    let (h_head, h_op) = (cand.entry(head_conj).head, cand.entry(head_conj).op.clone());
    // Children of the head conjunct that fill a shared source move up to
    // the coordination, where the source is passed through.
    for child in cand.children_of(head_conj) {
        if child == other_conj {
            continue;
        }
        if let EdgeOp::App(x) = &cand.entry(child).op {
            if request.mentions(x) {
                cand.entry_mut(child).head = i;
            }
        }
    }
    {
        let e = cand.entry_mut(i);
        e.supertag = Some(st_i);
        e.lex_label = None;
        e.head = h_head;
        e.op = h_op;
    }
    cand.entry_mut(head_conj).supertag = Some(new_h);
    {
        let e = cand.entry_mut(head_conj);
        e.head = i;
        e.op = EdgeOp::App(if head_conj == c1 { op1.clone() } else { op2.clone() });
    }
    {
        let e = cand.entry_mut(other_conj);
        e.head = i;
        e.op = EdgeOp::App(if other_conj == c2 { op2 } else { op1 });
    }
    commit(triple, Bank::Dm, cand)?;
    Ok(vec![Bank::Dm])
}

fn apply_rule(rule: RuleId, triple: &mut TreeTriple, i: usize, sig: PatternSignature, cfg: &TransformConfig) -> Result<Vec<Bank>, SkipReason> {
    match rule {
        RuleId::Det => rule_det(triple, i),
        RuleId::Punct => rule_punct(triple, i, cfg),
        RuleId::Aux => rule_aux(triple, i),
        RuleId::Copula => rule_copula(triple, i),
        RuleId::Neg => rule_neg(triple, i, cfg.mode),
        RuleId::Prep => rule_prep(triple, i, sig),
        RuleId::Coord => rule_coord(triple, i, cfg.mode),
    }
}

/// Run the pipeline on one sentence. Signatures are re-derived on the
/// current trees before every rule and token.
pub fn normalize_sentence(triple: &TreeTriple, cfg: &TransformConfig) -> (TreeTriple, Vec<Decision>) {
    let mut work = triple.clone();
    let mut decisions = Vec::new();
    for &rule in &cfg.order {
        for token in 1..=work.len() {
            let before = sig_of(&work, token);
            if !triggers(rule, before) {
                continue;
            }
            let action = match apply_rule(rule, &mut work, token, before, cfg) {
                Ok(banks) => Action::Applied { banks },
                Err(reason) => Action::Skipped { reason },
            };
            decisions.push(Decision {
                sentence: 0,
                sentence_id: work.id().map(String::from),
                token,
                form: work.dm.token(token).form.clone(),
                rule,
                action,
                before,
                after: sig_of(&work, token),
            });
        }
    }
    (work, decisions)
}

/// Normalize a corpus. Sentences are independent and processed in
/// parallel; outputs and report lines keep the input order. Sentences
/// whose trees fail validation pass through unchanged with the error
/// recorded.
pub fn normalize_corpus(corpus: &[TreeTriple], cfg: &TransformConfig) -> (Vec<TreeTriple>, TransformReport) {
    let outcomes = map_vec(corpus, |triple| {
        let invalid = [&triple.dm, &triple.pas, &triple.psd].iter().find_map(|t| t.validate().err());
        match invalid {
            Some(err) => (triple.clone(), Vec::new(), Some(err.to_string())),
            None => {
                let (out, decisions) = normalize_sentence(triple, cfg);
                (out, decisions, None)
            }
        }
    });
    assemble(corpus, outcomes)
}

/// Always-sequential twin of [`normalize_corpus`].
pub fn normalize_corpus_seq(corpus: &[TreeTriple], cfg: &TransformConfig) -> (Vec<TreeTriple>, TransformReport) {
    let outcomes = corpus
        .iter()
        .map(|triple| {
            let invalid = [&triple.dm, &triple.pas, &triple.psd].iter().find_map(|t| t.validate().err());
            match invalid {
                Some(err) => (triple.clone(), Vec::new(), Some(err.to_string())),
                None => {
                    let (out, decisions) = normalize_sentence(triple, cfg);
                    (out, decisions, None)
                }
            }
        })
        .collect();
    assemble(corpus, outcomes)
}

fn assemble(
    corpus: &[TreeTriple],
    outcomes: Vec<(TreeTriple, Vec<Decision>, Option<String>)>,
) -> (Vec<TreeTriple>, TransformReport) {
    let mut report = TransformReport::default();
    let mut normalized = Vec::with_capacity(outcomes.len());
    for (index, (out, decisions, error)) in outcomes.into_iter().enumerate() {
        if let Some(message) = error {
            report.sentence_errors.push(SentenceError {
                sentence: index,
                sentence_id: out.id().map(String::from),
                message,
            });
        }
        for mut d in decisions {
            d.sentence = index;
            report.decisions.push(d);
        }
        normalized.push(out);
    }
    for bank in Bank::ALL {
        let before: Vec<AmDependencyTree> = corpus.iter().map(|t| t.tree(bank).clone()).collect();
        let after: Vec<AmDependencyTree> = normalized.iter().map(|t| t.tree(bank).clone()).collect();
        if let Ok(rate) = lexicon_change_rate(&before, &after) {
            report.lexicon_change.push((bank, rate));
        }
    }
    (normalized, report)
}

#[derive(Debug, Clone)]
pub struct PreservationFailure {
    pub sentence: usize,
    pub sentence_id: Option<String>,
    pub bank: Bank,
    pub detail: String,
}

/// Check that normalization changed no evaluated graph: every bank of
/// every sentence must evaluate to the same graph before and after,
/// punctuation included, exactly.
pub fn preservation_check(
    before: &[TreeTriple],
    after: &[TreeTriple],
    mode: AlgebraMode,
) -> Vec<PreservationFailure> {
    let per_sentence = map_vec(&before.iter().zip(after).collect::<Vec<_>>(), |(b, a)| {
        let mut failures = Vec::new();
        for bank in Bank::ALL {
            let detail = match (b.tree(bank).evaluate(mode), a.tree(bank).evaluate(mode)) {
                (Ok(gb), Ok(ga)) => match graph_equals(&gb, &ga, true, &BTreeSet::new()) {
                    Ok(true) => None,
                    Ok(false) => Some(format!("graphs differ: {:?} vs {:?}", gb.edges, ga.edges)),
                    Err(e) => Some(format!("token mismatch: {e}")),
                },
                (Err(e), _) => Some(format!("original tree does not evaluate: {e}")),
                (_, Err(e)) => Some(format!("normalized tree does not evaluate: {e}")),
            };
            if let Some(detail) = detail {
                failures.push((bank, detail));
            }
        }
        failures
    });
    let mut out = Vec::new();
    for (index, failures) in per_sentence.into_iter().enumerate() {
        for (bank, detail) in failures {
            out.push(PreservationFailure {
                sentence: index,
                sentence_id: before[index].id().map(String::from),
                bank,
                detail,
            });
        }
    }
    out
}

/// Scores after each cumulative pipeline stage, for the three bank pairs.
#[derive(Debug, Clone)]
pub struct StageReport {
    pub stages: Vec<String>,
    /// (pair, metric name, score after each stage).
    pub rows: Vec<(String, &'static str, Vec<Rational64>)>,
}

impl StageReport {
    /// Base score, the delta each stage contributes, and the final score.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("pair\tmetric");
        for s in &self.stages {
            out.push('\t');
            out.push_str(s);
        }
        out.push_str("\tall\n");
        for (pair, metric, scores) in &self.rows {
            out.push_str(&format!("{pair}\t{metric}"));
            for (k, v) in scores.iter().enumerate() {
                out.push('\t');
                if k == 0 {
                    out.push_str(&crate::metrics::percent(*v));
                } else {
                    out.push_str(&crate::metrics::percent(*v - scores[k - 1]));
                }
            }
            out.push('\t');
            out.push_str(&crate::metrics::percent(*scores.last().expect("base stage always present")));
            out.push('\n');
        }
        out
    }
}

/// Run the pipeline cumulatively, scoring tree similarity after each
/// stage; the last column is the fully normalized corpus.
pub fn stage_report_with(corpus: &[TreeTriple], cfg: &TransformConfig) -> StageReport {
    let mut stages = vec!["base".to_string()];
    stages.extend(cfg.order.iter().map(|r| format!("+{r}")));

    let mut corpora = vec![corpus.to_vec()];
    for k in 1..=cfg.order.len() {
        let mut partial = cfg.clone();
        partial.order = cfg.order[..k].to_vec();
        let (normalized, _) = normalize_corpus(corpus, &partial);
        corpora.push(normalized);
    }

    let pairs = [(Bank::Dm, Bank::Pas), (Bank::Dm, Bank::Psd), (Bank::Pas, Bank::Psd)];
    let mut rows = Vec::new();
    for (a, b) in pairs {
        let mut uf = Vec::new();
        let mut amf = Vec::new();
        let mut lf = Vec::new();
        for stage_corpus in &corpora {
            let mut counts = crate::metrics::TreeMatchCounts::default();
            for triple in stage_corpus {
                if let Ok(c) = crate::metrics::tree_counts(triple.tree(a), triple.tree(b)) {
                    counts.add(c);
                }
            }
            let scores = counts.score();
            uf.push(scores.uf.f);
            amf.push(scores.amf.f);
            lf.push(scores.lf.f);
        }
        let pair = format!("{}-{}", a.name(), b.name());
        rows.push((pair.clone(), "UF", uf));
        rows.push((pair.clone(), "A/M F", amf));
        rows.push((pair, "LF", lf));
    }
    StageReport { stages, rows }
}

/// [`stage_report_with`] under the default configuration.
pub fn stage_report(corpus: &[TreeTriple]) -> StageReport {
    stage_report_with(corpus, &TransformConfig::default())
}
