//! Generation of lexicalized graph variants from parameterized graphs.
//!
//! A parameter is written `@name@` (bound to the table column `name`) or
//! `@%` (the entry identifier). For every parameterized graph and every
//! table entry, a variant named `<graph>-<entry id>` is produced:
//!
//! * value parameters are replaced textually by the cell, and the atom is
//!   parsed again, so a cell may change the shape of an atom;
//! * an alternative made of a single `@name@` atom bound to a switch column
//!   becomes `<E>` when the cell is `+` and disappears when it is `-`; a box
//!   left without alternatives disappears with its edges;
//! * `@%` becomes the entry id, which is how calls reach the variants of
//!   the same entry.
//!
//! Variants are then pruned; a variant with no initial-to-final path is
//! dropped. A dispatch graph `<main>-ALL` calls every surviving variant of
//! the main graph.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;

use crate::rtn::{parse_alternative, Atom, BoxId, BoxKind, Graph, GrammarSet};
use crate::table::{ColumnKind, Entry, Level, Table, EMPTY_VALUE};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamKind {
    Column(String),
    EntryId,
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamKind::Column(name) => write!(f, "@{name}@"),
            ParamKind::EntryId => f.write_str("@%"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParamSite {
    AtomText,
    MaskLemma,
    CallTarget,
    /// The alternative consists of this parameter alone.
    Switch,
}

/// One parameter occurrence and where it sits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamRef {
    pub kind: ParamKind,
    pub site: ParamSite,
    pub box_id: BoxId,
    pub alternative: usize,
    pub atom: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece<'a> {
    Text(&'a str),
    Param(ParamKind),
}

fn split_params(text: &str) -> Result<Vec<Piece<'_>>, String> {
    let mut pieces = Vec::new();
    let mut rest = text;
    while let Some(at) = rest.find('@') {
        if at > 0 {
            pieces.push(Piece::Text(&rest[..at]));
        }
        let after = &rest[at + 1..];
        if let Some(tail) = after.strip_prefix('%') {
            pieces.push(Piece::Param(ParamKind::EntryId));
            rest = tail;
            continue;
        }
        match after.find('@') {
            Some(0) => return Err(format!("empty parameter name in {text:?}")),
            Some(end) => {
                pieces.push(Piece::Param(ParamKind::Column(after[..end].to_owned())));
                rest = &after[end + 1..];
            }
            None => return Err(format!("unbalanced '@' in {text:?}")),
        }
    }
    if !rest.is_empty() {
        pieces.push(Piece::Text(rest));
    }
    Ok(pieces)
}

/// The column named by a whole-alternative switch site, if `alt` is one.
fn switch_site(alt: &[Atom]) -> Option<&str> {
    match alt {
        [Atom::Literal(text)] => {
            let name = text.strip_prefix('@')?.strip_suffix('@')?;
            (!name.is_empty() && !name.contains(['@', '%'])).then_some(name)
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexicalizeError {
    #[error("graph {graph}: malformed parameter: {message}")]
    MalformedParameter { graph: String, message: String },
    #[error("graph {graph}: parameter @{column}@ names no column of table {table}")]
    UnknownColumn {
        graph: String,
        column: String,
        table: String,
    },
    #[error("unknown entry {0:?}")]
    UnknownEntry(String),
    #[error("graph {graph}: switch parameter @{column}@ must form a whole alternative")]
    MisplacedSwitch { graph: String, column: String },
    #[error("graph {graph}: substitution produced {text:?}: {message}")]
    InvalidSubstitution {
        graph: String,
        text: String,
        message: String,
    },
    #[error("graph {graph}: call into dropped variant {target}")]
    CallIntoDropped { graph: String, target: String },
    #[error("generated graph {0} clashes with an existing graph")]
    NameClash(String),
    #[error("graph {graph}: residual parameter {param} after the lexical pass")]
    ResidualParameter { graph: String, param: String },
    #[error("graph {graph}: pass-through parameter @{column}@ names no column of lexical table {table}")]
    PassThroughUnknownColumn {
        graph: String,
        column: String,
        table: String,
    },
    #[error("table {table} has level {found}, expected {expected}")]
    WrongLevel {
        table: String,
        found: Level,
        expected: Level,
    },
}

/// Lists every parameter occurrence in box, alternative and atom order.
pub fn scan_parameters(graph: &Graph) -> Result<Vec<ParamRef>, LexicalizeError> {
    let malformed = |message| LexicalizeError::MalformedParameter {
        graph: graph.name.clone(),
        message,
    };
    let mut out = Vec::new();
    for b in graph.boxes.values().filter(|b| b.kind == BoxKind::Plain) {
        for (ai, alt) in b.alternatives.iter().enumerate() {
            let whole = switch_site(alt).is_some();
            for (ti, atom) in alt.iter().enumerate() {
                let fields: Vec<(&str, ParamSite)> = match atom {
                    Atom::Literal(t) => vec![(t, ParamSite::AtomText)],
                    Atom::Call(t) => vec![(t, ParamSite::CallTarget)],
                    Atom::Mask(m) => {
                        let mut v = Vec::new();
                        if let Some(l) = &m.lemma {
                            v.push((l.as_str(), ParamSite::MaskLemma));
                        }
                        if let Some(p) = &m.pos {
                            v.push((p.as_str(), ParamSite::AtomText));
                        }
                        v.push((m.features.as_str(), ParamSite::AtomText));
                        v
                    }
                    Atom::Epsilon => Vec::new(),
                };
                for (text, site) in fields {
                    for piece in split_params(text).map_err(malformed)? {
                        if let Piece::Param(kind) = piece {
                            out.push(ParamRef {
                                kind,
                                site: if whole { ParamSite::Switch } else { site },
                                box_id: b.id,
                                alternative: ai,
                                atom: ti,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Graphs whose variants depend on the entry: those holding parameters, and
/// those calling such a graph by its plain name.
pub fn parameterized_graphs(graphs: &BTreeMap<String, Graph>) -> Result<BTreeSet<String>, LexicalizeError> {
    let mut family = BTreeSet::new();
    for (name, g) in graphs {
        if !scan_parameters(g)?.is_empty() {
            family.insert(name.clone());
        }
    }
    loop {
        let added: Vec<String> = graphs
            .iter()
            .filter(|(n, _)| !family.contains(*n))
            .filter(|(_, g)| g.call_targets().any(|t| !t.contains('@') && family.contains(t)))
            .map(|(n, _)| n.clone())
            .collect();
        if added.is_empty() {
            return Ok(family);
        }
        family.extend(added);
    }
}

pub fn variant_name(base: &str, entry_id: &str) -> String {
    format!("{base}-{entry_id}")
}

pub fn dispatch_name(main: &str) -> String {
    format!("{main}-ALL")
}

struct Substitution<'a> {
    table: &'a Table,
    entry: &'a Entry,
    family: &'a BTreeSet<String>,
    graph: &'a str,
}

impl Substitution<'_> {
    fn cell(&self, column: &str) -> Result<(&str, ColumnKind), LexicalizeError> {
        let schema = self.table.column(column).ok_or_else(|| LexicalizeError::UnknownColumn {
            graph: self.graph.to_owned(),
            column: column.to_owned(),
            table: self.table.name.clone(),
        })?;
        let text = self
            .table
            .lookup(&self.entry.id, column)
            .map_err(|_| LexicalizeError::UnknownEntry(self.entry.id.clone()))?;
        Ok((text, schema.kind))
    }

    fn atom(&self, atom: &Atom) -> Result<Vec<Atom>, LexicalizeError> {
        let text = atom.to_string();
        let pieces = split_params(&text).map_err(|message| LexicalizeError::MalformedParameter {
            graph: self.graph.to_owned(),
            message,
        })?;
        if !pieces.iter().any(|p| matches!(p, Piece::Param(_))) {
            return Ok(vec![match atom {
                Atom::Call(target) if self.family.contains(target) => {
                    Atom::Call(variant_name(target, &self.entry.id))
                }
                other => other.clone(),
            }]);
        }
        let whole = pieces.len() == 1;
        let mut out = String::new();
        for piece in &pieces {
            match piece {
                Piece::Text(t) => out.push_str(t),
                Piece::Param(ParamKind::EntryId) => out.push_str(&self.entry.id),
                Piece::Param(ParamKind::Column(c)) => {
                    let (cell, kind) = self.cell(c)?;
                    if kind == ColumnKind::Switch {
                        return Err(LexicalizeError::MisplacedSwitch {
                            graph: self.graph.to_owned(),
                            column: c.clone(),
                        });
                    }
                    if cell != EMPTY_VALUE || whole {
                        out.push_str(cell);
                    }
                }
            }
        }
        let atoms = parse_alternative(&out).map_err(|message| LexicalizeError::InvalidSubstitution {
            graph: self.graph.to_owned(),
            text: out.clone(),
            message,
        })?;
        Ok(if atoms.is_empty() { vec![Atom::Epsilon] } else { atoms })
    }

    fn graph(&self, graph: &Graph) -> Result<Option<Graph>, LexicalizeError> {
        let mut out = graph.clone();
        out.name = variant_name(&graph.name, &self.entry.id);
        let mut emptied = Vec::new();
        for b in out.boxes.values_mut().filter(|b| b.kind == BoxKind::Plain) {
            let mut alternatives: Vec<Vec<Atom>> = Vec::with_capacity(b.alternatives.len());
            for alt in &b.alternatives {
                if let Some(column) = switch_site(alt) {
                    let (cell, kind) = self.cell(column)?;
                    if kind == ColumnKind::Switch {
                        if cell == "+" && !alternatives.contains(&vec![Atom::Epsilon]) {
                            alternatives.push(vec![Atom::Epsilon]);
                        }
                        continue;
                    }
                }
                let mut atoms = Vec::with_capacity(alt.len());
                for atom in alt {
                    atoms.extend(self.atom(atom)?);
                }
                if !alternatives.contains(&atoms) {
                    alternatives.push(atoms);
                }
            }
            if alternatives.is_empty() {
                emptied.push(b.id);
            }
            b.alternatives = alternatives;
        }
        for id in &emptied {
            out.boxes.remove(id);
        }
        out.edges.retain(|(s, d)| !emptied.contains(s) && !emptied.contains(d));
        Ok(out.prune())
    }
}

fn substitute(
    graph: &Graph,
    table: &Table,
    entry_id: &str,
    family: &BTreeSet<String>,
) -> Result<Option<Graph>, LexicalizeError> {
    let entry = table
        .entry(entry_id)
        .ok_or_else(|| LexicalizeError::UnknownEntry(entry_id.to_owned()))?;
    Substitution {
        table,
        entry,
        family,
        graph: &graph.name,
    }
    .graph(graph)
}

/// Produces the variant of `graph` for one table entry, or `None` when the
/// entry's switches leave no initial-to-final path.
pub fn substitute_entry(graph: &Graph, table: &Table, entry_id: &str) -> Result<Option<Graph>, LexicalizeError> {
    substitute(graph, table, entry_id, &BTreeSet::new())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DropReason {
    /// Switch traits interrupted every initial-to-final path.
    NoPath,
}

impl fmt::Display for DropReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DropReason::NoPath => f.write_str("no path from initial to final"),
        }
    }
}

/// What happened to every (graph, entry) pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LexicalizationReport {
    pub variants: BTreeMap<(String, String), String>,
    pub dropped: BTreeMap<(String, String), DropReason>,
    /// The generated dispatch graph, when one survived.
    pub dispatch: Option<String>,
    /// A dispatch graph that was not generated because it would call nothing.
    pub dropped_dispatch: Option<String>,
}

impl LexicalizationReport {
    fn merge(&mut self, other: LexicalizationReport) {
        self.variants.extend(other.variants);
        self.dropped.extend(other.dropped);
    }

    /// Tab-separated lines: graph, entry, `kept|dropped`, reason.
    pub fn to_tsv(&self) -> String {
        let mut rows: BTreeMap<(&str, &str), String> = BTreeMap::new();
        for (g, e) in self.variants.keys() {
            rows.insert((g, e), "kept\t-".into());
        }
        for ((g, e), why) in &self.dropped {
            rows.insert((g, e), format!("dropped\t{why}"));
        }
        let mut out = String::new();
        for ((g, e), status) in rows {
            out.push_str(&format!("{g}\t{e}\t{status}\n"));
        }
        if let Some(d) = &self.dropped_dispatch {
            out.push_str(&format!("{d}\t-\tdropped\tno surviving variants\n"));
        }
        out
    }
}

/// Output of a lexicalization run. `set` is `None` when the main graph had
/// no surviving variant, so that not even the dispatch graph exists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicalization {
    pub set: Option<GrammarSet>,
    pub report: LexicalizationReport,
}

struct Pass {
    graphs: BTreeMap<String, Graph>,
    report: LexicalizationReport,
    /// Roots replaced by their surviving variants; roots without parameters stay.
    resolved_roots: Vec<String>,
    any_root_parameterized: bool,
}

fn run_pass(graphs: &BTreeMap<String, Graph>, table: &Table, roots: &[String]) -> Result<Pass, LexicalizeError> {
    let family = parameterized_graphs(graphs)?;
    for name in &family {
        for p in scan_parameters(&graphs[name])? {
            if let ParamKind::Column(column) = p.kind {
                if table.column(&column).is_none() {
                    return Err(LexicalizeError::UnknownColumn {
                        graph: name.clone(),
                        column,
                        table: table.name.clone(),
                    });
                }
            }
        }
    }

    let pairs: Vec<(&String, &str)> = family
        .iter()
        .flat_map(|g| table.entry_ids().map(move |e| (g, e)))
        .collect();
    let generated: Vec<Option<Graph>> = pairs
        .par_iter()
        .map(|(g, e)| substitute(&graphs[*g], table, e, &family))
        .collect::<Result<_, _>>()?;

    let mut out: BTreeMap<String, Graph> = graphs
        .iter()
        .filter(|(n, _)| !family.contains(*n))
        .map(|(n, g)| (n.clone(), g.clone()))
        .collect();
    let mut report = LexicalizationReport::default();
    let mut dropped_names = BTreeSet::new();
    for ((g, e), variant) in pairs.iter().zip(generated) {
        let key = ((*g).clone(), (*e).to_owned());
        match variant {
            Some(v) => {
                report.variants.insert(key, v.name.clone());
                if out.contains_key(&v.name) {
                    return Err(LexicalizeError::NameClash(v.name));
                }
                out.insert(v.name.clone(), v);
            }
            None => {
                dropped_names.insert(variant_name(g, e));
                report.dropped.insert(key, DropReason::NoPath);
            }
        }
    }
    for v in report.variants.values() {
        if let Some(target) = out[v].call_targets().find(|t| dropped_names.contains(*t)) {
            return Err(LexicalizeError::CallIntoDropped {
                graph: v.clone(),
                target: target.to_owned(),
            });
        }
    }

    let mut resolved_roots = Vec::new();
    let mut any_root_parameterized = false;
    for root in roots {
        if family.contains(root) {
            any_root_parameterized = true;
            resolved_roots.extend(
                report
                    .variants
                    .range((root.clone(), String::new())..)
                    .take_while(|((g, _), _)| g == root)
                    .map(|(_, v)| v.clone()),
            );
        } else if out.contains_key(root) {
            resolved_roots.push(root.clone());
        }
    }
    Ok(Pass {
        graphs: out,
        report,
        resolved_roots,
        any_root_parameterized,
    })
}

fn finish(main: &str, mut pass: Pass) -> Result<Lexicalization, LexicalizeError> {
    if !pass.any_root_parameterized {
        let set = GrammarSet::new(pass.graphs.into_values(), main).ok();
        return Ok(Lexicalization { set, report: pass.report });
    }
    let name = dispatch_name(main);
    if pass.resolved_roots.is_empty() {
        pass.report.dropped_dispatch = Some(name);
        return Ok(Lexicalization {
            set: None,
            report: pass.report,
        });
    }
    if pass.graphs.contains_key(&name) {
        return Err(LexicalizeError::NameClash(name));
    }
    let alternatives = pass.resolved_roots.iter().map(|v| vec![Atom::call(v.as_str())]).collect();
    pass.graphs.insert(name.clone(), Graph::single_box(name.as_str(), alternatives));
    pass.report.dispatch = Some(name.clone());
    let set = GrammarSet::new(pass.graphs.into_values(), name.as_str()).ok();
    Ok(Lexicalization { set, report: pass.report })
}

/// Lexicalizes every parameterized graph of `set` against every entry of
/// `table`, and adds the dispatch graph when the main graph is parameterized.
pub fn lexicalize_set(set: &GrammarSet, table: &Table) -> Result<Lexicalization, LexicalizeError> {
    let pass = run_pass(&set.graphs, table, std::slice::from_ref(&set.main))?;
    finish(&set.main, pass)
}

fn require_level(table: &Table, expected: Level) -> Result<(), LexicalizeError> {
    if table.level == expected {
        Ok(())
    } else {
        Err(LexicalizeError::WrongLevel {
            table: table.name.clone(),
            found: table.level,
            expected,
        })
    }
}

/// Class-level pass followed by a lexical pass over its output. Pass-through
/// cells of the class table must name columns of the lexical table, and no
/// parameter may remain afterwards.
pub fn lexicalize_two_pass(
    set: &GrammarSet,
    class_table: &Table,
    lexical_table: &Table,
) -> Result<Lexicalization, LexicalizeError> {
    require_level(class_table, Level::Class)?;
    require_level(lexical_table, Level::Lexical)?;

    let first = run_pass(&set.graphs, class_table, std::slice::from_ref(&set.main))?;
    for (name, g) in &first.graphs {
        for p in scan_parameters(g)? {
            if let ParamKind::Column(column) = p.kind {
                if lexical_table.column(&column).is_none() {
                    return Err(LexicalizeError::PassThroughUnknownColumn {
                        graph: name.clone(),
                        column,
                        table: lexical_table.name.clone(),
                    });
                }
            }
        }
    }
    let class_rooted = first.any_root_parameterized;
    let mut second = run_pass(&first.graphs, lexical_table, &first.resolved_roots)?;
    for (name, g) in &second.graphs {
        if let Some(p) = scan_parameters(g)?.into_iter().next() {
            return Err(LexicalizeError::ResidualParameter {
                graph: name.clone(),
                param: p.kind.to_string(),
            });
        }
    }
    second.any_root_parameterized |= class_rooted;
    let mut report = first.report;
    report.merge(std::mem::take(&mut second.report));
    second.report = report;
    finish(&set.main, second)
}
