//! Python bindings for the `lexigraph` crate.

use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use lexigraph::eval;
use lexigraph::io::{load_grammar_dir, write_lexicalized, LoadError};
use lexigraph::lexicalizer;
use lexigraph::lexicon as lex;
use lexigraph::matcher::{self, MatchMode, MatchPolicy};
use lexigraph::rtn;
use lexigraph::table as tbl;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn load_error(e: LoadError) -> PyErr {
    match e {
        LoadError::Io { .. } => PyOSError::new_err(e.to_string()),
        other => value_error(other),
    }
}

fn policy(mode: &str, max_depth: usize, fold_case: bool) -> PyResult<MatchPolicy> {
    let mode = match mode {
        "all" => MatchMode::All,
        "longest" => MatchMode::LongestPerStart,
        other => return Err(value_error(format!("mode must be 'all' or 'longest', not {other:?}"))),
    };
    MatchPolicy::new(mode, max_depth, fold_case).map_err(value_error)
}

/// One RTN graph.
#[pyclass(module = "lexigraph", frozen, from_py_object)]
#[derive(Clone)]
struct Graph {
    inner: rtn::Graph,
}

#[pymethods]
impl Graph {
    /// Parse a graph from its text form.
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        rtn::parse_graph(text)
            .map(|inner| Graph { inner })
            .map_err(value_error)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    fn calls(&self) -> Vec<String> {
        self.inner.call_targets().map(str::to_owned).collect()
    }

    fn has_parameters(&self) -> bool {
        self.inner.has_parameters()
    }

    fn to_text(&self) -> String {
        rtn::serialize_graph(&self.inner)
    }

    fn to_dot(&self) -> String {
        rtn::export_dot(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!("Graph({:?}, boxes={})", self.inner.name, self.inner.boxes.len())
    }
}

/// Named graphs with a main graph.
#[pyclass(module = "lexigraph", frozen, skip_from_py_object)]
#[derive(Clone)]
struct GrammarSet {
    inner: rtn::GrammarSet,
}

#[pymethods]
impl GrammarSet {
    #[new]
    fn new(graphs: Vec<Graph>, main: String) -> PyResult<Self> {
        rtn::GrammarSet::new(graphs.into_iter().map(|g| g.inner), main)
            .map(|inner| GrammarSet { inner })
            .map_err(value_error)
    }

    /// Load every `.rg` file of a directory.
    #[staticmethod]
    #[pyo3(signature = (path, main = None))]
    fn load(path: PathBuf, main: Option<&str>) -> PyResult<Self> {
        load_grammar_dir(&path, main)
            .map(|inner| GrammarSet { inner })
            .map_err(load_error)
    }

    #[getter]
    fn main(&self) -> &str {
        &self.inner.main
    }

    fn names(&self) -> Vec<String> {
        self.inner.graphs.keys().cloned().collect()
    }

    fn get(&self, name: &str) -> Option<Graph> {
        self.inner.get(name).map(|g| Graph { inner: g.clone() })
    }

    /// Diagnostics as strings; empty when the set is well formed.
    #[pyo3(signature = (require_resolved = false))]
    fn validate(&self, require_resolved: bool) -> Vec<String> {
        rtn::validate_set(&self.inner, require_resolved)
            .iter()
            .map(|d| d.to_string())
            .collect()
    }

    /// Graph name to text form.
    fn to_texts(&self) -> BTreeMap<String, String> {
        self.inner.serialize().into_iter().collect()
    }

    fn __len__(&self) -> usize {
        self.inner.graphs.len()
    }

    fn __repr__(&self) -> String {
        format!("GrammarSet(main={:?}, graphs={})", self.inner.main, self.inner.graphs.len())
    }
}

#[pyclass(module = "lexigraph", frozen)]
struct Table {
    inner: tbl::Table,
}

#[pymethods]
impl Table {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        tbl::parse_table(text).map(|inner| Table { inner }).map_err(value_error)
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn level(&self) -> String {
        self.inner.level.to_string()
    }

    fn columns(&self) -> Vec<(String, String)> {
        self.inner
            .schema()
            .iter()
            .map(|c| (c.name.clone(), c.kind.as_str().to_owned()))
            .collect()
    }

    fn entry_ids(&self) -> Vec<String> {
        self.inner.entry_ids().map(str::to_owned).collect()
    }

    fn lookup(&self, entry_id: &str, column: &str) -> PyResult<String> {
        self.inner.lookup(entry_id, column).map(str::to_owned).map_err(value_error)
    }

    fn to_text(&self) -> String {
        tbl::serialize_table(&self.inner)
    }
}

#[pyclass(module = "lexigraph", frozen)]
struct Lexicon {
    inner: lex::Lexicon,
}

#[pymethods]
impl Lexicon {
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        lex::parse_lexicon(text).map(|inner| Lexicon { inner }).map_err(value_error)
    }

    /// Readings of a form as (lemma, pos, features) triples.
    fn lookup(&self, form: &str) -> Vec<(String, String, String)> {
        self.inner
            .lookup(form)
            .map(|e| (e.lemma.clone(), e.pos.clone(), e.features.iter().collect()))
            .collect()
    }

    fn to_text(&self) -> String {
        lex::serialize_lexicon(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(module = "lexigraph", frozen, get_all)]
struct Lexicalization {
    grammar: Option<GrammarSet>,
    /// (graph, entry id, variant name) triples.
    variants: Vec<(String, String, String)>,
    /// (graph, entry id, reason) triples.
    dropped: Vec<(String, String, String)>,
    dispatch: Option<String>,
    report_tsv: String,
}

impl From<lexicalizer::Lexicalization> for Lexicalization {
    fn from(l: lexicalizer::Lexicalization) -> Self {
        let r = &l.report;
        Lexicalization {
            variants: r
                .variants
                .iter()
                .map(|((g, e), n)| (g.clone(), e.clone(), n.clone()))
                .collect(),
            dropped: r
                .dropped
                .iter()
                .map(|((g, e), why)| (g.clone(), e.clone(), why.to_string()))
                .collect(),
            dispatch: r.dispatch.clone(),
            report_tsv: r.to_tsv(),
            grammar: l.set.map(|inner| GrammarSet { inner }),
        }
    }
}

/// Lexicalize a grammar against one table, or against a class table and a
/// lexical table when `lexical_table` is given. Writes the result to `out`
/// when a directory is passed.
#[pyfunction]
#[pyo3(signature = (grammar, table, lexical_table = None, out = None))]
fn lexicalize(
    grammar: &GrammarSet,
    table: &Table,
    lexical_table: Option<&Table>,
    out: Option<PathBuf>,
) -> PyResult<Lexicalization> {
    let result = match lexical_table {
        None => lexicalizer::lexicalize_set(&grammar.inner, &table.inner),
        Some(l) => lexicalizer::lexicalize_two_pass(&grammar.inner, &table.inner, &l.inner),
    }
    .map_err(value_error)?;
    if let Some(dir) = out {
        write_lexicalized(&dir, result.set.as_ref(), &result.report).map_err(load_error)?;
    }
    Ok(result.into())
}

#[pyclass(module = "lexigraph", frozen, get_all, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Match {
    start_token: usize,
    end_token: usize,
    graph: String,
    entry_id: Option<String>,
}

#[pymethods]
impl Match {
    fn __repr__(&self) -> String {
        format!("Match({}, {}, {:?})", self.start_token, self.end_token, self.graph)
    }
}

/// Split text into (text, start, end) tokens; offsets count characters.
#[pyfunction]
fn tokenize(text: &str) -> Vec<(String, usize, usize)> {
    matcher::tokenize(text).into_iter().map(|t| (t.text, t.start, t.end)).collect()
}

/// Match the main graph of `grammar` on `text`.
#[pyfunction]
#[pyo3(signature = (grammar, lexicon, text, mode = "longest", max_depth = 16, fold_case = false))]
fn match_text(
    grammar: &GrammarSet,
    lexicon: &Lexicon,
    text: &str,
    mode: &str,
    max_depth: usize,
    fold_case: bool,
) -> PyResult<Vec<Match>> {
    let policy = policy(mode, max_depth, fold_case)?;
    let found = matcher::match_corpus(&grammar.inner, &lexicon.inner, text, &policy).map_err(value_error)?;
    Ok(found
        .into_iter()
        .map(|m| Match {
            start_token: m.start_token,
            end_token: m.end_token,
            graph: m.graph,
            entry_id: m.entry_id,
        })
        .collect())
}

/// End positions of the spans of `text` starting at token `pos` that `graph` accepts.
#[pyfunction]
#[pyo3(signature = (grammar, lexicon, text, pos, graph, max_depth = 16, fold_case = false))]
fn match_at(
    grammar: &GrammarSet,
    lexicon: &Lexicon,
    text: &str,
    pos: usize,
    graph: &str,
    max_depth: usize,
    fold_case: bool,
) -> PyResult<Vec<usize>> {
    let policy = policy("all", max_depth, fold_case)?;
    let tokens = matcher::tokenize(text);
    matcher::match_at(&grammar.inner, &lexicon.inner, &tokens, pos, graph, &policy)
        .map(|ends| ends.into_iter().collect())
        .map_err(value_error)
}

/// Score a match file against a gold file (both as text). Returns the
/// report's key/value lines as a dict of strings.
#[pyfunction]
fn score(matches_tsv: &str, gold_tsv: &str) -> PyResult<BTreeMap<String, String>> {
    let matches = eval::parse_match_file(matches_tsv).map_err(value_error)?;
    let gold = eval::load_gold(gold_tsv).map_err(value_error)?;
    let report = eval::score(&matches, &gold);
    Ok(report
        .to_kv()
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect())
}

#[pymodule(name = "lexigraph")]
fn lexigraph_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Graph>()?;
    m.add_class::<GrammarSet>()?;
    m.add_class::<Table>()?;
    m.add_class::<Lexicon>()?;
    m.add_class::<Lexicalization>()?;
    m.add_class::<Match>()?;
    m.add_function(wrap_pyfunction!(lexicalize, m)?)?;
    m.add_function(wrap_pyfunction!(tokenize, m)?)?;
    m.add_function(wrap_pyfunction!(match_text, m)?)?;
    m.add_function(wrap_pyfunction!(match_at, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    Ok(())
}
