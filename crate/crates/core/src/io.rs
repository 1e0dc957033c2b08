//! Grammar directories: one `.rg` file per graph plus an optional manifest.
//!
//! The manifest (`manifest.tsv`) lists generated files, one per line, as
//! `DISPATCH\t<file>` for the dispatch graph and `GRAPH\t<file>` otherwise.

use std::fs;
use std::path::{Path, PathBuf};

use crate::lexicalizer::LexicalizationReport;
use crate::rtn::{parse_graph, serialize_graph, GrammarSet, Graph, GraphParseError, SetError};

pub const MANIFEST: &str = "manifest.tsv";
pub const REPORT: &str = "report.tsv";

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: GraphParseError,
    },
    #[error("{path}: malformed manifest line {line}")]
    Manifest { path: PathBuf, line: usize },
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("no main graph: pass --main, or load a directory with a manifest")]
    NoMain,
}

impl LoadError {
    /// True for failures of reading or decoding files, as opposed to
    /// well-formed input that is semantically inconsistent.
    pub fn is_format(&self) -> bool {
        matches!(self, LoadError::Io { .. } | LoadError::Parse { .. } | LoadError::Manifest { .. })
    }
}

pub(crate) fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })
}

/// File name used for a graph inside a grammar directory.
pub fn graph_file_name(name: &str) -> String {
    format!("{}.rg", name.replace('%', "%25").replace('/', "%2F"))
}

/// Parses every `.rg` file in `dir`, in file-name order.
pub fn load_graphs(dir: &Path) -> Result<Vec<Graph>, LoadError> {
    let entries = fs::read_dir(dir).map_err(|source| LoadError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut paths = Vec::new();
    for e in entries {
        let e = e.map_err(|source| LoadError::Io {
            path: dir.to_owned(),
            source,
        })?;
        let path = e.path();
        if path.extension().is_some_and(|x| x == "rg") {
            paths.push(path);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let text = read(&path)?;
            parse_graph(&text).map_err(|source| LoadError::Parse { path, source })
        })
        .collect()
}

/// Name of the dispatch graph recorded in `dir`'s manifest, if any.
pub fn manifest_dispatch(dir: &Path) -> Result<Option<String>, LoadError> {
    let path = dir.join(MANIFEST);
    if !path.exists() {
        return Ok(None);
    }
    let text = read(&path)?;
    for (i, line) in text.lines().enumerate() {
        match line.split_once('\t') {
            Some(("DISPATCH", file)) => {
                let graph = parse_graph(&read(&dir.join(file))?).map_err(|source| LoadError::Parse {
                    path: dir.join(file),
                    source,
                })?;
                return Ok(Some(graph.name));
            }
            Some(("GRAPH", _)) => {}
            _ if line.is_empty() => {}
            _ => return Err(LoadError::Manifest { path, line: i + 1 }),
        }
    }
    Ok(None)
}

/// Loads a grammar directory. The main graph is `main` if given, else the
/// manifest's dispatch graph, else the only graph of the directory.
pub fn load_grammar_dir(dir: &Path, main: Option<&str>) -> Result<GrammarSet, LoadError> {
    let graphs = load_graphs(dir)?;
    let main = match main {
        Some(m) => m.to_owned(),
        None => match manifest_dispatch(dir)? {
            Some(d) => d,
            None if graphs.len() == 1 => graphs[0].name.clone(),
            None => return Err(LoadError::NoMain),
        },
    };
    Ok(GrammarSet::new(graphs, main)?)
}

pub fn manifest(set: &GrammarSet, dispatch: Option<&str>) -> String {
    let mut out = String::new();
    for name in set.graphs.keys() {
        let tag = if Some(name.as_str()) == dispatch { "DISPATCH" } else { "GRAPH" };
        out.push_str(&format!("{tag}\t{}\n", graph_file_name(name)));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<(), LoadError> {
    fs::write(path, text).map_err(|source| LoadError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Writes generated graphs, the manifest and the report into `dir`.
pub fn write_lexicalized(dir: &Path, set: Option<&GrammarSet>, report: &LexicalizationReport) -> Result<(), LoadError> {
    fs::create_dir_all(dir).map_err(|source| LoadError::Io {
        path: dir.to_owned(),
        source,
    })?;
    let mut manifest_text = String::new();
    if let Some(set) = set {
        for g in set.graphs.values() {
            write(&dir.join(graph_file_name(&g.name)), &serialize_graph(g))?;
        }
        manifest_text = manifest(set, report.dispatch.as_deref());
    }
    write(&dir.join(MANIFEST), &manifest_text)?;
    write(&dir.join(REPORT), &report.to_tsv())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_names_escape_separators() {
        assert_eq!(graph_file_name("V[N1=ppv]-0005"), "V[N1=ppv]-0005.rg");
        assert_eq!(graph_file_name("a/b%"), "a%2Fb%25.rg");
    }
}
