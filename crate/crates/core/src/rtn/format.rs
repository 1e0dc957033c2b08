//! Line-oriented graph files (`.rg`).
//!
//! ```text
//! GRAPH P
//! # Luc a vu le lit
//! BOX 0 INITIAL
//! BOX 1 PLAIN
//! ALT 1 que
//! ALT 1 qu'
//! BOX 2 FINAL
//! EDGE 0 1
//! EDGE 1 2
//! ```
//!
//! Atoms: a bare word is a literal, `<E>` is epsilon, `<lemma.POS:codes>` is a
//! lexical mask and `:Name` is a call. A leading backslash forces a literal.

use std::collections::BTreeMap;

use super::{Atom, BoxId, BoxKind, Graph, GraphBox, LexicalMask, Violation};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate box id {id}")]
    DuplicateBox { line: usize, id: BoxId },
    #[error("{0}")]
    Invalid(Violation),
}

fn syntax(line: usize, message: impl Into<String>) -> GraphParseError {
    GraphParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Parses one atom from its source text.
pub fn parse_atom(word: &str) -> Result<Atom, String> {
    if word.is_empty() {
        return Err("empty atom".into());
    }
    if let Some(rest) = word.strip_prefix('\\') {
        if !rest.is_empty() {
            return Ok(Atom::Literal(rest.to_owned()));
        }
    }
    if word == "<E>" {
        return Ok(Atom::Epsilon);
    }
    if word.len() >= 2 && word.starts_with('<') && word.ends_with('>') {
        let inner = &word[1..word.len() - 1];
        if inner.contains(['<', '>']) {
            return Err(format!("malformed lexical mask {word:?}"));
        }
        let (head, features) = match inner.split_once(':') {
            Some((h, f)) => (h, f),
            None => (inner, ""),
        };
        let (lemma, pos) = match head.rsplit_once('.') {
            Some((l, p)) => (l, p),
            None => (head, ""),
        };
        let mask = LexicalMask::new(Some(lemma), Some(pos), features);
        if mask.is_empty() {
            return Err(format!("empty lexical mask {word:?}"));
        }
        return Ok(Atom::Mask(mask));
    }
    if let Some(target) = word.strip_prefix(':') {
        if !target.is_empty() {
            return Ok(Atom::Call(target.to_owned()));
        }
    }
    Ok(Atom::Literal(word.to_owned()))
}

/// Parses a whitespace-separated atom sequence.
pub fn parse_alternative(text: &str) -> Result<Vec<Atom>, String> {
    text.split_whitespace().map(parse_atom).collect()
}

fn literal_needs_escape(text: &str) -> bool {
    (text.len() >= 2 && text.starts_with('\\'))
        || (text.len() >= 2 && text.starts_with('<') && text.ends_with('>'))
        || (text.len() >= 2 && text.starts_with(':'))
}

pub(crate) fn render_atom(atom: &Atom) -> String {
    match atom {
        Atom::Literal(text) if literal_needs_escape(text) => format!("\\{text}"),
        Atom::Literal(text) => text.clone(),
        Atom::Mask(mask) => mask.to_string(),
        Atom::Call(target) => format!(":{target}"),
        Atom::Epsilon => "<E>".into(),
    }
}

pub(crate) fn render_alternative(alt: &[Atom]) -> String {
    alt.iter().map(render_atom).collect::<Vec<_>>().join(" ")
}

fn parse_kind(word: &str) -> Option<BoxKind> {
    match word {
        "INITIAL" => Some(BoxKind::Initial),
        "FINAL" => Some(BoxKind::Final),
        "PLAIN" => Some(BoxKind::Plain),
        _ => None,
    }
}

fn parse_id(word: Option<&str>, line: usize) -> Result<BoxId, GraphParseError> {
    let word = word.ok_or_else(|| syntax(line, "missing box id"))?;
    word.parse()
        .map_err(|_| syntax(line, format!("invalid box id {word:?}")))
}

/// Parses a graph file. The result satisfies every box and edge invariant.
pub fn parse_graph(text: &str) -> Result<Graph, GraphParseError> {
    let mut name: Option<String> = None;
    let mut comments = Vec::new();
    let mut kinds: BTreeMap<BoxId, (BoxKind, usize)> = BTreeMap::new();
    let mut alts: BTreeMap<BoxId, Vec<(Vec<Atom>, usize)>> = BTreeMap::new();
    let mut edges = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            comments.push(comment.strip_prefix(' ').unwrap_or(comment).to_owned());
            continue;
        }
        let (keyword, rest) = trimmed
            .split_once(char::is_whitespace)
            .map(|(k, r)| (k, r.trim_start()))
            .unwrap_or((trimmed, ""));
        if name.is_none() && keyword != "GRAPH" {
            return Err(syntax(line, "expected GRAPH line first"));
        }
        match keyword {
            "GRAPH" => {
                if name.is_some() {
                    return Err(syntax(line, "more than one GRAPH line"));
                }
                let mut words = rest.split_whitespace();
                let n = words.next().ok_or_else(|| syntax(line, "missing graph name"))?;
                if words.next().is_some() {
                    return Err(syntax(line, "graph name must be a single word"));
                }
                name = Some(n.to_owned());
            }
            "BOX" => {
                let mut words = rest.split_whitespace();
                let id = parse_id(words.next(), line)?;
                let kind_word = words.next().ok_or_else(|| syntax(line, "missing box kind"))?;
                let kind = parse_kind(kind_word)
                    .ok_or_else(|| syntax(line, format!("unknown box kind {kind_word:?}")))?;
                if words.next().is_some() {
                    return Err(syntax(line, "trailing text after box kind"));
                }
                if kinds.insert(id, (kind, line)).is_some() {
                    return Err(GraphParseError::DuplicateBox { line, id });
                }
            }
            "ALT" => {
                let (id_word, atoms) = rest
                    .split_once(char::is_whitespace)
                    .unwrap_or((rest, ""));
                let id = parse_id(Some(id_word).filter(|w| !w.is_empty()), line)?;
                let atoms = parse_alternative(atoms).map_err(|m| syntax(line, m))?;
                if atoms.is_empty() {
                    return Err(syntax(line, "alternative without atoms"));
                }
                alts.entry(id).or_default().push((atoms, line));
            }
            "EDGE" => {
                let mut words = rest.split_whitespace();
                let src = parse_id(words.next(), line)?;
                let dst = parse_id(words.next(), line)?;
                if words.next().is_some() {
                    return Err(syntax(line, "trailing text after edge"));
                }
                edges.push((src, dst));
            }
            other => return Err(syntax(line, format!("unknown keyword {other:?}"))),
        }
    }

    let name = name.ok_or_else(|| syntax(1, "missing GRAPH line"))?;
    let mut graph = Graph::new(name);
    graph.comments = comments;
    for (&id, &(kind, _)) in &kinds {
        let own = alts.remove(&id).unwrap_or_default();
        let b = match kind {
            BoxKind::Plain if own.is_empty() => {
                return Err(GraphParseError::Invalid(Violation::EmptyBox(id)))
            }
            BoxKind::Plain => GraphBox::plain(id, own.into_iter().map(|(a, _)| a).collect()),
            _ => {
                if let Some((_, line)) = own.first() {
                    return Err(syntax(*line, format!("initial/final box {id} takes no ALT lines")));
                }
                GraphBox::endpoint(id, kind)
            }
        };
        graph.add_box(b);
    }
    if let Some((id, entries)) = alts.into_iter().next() {
        return Err(syntax(entries[0].1, format!("ALT for undeclared box {id}")));
    }
    graph.edges.extend(edges);
    if let Some(v) = graph.check().into_iter().next() {
        return Err(GraphParseError::Invalid(v));
    }
    Ok(graph)
}

/// Writes a graph in the `.rg` format; [`parse_graph`] reads it back unchanged.
pub fn serialize_graph(graph: &Graph) -> String {
    let mut out = format!("GRAPH {}\n", graph.name);
    for c in &graph.comments {
        if c.is_empty() {
            out.push_str("#\n");
        } else {
            out.push_str(&format!("# {c}\n"));
        }
    }
    for b in graph.boxes.values() {
        out.push_str(&format!("BOX {} {}\n", b.id, b.kind.as_str()));
        if b.kind == BoxKind::Plain {
            for alt in &b.alternatives {
                out.push_str(&format!("ALT {} {}\n", b.id, render_alternative(alt)));
            }
        }
    }
    for (s, d) in &graph.edges {
        out.push_str(&format!("EDGE {s} {d}\n"));
    }
    out
}
