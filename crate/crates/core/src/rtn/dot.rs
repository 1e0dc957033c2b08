use std::fmt::Write;

use super::format::render_atom;
use super::{BoxKind, Graph};

fn escape_record(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if matches!(c, '{' | '}' | '|' | '<' | '>' | '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

fn quote(text: &str) -> String {
    format!("\"{}\"", text.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Renders a graph in Graphviz DOT. Boxes are records with one field per
/// alternative; output order follows box ids.
pub fn export_dot(graph: &Graph) -> String {
    let mut out = String::new();
    writeln!(out, "digraph {} {{", quote(&graph.name)).unwrap();
    writeln!(out, "  rankdir=LR;").unwrap();
    for c in &graph.comments {
        writeln!(out, "  // {}", c.replace('\n', " ")).unwrap();
    }
    for b in graph.boxes.values() {
        match b.kind {
            BoxKind::Initial => writeln!(out, "  b{} [shape=circle, label=\"\"];", b.id).unwrap(),
            BoxKind::Final => writeln!(out, "  b{} [shape=doublecircle, label=\"\"];", b.id).unwrap(),
            BoxKind::Plain => {
                let fields: Vec<String> = b
                    .alternatives
                    .iter()
                    .map(|alt| {
                        let text: Vec<String> = alt.iter().map(render_atom).collect();
                        escape_record(&text.join(" "))
                    })
                    .collect();
                writeln!(
                    out,
                    "  b{} [shape=record, label=\"{}\"];",
                    b.id,
                    fields.join("|")
                )
                .unwrap();
            }
        }
    }
    for (s, d) in &graph.edges {
        writeln!(out, "  b{s} -> b{d};").unwrap();
    }
    out.push_str("}\n");
    out
}
