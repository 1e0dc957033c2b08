//! Helpers shared by the integration suites: fixture loading, a brute-force
//! language enumerator that knows nothing about the matcher, and seeded
//! generators of random grammars, tables and lexicons.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use lexigraph::io::load_grammar_dir;
use lexigraph::lexicon::{LexEntry, Lexicon};
use lexigraph::matcher::{tokenize, Token};
use lexigraph::rtn::{Atom, BoxKind, GrammarSet, Graph, GraphBox, LexicalMask};
use lexigraph::table::{ColumnKind, ColumnSchema, Level, Table};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn fixture_set(dir: &str, main: &str) -> GrammarSet {
    load_grammar_dir(&fixture(dir), Some(main)).expect("fixture grammar loads")
}

pub fn fixture_text(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).expect("fixture file readable")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn words(tokens: &[&str]) -> Vec<Token> {
    tokenize(&tokens.join(" "))
}

// ---------------------------------------------------------------------------
// Oracle

/// What a single token position must satisfy along one path.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sym {
    Lit(String),
    Mask(LexicalMask),
}

/// Enumerates, by exhaustive path expansion, every symbol sequence of length
/// at most `max_len` that a graph of an acyclic set accepts.
pub struct Oracle<'a> {
    set: &'a GrammarSet,
    max_len: usize,
    /// Read whole-alternative `@name@` literals as the empty sequence.
    pub switches_as_epsilon: bool,
    memo: BTreeMap<String, BTreeSet<Vec<Sym>>>,
}

fn is_switch(alt: &[Atom]) -> bool {
    matches!(alt, [Atom::Literal(s)] if s.len() > 2 && s.starts_with('@') && s.ends_with('@'))
}

fn concat(left: &BTreeSet<Vec<Sym>>, right: &BTreeSet<Vec<Sym>>, max_len: usize) -> BTreeSet<Vec<Sym>> {
    let mut out = BTreeSet::new();
    for l in left {
        for r in right {
            if l.len() + r.len() <= max_len {
                let mut v = l.clone();
                v.extend(r.iter().cloned());
                out.insert(v);
            }
        }
    }
    out
}

impl<'a> Oracle<'a> {
    pub fn new(set: &'a GrammarSet, max_len: usize) -> Self {
        Oracle {
            set,
            max_len,
            switches_as_epsilon: false,
            memo: BTreeMap::new(),
        }
    }

    pub fn language(&mut self, graph: &str) -> BTreeSet<Vec<Sym>> {
        if let Some(l) = self.memo.get(graph) {
            return l.clone();
        }
        let g = self.set.get(graph).unwrap_or_else(|| panic!("oracle: no graph {graph}"));
        let mut box_lang: BTreeMap<u32, BTreeSet<Vec<Sym>>> = BTreeMap::new();
        for (&id, b) in &g.boxes {
            let mut lang = BTreeSet::new();
            for alt in &b.alternatives {
                if self.switches_as_epsilon && is_switch(alt) {
                    lang.insert(Vec::new());
                    continue;
                }
                let mut acc = BTreeSet::from([Vec::new()]);
                for atom in alt {
                    let piece = match atom {
                        Atom::Epsilon => BTreeSet::from([Vec::new()]),
                        Atom::Literal(s) => BTreeSet::from([vec![Sym::Lit(s.clone())]]),
                        Atom::Mask(m) => BTreeSet::from([vec![Sym::Mask(m.clone())]]),
                        Atom::Call(t) => self.language(t),
                    };
                    acc = concat(&acc, &piece, self.max_len);
                }
                lang.extend(acc);
            }
            box_lang.insert(id, lang);
        }
        // Depth-first enumeration of every initial-to-final path.
        let initial = g.initial().expect("initial box");
        let mut out = BTreeSet::new();
        let mut stack = vec![(initial, Vec::<Sym>::new())];
        let mut seen = BTreeSet::new();
        while let Some((id, prefix)) = stack.pop() {
            if !seen.insert((id, prefix.clone())) {
                continue;
            }
            if g.boxes[&id].kind == BoxKind::Final {
                out.insert(prefix);
                continue;
            }
            for next in g.successors(id) {
                for w in &box_lang[&next] {
                    if prefix.len() + w.len() <= self.max_len {
                        let mut p = prefix.clone();
                        p.extend(w.iter().cloned());
                        stack.push((next, p));
                    }
                }
            }
        }
        self.memo.insert(graph.to_owned(), out.clone());
        out
    }
}

/// Mask test written directly against lexicon entries.
pub fn sym_accepts(sym: &Sym, token: &str, lexicon: &Lexicon) -> bool {
    match sym {
        Sym::Lit(s) => s == token,
        Sym::Mask(m) => lexicon.lookup(token).any(|e| {
            m.lemma.as_ref().is_none_or(|l| *l == e.lemma)
                && m.pos.as_ref().is_none_or(|p| *p == e.pos)
                && m.features.chars().all(|c| e.features.contains(&c))
        }),
    }
}

pub fn oracle_ends(lang: &BTreeSet<Vec<Sym>>, tokens: &[&str], pos: usize, lexicon: &Lexicon) -> BTreeSet<usize> {
    lang.iter()
        .filter(|w| pos + w.len() <= tokens.len())
        .filter(|w| w.iter().zip(&tokens[pos..]).all(|(s, t)| sym_accepts(s, t, lexicon)))
        .map(|w| pos + w.len())
        .collect()
}

/// Sequences made only of literals, as plain strings.
pub fn literal_strings(lang: &BTreeSet<Vec<Sym>>) -> BTreeSet<Vec<String>> {
    lang.iter()
        .map(|w| {
            w.iter()
                .map(|s| match s {
                    Sym::Lit(l) => l.clone(),
                    Sym::Mask(m) => panic!("unexpected mask {m}"),
                })
                .collect()
        })
        .collect()
}

/// Every sequence over `alphabet` of length at most `max_len`.
pub fn all_strings<'s>(alphabet: &[&'s str], max_len: usize) -> Vec<Vec<&'s str>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &frontier {
            for &a in alphabet {
                let mut v: Vec<&str> = w.clone();
                v.push(a);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

// ---------------------------------------------------------------------------
// Generators

pub const ALPHABET: [&str; 3] = ["a", "b", "c"];

/// A lexicon over the test alphabet in which `b` is ambiguous.
pub fn tiny_lexicon() -> Lexicon {
    let mut lex = Lexicon::new(["N".to_owned(), "V".to_owned()], ['s', 'p']);
    for (form, lemma, pos, feats) in [("a", "x", "N", "s"), ("b", "x", "V", "p"), ("b", "y", "N", "sp")] {
        lex.insert(LexEntry {
            form: form.into(),
            lemma: lemma.into(),
            pos: pos.into(),
            features: feats.chars().collect(),
        })
        .unwrap();
    }
    lex
}

fn tiny_masks() -> Vec<LexicalMask> {
    vec![
        LexicalMask::new(None, Some("N"), ""),
        LexicalMask::new(Some("x"), None, ""),
        LexicalMask::new(None, Some("V"), "p"),
        LexicalMask::new(Some("y"), Some("N"), "s"),
    ]
}

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub max_graphs: usize,
    pub max_plain: usize,
    pub masks: bool,
    pub epsilon: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_graphs: 5,
            max_plain: 6,
            masks: false,
            epsilon: true,
        }
    }
}

/// Wires plain boxes 2.. into a DAG between the initial box 0 and the final
/// box 1, so that every box lies on some initial-to-final path.
fn random_dag(rng: &mut impl Rng, name: &str, plain: Vec<Vec<Vec<Atom>>>) -> Graph {
    let mut g = Graph::new(name);
    g.add_box(GraphBox::endpoint(0, BoxKind::Initial));
    g.add_box(GraphBox::endpoint(1, BoxKind::Final));
    let n = plain.len() as u32;
    for (i, alts) in plain.into_iter().enumerate() {
        g.add_box(GraphBox::plain(i as u32 + 2, alts));
    }
    for i in 2..2 + n {
        let preds: Vec<u32> = std::iter::once(0).chain(2..i).collect();
        g.edges.insert((*preds.choose(rng).unwrap(), i));
        let succs: Vec<u32> = (i + 1..2 + n).chain(std::iter::once(1)).collect();
        g.edges.insert((i, *succs.choose(rng).unwrap()));
        if rng.random_bool(0.3) {
            g.edges.insert((i, *succs.choose(rng).unwrap()));
        }
    }
    if rng.random_bool(0.05) {
        g.edges.insert((0, 1));
    }
    g
}

/// An acyclic grammar set: graph `Gi` only calls graphs `Gj` with `j > i`.
pub fn random_set(rng: &mut impl Rng, shape: Shape) -> GrammarSet {
    let count = rng.random_range(1..=shape.max_graphs);
    let names: Vec<String> = (0..count).map(|i| format!("G{i}")).collect();
    let masks = tiny_masks();
    let graphs = (0..count).map(|gi| {
        let callees = &names[gi + 1..];
        let boxes = rng.random_range(1..=shape.max_plain);
        let plain = (0..boxes)
            .map(|_| {
                (0..rng.random_range(1..=2))
                    .map(|_| {
                        if shape.epsilon && rng.random_bool(0.15) {
                            return vec![Atom::Epsilon];
                        }
                        (0..rng.random_range(1..=2))
                            .map(|_| {
                                let roll = rng.random_range(0..10);
                                if roll < 2 && !callees.is_empty() {
                                    Atom::Call(callees.choose(rng).unwrap().clone())
                                } else if roll < 4 && shape.masks {
                                    Atom::Mask(masks.choose(rng).unwrap().clone())
                                } else {
                                    Atom::literal(*ALPHABET.choose(rng).unwrap())
                                }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        random_dag(rng, &names[gi], plain)
    });
    let graphs: Vec<Graph> = graphs.collect();
    GrammarSet::new(graphs, "G0").unwrap()
}

/// A single graph over the literal alphabet where some boxes hold a switch
/// alternative `@S0@`..`@S2@`, with a table giving each of `entries`
/// entries a random `+`/`-` per switch.
pub fn random_switch_fixture(rng: &mut impl Rng, entries: usize) -> (GrammarSet, Table) {
    let switches = ["S0", "S1", "S2"];
    let boxes = rng.random_range(2..=6);
    let plain = (0..boxes)
        .map(|_| {
            let mut alts: Vec<Vec<Atom>> = (0..rng.random_range(1..=2))
                .map(|_| {
                    (0..rng.random_range(1..=2))
                        .map(|_| Atom::literal(*ALPHABET.choose(rng).unwrap()))
                        .collect()
                })
                .collect();
            if rng.random_bool(0.5) {
                let s = switches.choose(rng).unwrap();
                let alt = vec![Atom::literal(format!("@{s}@"))];
                if rng.random_bool(0.5) {
                    alts = vec![alt];
                } else {
                    alts.push(alt);
                }
            }
            alts
        })
        .collect();
    let graph = random_dag(rng, "S", plain);
    let mut schema = vec![ColumnSchema {
        name: "id".into(),
        kind: ColumnKind::Identifier,
    }];
    schema.extend(switches.iter().map(|s| ColumnSchema {
        name: s.to_string(),
        kind: ColumnKind::Switch,
    }));
    let rows = (0..entries)
        .map(|i| {
            let mut row = vec![format!("{:04}", i + 1)];
            row.extend((0..switches.len()).map(|_| if rng.random_bool(0.5) { "+" } else { "-" }.to_owned()));
            row
        })
        .collect();
    let table = Table::new("SW", Level::Lexical, schema, rows).unwrap();
    (GrammarSet::new([graph], "S").unwrap(), table)
}

const WORDS: [&str; 8] = ["le", "chat", "qu'", "été", "Luc", "a", "b", "x-y"];

/// A graph exercising every atom kind, escapes, comments and non-contiguous ids.
pub fn random_rich_graph(rng: &mut impl Rng, name: &str) -> Graph {
    let boxes = rng.random_range(1..=6);
    let plain = (0..boxes)
        .map(|_| {
            (0..rng.random_range(1..=3))
                .map(|_| {
                    (0..rng.random_range(1..=3))
                        .map(|_| match rng.random_range(0..7) {
                            0 => Atom::Epsilon,
                            1 => Atom::Call(format!("{}-@%", ["N0", "V[N1=ppv]"].choose(rng).unwrap())),
                            2 => {
                                let lemma = *[None, Some("préférer"), Some("@V@")].choose(rng).unwrap();
                                let features = *["", "K", "ms", "P3s"].choose(rng).unwrap();
                                let pos = match *[None, Some("V"), Some("N")].choose(rng).unwrap() {
                                    None if lemma.is_none() && features.is_empty() => Some("V"),
                                    p => p,
                                };
                                Atom::Mask(LexicalMask::new(lemma, pos, features))
                            }
                            3 => Atom::literal(format!("@{}@", ["N0VN1", "F"].choose(rng).unwrap())),
                            4 => Atom::literal(*["<E>", ":x", "\\y", "<a>"].choose(rng).unwrap()),
                            _ => Atom::literal(*WORDS.choose(rng).unwrap()),
                        })
                        .filter(|a| !a.to_string().is_empty())
                        .collect::<Vec<_>>()
                })
                .filter(|alt: &Vec<Atom>| !alt.is_empty())
                .collect::<Vec<_>>()
        })
        .map(|alts: Vec<Vec<Atom>>| if alts.is_empty() { vec![vec![Atom::Epsilon]] } else { alts })
        .collect();
    let mut g = random_dag(rng, name, plain);
    if rng.random_bool(0.5) {
        g.comments.push(format!("generated {}", rng.random_range(0..1000)));
    }
    // Spread ids so that they are not contiguous.
    if rng.random_bool(0.5) {
        let shift = |id: u32| if id >= 2 { id * 3 + 7 } else { id };
        let boxes = std::mem::take(&mut g.boxes);
        for (id, mut b) in boxes {
            b.id = shift(id);
            g.boxes.insert(b.id, b);
        }
        g.edges = g.edges.iter().map(|&(s, d)| (shift(s), shift(d))).collect();
    }
    g
}

pub fn random_table(rng: &mut impl Rng) -> Table {
    let level = if rng.random_bool(0.5) { Level::Lexical } else { Level::Class };
    let ncols = rng.random_range(1..=5);
    let mut schema = vec![ColumnSchema {
        name: "id".into(),
        kind: ColumnKind::Identifier,
    }];
    for i in 0..ncols {
        let kind = if rng.random_bool(0.5) { ColumnKind::Switch } else { ColumnKind::Value };
        schema.push(ColumnSchema {
            name: format!("C{i}"),
            kind,
        });
    }
    let values = ["préférer", "<E>", "de", "receler", "à"];
    let rows = (0..rng.random_range(0..=6))
        .map(|r| {
            let mut row = vec![format!("{:04}", r)];
            for c in &schema[1..] {
                row.push(match c.kind {
                    ColumnKind::Switch => if rng.random_bool(0.5) { "+" } else { "-" }.to_owned(),
                    _ if level == Level::Class && rng.random_bool(0.3) => "@F@".to_owned(),
                    _ => values.choose(rng).unwrap().to_string(),
                });
            }
            row
        })
        .collect();
    Table::new(format!("T{}", rng.random_range(0..100)), level, schema, rows).unwrap()
}

pub fn random_lexicon(rng: &mut impl Rng) -> Lexicon {
    let pos = ["V", "N", "DET", "A"];
    let feats = ['K', 'P', 'm', 'f', 's', 'p', '3'];
    let mut lex = Lexicon::new(pos.iter().map(|p| p.to_string()), feats);
    let forms = ["le", "la", "recèle", "préféré", "Luc", "été", "été", "qu'"];
    let lemmas = ["le", "receler", "préférer", "être", "Luc"];
    for _ in 0..rng.random_range(0..12) {
        let n = rng.random_range(0..=3);
        let features = (0..n).map(|_| *feats.choose(rng).unwrap()).collect();
        lex.insert(LexEntry {
            form: forms.choose(rng).unwrap().to_string(),
            lemma: lemmas.choose(rng).unwrap().to_string(),
            pos: pos.choose(rng).unwrap().to_string(),
            features,
        })
        .unwrap();
    }
    lex
}
