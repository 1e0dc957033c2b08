//! Recursive transition networks.
//!
//! A [`Graph`] is a set of boxes connected by edges. Each box holds a
//! paradigm: a list of alternative atom sequences, any one of which may be
//! used when a path crosses the box. Edges denote concatenation. A
//! [`GrammarSet`] groups graphs by name so that call atoms can be resolved.

mod dot;
mod format;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

pub use dot::export_dot;
pub use format::{parse_alternative, parse_atom, parse_graph, serialize_graph, GraphParseError};

/// Identifier of a box, unique within its graph.
pub type BoxId = u32;

/// A token pattern constraining lemma, part of speech and inflectional codes,
/// written `<lemma.POS:codes>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexicalMask {
    pub lemma: Option<String>,
    pub pos: Option<String>,
    /// Inflectional codes, one character each, in written order.
    pub features: String,
}

impl LexicalMask {
    pub fn new(lemma: Option<&str>, pos: Option<&str>, features: &str) -> Self {
        LexicalMask {
            lemma: lemma.filter(|s| !s.is_empty()).map(str::to_owned),
            pos: pos.filter(|s| !s.is_empty()).map(str::to_owned),
            features: features.to_owned(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lemma.is_none() && self.pos.is_none() && self.features.is_empty()
    }

    pub fn feature_codes(&self) -> impl Iterator<Item = char> + '_ {
        self.features.chars()
    }
}

impl fmt::Display for LexicalMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("<")?;
        if let Some(lemma) = &self.lemma {
            f.write_str(lemma)?;
        }
        if let Some(pos) = &self.pos {
            write!(f, ".{pos}")?;
        }
        if !self.features.is_empty() {
            write!(f, ":{}", self.features)?;
        }
        f.write_str(">")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Literal(String),
    Mask(LexicalMask),
    Call(String),
    Epsilon,
}

impl Atom {
    pub fn literal(text: impl Into<String>) -> Self {
        Atom::Literal(text.into())
    }

    pub fn call(target: impl Into<String>) -> Self {
        Atom::Call(target.into())
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self, Atom::Epsilon)
    }

    fn violation(&self) -> Option<String> {
        match self {
            Atom::Literal(text) if text.is_empty() => Some("empty literal".into()),
            Atom::Literal(text) if text.chars().any(char::is_whitespace) => {
                Some(format!("literal {text:?} contains whitespace"))
            }
            Atom::Mask(mask) if mask.is_empty() => Some("empty lexical mask".into()),
            Atom::Call(target) if target.is_empty() => Some("empty call target".into()),
            Atom::Call(target) if target.chars().any(char::is_whitespace) => {
                Some(format!("call target {target:?} contains whitespace"))
            }
            _ => None,
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format::render_atom(self))
    }
}

/// One line of a box: a sequence of atoms read left to right.
pub type Alternative = Vec<Atom>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoxKind {
    Initial,
    Final,
    Plain,
}

impl BoxKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoxKind::Initial => "INITIAL",
            BoxKind::Final => "FINAL",
            BoxKind::Plain => "PLAIN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphBox {
    pub id: BoxId,
    pub kind: BoxKind,
    pub alternatives: Vec<Alternative>,
}

impl GraphBox {
    /// A content-free initial or final box.
    pub fn endpoint(id: BoxId, kind: BoxKind) -> Self {
        GraphBox {
            id,
            kind,
            alternatives: vec![vec![Atom::Epsilon]],
        }
    }

    pub fn plain(id: BoxId, alternatives: Vec<Alternative>) -> Self {
        GraphBox {
            id,
            kind: BoxKind::Plain,
            alternatives,
        }
    }

    /// True when some alternative consumes nothing on its own (all atoms are epsilon).
    pub fn has_epsilon_alternative(&self) -> bool {
        self.alternatives
            .iter()
            .any(|alt| alt.iter().all(Atom::is_epsilon))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    pub name: String,
    /// Free-text comment lines. They are kept for display and round trips only.
    pub comments: Vec<String>,
    pub boxes: BTreeMap<BoxId, GraphBox>,
    pub edges: BTreeSet<(BoxId, BoxId)>,
}

/// A structural problem in a graph or grammar set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Violation {
    MissingInitial,
    MissingFinal,
    DuplicateInitial,
    DuplicateFinal,
    EndpointContent(BoxId),
    EmptyBox(BoxId),
    EmptyAlternative(BoxId),
    InvalidAtom(BoxId, String),
    DanglingEdge(BoxId, BoxId),
    EdgeFromFinal(BoxId),
    EdgeIntoInitial(BoxId),
    BoxIdMismatch(BoxId),
    EpsilonCycle(BoxId),
    MainMissing(String),
    NameMismatch(String),
    UnresolvedCall(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingInitial => write!(f, "missing initial box"),
            Violation::MissingFinal => write!(f, "missing final box"),
            Violation::DuplicateInitial => write!(f, "duplicate initial box"),
            Violation::DuplicateFinal => write!(f, "duplicate final box"),
            Violation::EndpointContent(id) => {
                write!(f, "initial/final box {id} must carry a single <E> alternative")
            }
            Violation::EmptyBox(id) => write!(f, "box {id} has no alternative"),
            Violation::EmptyAlternative(id) => write!(f, "box {id} has an empty alternative"),
            Violation::InvalidAtom(id, why) => write!(f, "box {id}: {why}"),
            Violation::DanglingEdge(a, b) => write!(f, "dangling edge {a} -> {b}"),
            Violation::EdgeFromFinal(id) => write!(f, "edge leaves final box {id}"),
            Violation::EdgeIntoInitial(id) => write!(f, "edge enters initial box {id}"),
            Violation::BoxIdMismatch(id) => write!(f, "box stored under id {id} has another id"),
            Violation::EpsilonCycle(id) => write!(f, "epsilon cycle through box {id}"),
            Violation::MainMissing(name) => write!(f, "main graph {name:?} is not in the set"),
            Violation::NameMismatch(name) => {
                write!(f, "graph stored under {name:?} carries a different name")
            }
            Violation::UnresolvedCall(target) => write!(f, "unresolved call to {target:?}"),
        }
    }
}

/// A violation located in a graph of a set.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub graph: Option<String>,
    pub violation: Violation,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.graph {
            Some(g) => write!(f, "{g}: {}", self.violation),
            None => write!(f, "{}", self.violation),
        }
    }
}

impl Graph {
    pub fn new(name: impl Into<String>) -> Self {
        Graph {
            name: name.into(),
            comments: Vec::new(),
            boxes: BTreeMap::new(),
            edges: BTreeSet::new(),
        }
    }

    /// A graph `initial -> box 1 -> final` whose single plain box holds `alternatives`.
    pub fn single_box(name: impl Into<String>, alternatives: Vec<Alternative>) -> Self {
        let mut g = Graph::new(name);
        g.add_box(GraphBox::endpoint(0, BoxKind::Initial));
        g.add_box(GraphBox::plain(1, alternatives));
        g.add_box(GraphBox::endpoint(2, BoxKind::Final));
        g.edges.insert((0, 1));
        g.edges.insert((1, 2));
        g
    }

    pub fn add_box(&mut self, b: GraphBox) {
        self.boxes.insert(b.id, b);
    }

    pub fn initial(&self) -> Option<BoxId> {
        self.boxes
            .values()
            .find(|b| b.kind == BoxKind::Initial)
            .map(|b| b.id)
    }

    pub fn final_box(&self) -> Option<BoxId> {
        self.boxes
            .values()
            .find(|b| b.kind == BoxKind::Final)
            .map(|b| b.id)
    }

    pub fn successors(&self, id: BoxId) -> impl Iterator<Item = BoxId> + '_ {
        self.edges.range((id, 0)..=(id, BoxId::MAX)).map(|&(_, d)| d)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        self.boxes
            .values()
            .flat_map(|b| b.alternatives.iter().flatten())
    }

    pub fn call_targets(&self) -> impl Iterator<Item = &str> {
        self.atoms().filter_map(|a| match a {
            Atom::Call(t) => Some(t.as_str()),
            _ => None,
        })
    }

    /// Checks every box and edge invariant; returns the violations found.
    pub fn check(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let initials = self.boxes.values().filter(|b| b.kind == BoxKind::Initial).count();
        let finals = self.boxes.values().filter(|b| b.kind == BoxKind::Final).count();
        match initials {
            0 => out.push(Violation::MissingInitial),
            1 => {}
            _ => out.push(Violation::DuplicateInitial),
        }
        match finals {
            0 => out.push(Violation::MissingFinal),
            1 => {}
            _ => out.push(Violation::DuplicateFinal),
        }
        for (&id, b) in &self.boxes {
            if b.id != id {
                out.push(Violation::BoxIdMismatch(id));
            }
            match b.kind {
                BoxKind::Initial | BoxKind::Final => {
                    if b.alternatives != [vec![Atom::Epsilon]] {
                        out.push(Violation::EndpointContent(id));
                    }
                }
                BoxKind::Plain => {
                    if b.alternatives.is_empty() {
                        out.push(Violation::EmptyBox(id));
                    }
                    for alt in &b.alternatives {
                        if alt.is_empty() {
                            out.push(Violation::EmptyAlternative(id));
                        }
                        for atom in alt {
                            if let Some(why) = atom.violation() {
                                out.push(Violation::InvalidAtom(id, why));
                            }
                        }
                    }
                }
            }
        }
        for &(src, dst) in &self.edges {
            match (self.boxes.get(&src), self.boxes.get(&dst)) {
                (Some(s), Some(d)) => {
                    if s.kind == BoxKind::Final {
                        out.push(Violation::EdgeFromFinal(src));
                    }
                    if d.kind == BoxKind::Initial {
                        out.push(Violation::EdgeIntoInitial(dst));
                    }
                }
                _ => out.push(Violation::DanglingEdge(src, dst)),
            }
        }
        out
    }

    /// Boxes lying on a cycle made only of boxes that can be crossed without
    /// consuming a token. Calls are treated as consuming.
    pub fn epsilon_cycles(&self) -> Vec<BoxId> {
        let nullable: BTreeSet<BoxId> = self
            .boxes
            .values()
            .filter(|b| b.kind == BoxKind::Plain && b.has_epsilon_alternative())
            .map(|b| b.id)
            .collect();
        let mut on_cycle = Vec::new();
        for &start in &nullable {
            let mut seen = BTreeSet::new();
            let mut stack: Vec<BoxId> = self.successors(start).filter(|d| nullable.contains(d)).collect();
            while let Some(id) = stack.pop() {
                if id == start {
                    on_cycle.push(start);
                    break;
                }
                if seen.insert(id) {
                    stack.extend(self.successors(id).filter(|d| nullable.contains(d)));
                }
            }
        }
        on_cycle
    }

    /// Restricts the graph to boxes that are reachable from the initial box and
    /// can reach the final box. Returns `None` when no initial-to-final path exists.
    pub fn prune(&self) -> Option<Graph> {
        let initial = self.initial()?;
        let fin = self.final_box()?;
        let mut forward: BTreeMap<BoxId, Vec<BoxId>> = BTreeMap::new();
        let mut backward: BTreeMap<BoxId, Vec<BoxId>> = BTreeMap::new();
        for &(s, d) in &self.edges {
            if self.boxes.contains_key(&s) && self.boxes.contains_key(&d) {
                forward.entry(s).or_default().push(d);
                backward.entry(d).or_default().push(s);
            }
        }
        let reach = |from: BoxId, adj: &BTreeMap<BoxId, Vec<BoxId>>| {
            let mut seen = BTreeSet::from([from]);
            let mut queue = VecDeque::from([from]);
            while let Some(id) = queue.pop_front() {
                for &n in adj.get(&id).into_iter().flatten() {
                    if seen.insert(n) {
                        queue.push_back(n);
                    }
                }
            }
            seen
        };
        let from_initial = reach(initial, &forward);
        if !from_initial.contains(&fin) {
            return None;
        }
        let to_final = reach(fin, &backward);
        let keep: BTreeSet<BoxId> = from_initial.intersection(&to_final).copied().collect();
        Some(Graph {
            name: self.name.clone(),
            comments: self.comments.clone(),
            boxes: self
                .boxes
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(&id, b)| (id, b.clone()))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|(s, d)| keep.contains(s) && keep.contains(d))
                .copied()
                .collect(),
        })
    }

    pub fn has_parameters(&self) -> bool {
        self.atoms().any(|a| format::render_atom(a).contains('@'))
    }
}

/// Named graphs with a designated entry point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarSet {
    pub graphs: BTreeMap<String, Graph>,
    pub main: String,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SetError {
    #[error("duplicate graph name {0:?}")]
    DuplicateGraph(String),
    #[error("main graph {0:?} is not in the set")]
    MainMissing(String),
}

impl GrammarSet {
    pub fn new(graphs: impl IntoIterator<Item = Graph>, main: impl Into<String>) -> Result<Self, SetError> {
        let mut map = BTreeMap::new();
        for g in graphs {
            if map.contains_key(&g.name) {
                return Err(SetError::DuplicateGraph(g.name));
            }
            map.insert(g.name.clone(), g);
        }
        let main = main.into();
        if !map.contains_key(&main) {
            return Err(SetError::MainMissing(main));
        }
        Ok(GrammarSet { graphs: map, main })
    }

    pub fn get(&self, name: &str) -> Option<&Graph> {
        self.graphs.get(name)
    }

    pub fn main_graph(&self) -> &Graph {
        &self.graphs[&self.main]
    }

    /// Every graph text of the set, in name order.
    pub fn serialize(&self) -> Vec<(String, String)> {
        self.graphs
            .values()
            .map(|g| (g.name.clone(), serialize_graph(g)))
            .collect()
    }
}

/// Runs every structural check over a set. With `require_resolved`, call
/// targets that name no graph of the set are reported too.
pub fn validate_set(set: &GrammarSet, require_resolved: bool) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if !set.graphs.contains_key(&set.main) {
        out.push(Diagnostic {
            graph: None,
            violation: Violation::MainMissing(set.main.clone()),
        });
    }
    for (name, g) in &set.graphs {
        let located = |violation| Diagnostic {
            graph: Some(name.clone()),
            violation,
        };
        if &g.name != name {
            out.push(located(Violation::NameMismatch(name.clone())));
        }
        out.extend(g.check().into_iter().map(located));
        out.extend(g.epsilon_cycles().into_iter().map(|id| located(Violation::EpsilonCycle(id))));
        if require_resolved {
            let unresolved: BTreeSet<&str> = g
                .call_targets()
                .filter(|t| !set.graphs.contains_key(*t))
                .collect();
            out.extend(
                unresolved
                    .into_iter()
                    .map(|t| located(Violation::UnresolvedCall(t.to_owned()))),
            );
        }
    }
    out
}
