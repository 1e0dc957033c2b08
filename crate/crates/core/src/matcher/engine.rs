//! Memoized top-down recognition over (graph, position).
//!
//! Results are cached only when they were computed without hitting the call
//! depth limit or the same-position call guard. Such results do not depend on
//! the calling context, so the cache never makes the output depend on the
//! order in which start positions are visited.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use crate::lexicon::{first_case_variants, LexEntry, Lexicon};
use crate::rtn::{Atom, BoxKind, GrammarSet, LexicalMask};

use super::{MatchError, MatchPolicy, Token};

pub(crate) fn token_key(text: &str, fold_case: bool) -> String {
    if fold_case {
        first_case_variants(text).0
    } else {
        text.to_owned()
    }
}

/// A token with its match key and lexicon readings resolved once.
pub(crate) struct TokenInfo<'l> {
    key: String,
    readings: Vec<&'l LexEntry>,
}

impl TokenInfo<'_> {
    pub(crate) fn key(&self) -> &str {
        &self.key
    }

    pub(crate) fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.readings.iter().map(|e| e.lemma.as_str())
    }

    fn satisfies(&self, mask: &LexicalMask) -> bool {
        self.readings.iter().any(|e| e.satisfies(mask))
    }
}

pub(crate) fn prepare<'l>(tokens: &[Token], lexicon: &'l Lexicon, fold_case: bool) -> Vec<TokenInfo<'l>> {
    tokens
        .iter()
        .map(|t| TokenInfo {
            key: token_key(&t.text, fold_case),
            readings: lexicon.candidates(&t.text, fold_case),
        })
        .collect()
}

enum CAtom {
    Literal(String),
    Mask(LexicalMask),
    Call(Result<usize, String>),
    Epsilon,
}

struct CBox {
    alternatives: Vec<Vec<CAtom>>,
    successors: Vec<usize>,
}

/// Over-approximation of the tokens a graph can start a non-empty match with.
#[derive(Debug, Clone, Default)]
pub(crate) struct Prefix {
    any: bool,
    nullable: bool,
    literals: HashSet<String>,
    masks: Vec<LexicalMask>,
}

impl Prefix {
    fn admits(&self, token: Option<&TokenInfo<'_>>) -> bool {
        if self.any || self.nullable {
            return true;
        }
        match token {
            None => false,
            Some(t) => self.literals.contains(&t.key) || self.masks.iter().any(|m| t.satisfies(m)),
        }
    }

    fn absorb(&mut self, other: &Prefix) {
        self.any |= other.any;
        self.literals.extend(other.literals.iter().cloned());
        for m in &other.masks {
            if !self.masks.contains(m) {
                self.masks.push(m.clone());
            }
        }
    }
}

struct CGraph {
    name: String,
    initial: usize,
    fin: usize,
    boxes: Vec<CBox>,
}

/// A grammar set with call targets resolved to indices.
pub(crate) struct Compiled {
    graphs: Vec<CGraph>,
    index: HashMap<String, usize>,
    prefixes: Vec<Prefix>,
}

impl Compiled {
    pub(crate) fn new(set: &GrammarSet, fold_case: bool) -> Compiled {
        let index: HashMap<String, usize> = set
            .graphs
            .keys()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let graphs = set
            .graphs
            .values()
            .map(|g| {
                let ids: HashMap<u32, usize> = g.boxes.keys().enumerate().map(|(i, &id)| (id, i)).collect();
                let mut boxes: Vec<CBox> = g
                    .boxes
                    .values()
                    .map(|b| CBox {
                        alternatives: if b.kind == BoxKind::Plain {
                            b.alternatives
                                .iter()
                                .map(|alt| {
                                    alt.iter()
                                        .map(|a| match a {
                                            Atom::Literal(t) => CAtom::Literal(token_key(t, fold_case)),
                                            Atom::Mask(m) => CAtom::Mask(m.clone()),
                                            Atom::Call(t) => CAtom::Call(index.get(t).copied().ok_or_else(|| t.clone())),
                                            Atom::Epsilon => CAtom::Epsilon,
                                        })
                                        .collect()
                                })
                                .collect()
                        } else {
                            vec![vec![CAtom::Epsilon]]
                        },
                        successors: Vec::new(),
                    })
                    .collect();
                for (s, d) in &g.edges {
                    if let (Some(&s), Some(&d)) = (ids.get(s), ids.get(d)) {
                        boxes[s].successors.push(d);
                    }
                }
                CGraph {
                    name: g.name.clone(),
                    initial: g.initial().map(|id| ids[&id]).unwrap_or(0),
                    fin: g.final_box().map(|id| ids[&id]).unwrap_or(usize::MAX),
                    boxes,
                }
            })
            .collect();
        let mut compiled = Compiled {
            graphs,
            index,
            prefixes: Vec::new(),
        };
        compiled.prefixes = compiled.compute_prefixes();
        compiled
    }

    pub(crate) fn graph_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub(crate) fn name(&self, g: usize) -> &str {
        &self.graphs[g].name
    }

    /// Call targets of a dispatch-shaped graph: one plain box between the
    /// endpoints whose alternatives are each a single call.
    pub(crate) fn dispatch_targets(&self, g: usize) -> Option<Vec<usize>> {
        let graph = &self.graphs[g];
        if !graph.name.ends_with("-ALL") || graph.boxes.len() != 3 {
            return None;
        }
        let first = graph.boxes[graph.initial].successors.as_slice();
        let &[middle] = first else { return None };
        if graph.boxes[middle].successors != [graph.fin] {
            return None;
        }
        graph.boxes[middle]
            .alternatives
            .iter()
            .map(|alt| match alt.as_slice() {
                [CAtom::Call(Ok(t))] => Some(*t),
                _ => None,
            })
            .collect()
    }

    fn compute_prefixes(&self) -> Vec<Prefix> {
        let mut done: Vec<Option<Prefix>> = vec![None; self.graphs.len()];
        let mut in_progress = vec![false; self.graphs.len()];
        for g in 0..self.graphs.len() {
            self.prefix_of(g, &mut done, &mut in_progress);
        }
        done.into_iter().map(Option::unwrap_or_default).collect()
    }

    fn prefix_of(&self, g: usize, done: &mut Vec<Option<Prefix>>, in_progress: &mut Vec<bool>) -> Prefix {
        if let Some(p) = &done[g] {
            return p.clone();
        }
        if in_progress[g] {
            return Prefix {
                any: true,
                ..Prefix::default()
            };
        }
        in_progress[g] = true;
        let graph = &self.graphs[g];
        let mut prefix = Prefix::default();
        let mut seen = HashSet::new();
        let mut stack: Vec<usize> = graph.boxes[graph.initial].successors.clone();
        while let Some(b) = stack.pop() {
            if !seen.insert(b) {
                continue;
            }
            if b == graph.fin {
                prefix.nullable = true;
                continue;
            }
            for alt in &graph.boxes[b].alternatives {
                let mut crossed = true;
                for atom in alt {
                    match atom {
                        CAtom::Epsilon => continue,
                        CAtom::Literal(k) => {
                            prefix.literals.insert(k.clone());
                        }
                        CAtom::Mask(m) => {
                            if !prefix.masks.contains(m) {
                                prefix.masks.push(m.clone());
                            }
                        }
                        CAtom::Call(Ok(t)) => {
                            let sub = self.prefix_of(*t, done, in_progress);
                            prefix.absorb(&sub);
                            if sub.nullable || sub.any {
                                continue;
                            }
                        }
                        CAtom::Call(Err(_)) => prefix.any = true,
                    }
                    crossed = false;
                    break;
                }
                if crossed {
                    stack.extend(graph.boxes[b].successors.iter().copied());
                }
            }
        }
        in_progress[g] = false;
        done[g] = Some(prefix.clone());
        prefix
    }

    pub(crate) fn admits(&self, g: usize, token: Option<&TokenInfo<'_>>) -> bool {
        self.prefixes[g].admits(token)
    }

    /// Literal keys and lemmas a graph can start with, or `None` if it may
    /// start with anything.
    pub(crate) fn start_keys(&self, g: usize) -> Option<(Vec<&str>, Vec<&str>)> {
        let p = &self.prefixes[g];
        if p.any || p.nullable || p.masks.iter().any(|m| m.lemma.is_none()) {
            return None;
        }
        Some((
            p.literals.iter().map(String::as_str).collect(),
            p.masks.iter().filter_map(|m| m.lemma.as_deref()).collect(),
        ))
    }
}

#[derive(Default)]
struct Memo {
    base: usize,
    slots: VecDeque<HashMap<usize, Rc<Vec<usize>>>>,
}

impl Memo {
    fn get(&self, g: usize, pos: usize) -> Option<Rc<Vec<usize>>> {
        pos.checked_sub(self.base)
            .and_then(|i| self.slots.get(i))
            .and_then(|m| m.get(&g))
            .cloned()
    }

    fn insert(&mut self, g: usize, pos: usize, ends: Rc<Vec<usize>>) {
        let Some(i) = pos.checked_sub(self.base) else { return };
        while self.slots.len() <= i {
            self.slots.push_back(HashMap::new());
        }
        self.slots[i].insert(g, ends);
    }

    /// Forgets positions before `pos`; calls never start there again.
    fn advance(&mut self, pos: usize) {
        while self.base < pos {
            if self.slots.pop_front().is_none() {
                self.base = pos;
                break;
            }
            self.base += 1;
        }
    }
}

pub(crate) struct Engine<'c, 't> {
    compiled: &'c Compiled,
    tokens: &'t [TokenInfo<'t>],
    max_depth: usize,
    memo: Memo,
    active: HashSet<(usize, usize)>,
}

type Ends = (Rc<Vec<usize>>, bool);

impl<'c, 't> Engine<'c, 't> {
    pub(crate) fn new(compiled: &'c Compiled, tokens: &'t [TokenInfo<'t>], policy: &MatchPolicy) -> Self {
        Engine {
            compiled,
            tokens,
            max_depth: policy.max_call_depth,
            memo: Memo::default(),
            active: HashSet::new(),
        }
    }

    pub(crate) fn advance(&mut self, pos: usize) {
        self.memo.advance(pos);
    }

    /// End positions of the spans starting at `pos` accepted by graph `g`,
    /// entered at call depth `depth`.
    pub(crate) fn ends(&mut self, g: usize, pos: usize, depth: usize) -> Result<Ends, MatchError> {
        let compiled = self.compiled;
        if !compiled.admits(g, self.tokens.get(pos)) {
            return Ok((Rc::new(Vec::new()), false));
        }
        if depth > self.max_depth {
            return Ok((Rc::new(Vec::new()), true));
        }
        if let Some(hit) = self.memo.get(g, pos) {
            return Ok((hit, false));
        }
        if !self.active.insert((g, pos)) {
            return Ok((Rc::new(Vec::new()), true));
        }
        let result = self.explore(g, pos, depth);
        self.active.remove(&(g, pos));
        let (ends, tainted) = result?;
        let ends = Rc::new(ends);
        if !tainted {
            self.memo.insert(g, pos, ends.clone());
        }
        Ok((ends, tainted))
    }

    fn explore(&mut self, g: usize, pos: usize, depth: usize) -> Result<(Vec<usize>, bool), MatchError> {
        let compiled = self.compiled;
        let graph = &compiled.graphs[g];
        let mut tainted = false;
        let mut results = BTreeSet::new();
        let mut seen = HashSet::new();
        let mut stack = vec![(graph.initial, pos)];
        while let Some((b, q)) = stack.pop() {
            for &c in &graph.boxes[b].successors {
                if c == graph.fin {
                    results.insert(q);
                    continue;
                }
                for alt in &graph.boxes[c].alternatives {
                    for q2 in self.sequence(graph, alt, q, depth, &mut tainted)? {
                        if seen.insert((c, q2)) {
                            stack.push((c, q2));
                        }
                    }
                }
            }
        }
        Ok((results.into_iter().collect(), tainted))
    }

    fn sequence(
        &mut self,
        graph: &CGraph,
        alt: &[CAtom],
        pos: usize,
        depth: usize,
        tainted: &mut bool,
    ) -> Result<Vec<usize>, MatchError> {
        let mut current = vec![pos];
        for atom in alt {
            let mut next = Vec::new();
            for &p in &current {
                match atom {
                    CAtom::Epsilon => next.push(p),
                    CAtom::Literal(k) => {
                        if self.tokens.get(p).is_some_and(|t| t.key == *k) {
                            next.push(p + 1);
                        }
                    }
                    CAtom::Mask(m) => {
                        if self.tokens.get(p).is_some_and(|t| t.satisfies(m)) {
                            next.push(p + 1);
                        }
                    }
                    CAtom::Call(Ok(t)) => {
                        let (ends, t) = self.ends(*t, p, depth + 1)?;
                        *tainted |= t;
                        next.extend(ends.iter().copied());
                    }
                    CAtom::Call(Err(target)) => {
                        return Err(MatchError::UnresolvedCall {
                            graph: graph.name.clone(),
                            target: target.clone(),
                        })
                    }
                }
            }
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return Ok(next);
            }
            current = next;
        }
        Ok(current)
    }
}
