//! Tokenization and grammar matching over corpora.

mod engine;
mod tokenize;

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::lexicon::Lexicon;
use crate::rtn::GrammarSet;
use engine::{prepare, Compiled, Engine, TokenInfo};

pub use tokenize::{tokenize, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatchMode {
    /// Every accepted (start, end, variant).
    All,
    /// Per start, the longest accepted span only.
    LongestPerStart,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchPolicy {
    pub mode: MatchMode,
    pub max_call_depth: usize,
    pub fold_case: bool,
}

impl Default for MatchPolicy {
    fn default() -> Self {
        MatchPolicy {
            mode: MatchMode::LongestPerStart,
            max_call_depth: 16,
            fold_case: false,
        }
    }
}

impl MatchPolicy {
    pub fn new(mode: MatchMode, max_call_depth: usize, fold_case: bool) -> Result<Self, MatchError> {
        if max_call_depth == 0 {
            return Err(MatchError::InvalidDepth);
        }
        Ok(MatchPolicy {
            mode,
            max_call_depth,
            fold_case,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatchError {
    #[error("graph {graph}: unresolved call to {target:?}")]
    UnresolvedCall { graph: String, target: String },
    #[error("unknown graph {0:?}")]
    UnknownGraph(String),
    #[error("start position {pos} is past the {len} tokens")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("max call depth must be at least 1")]
    InvalidDepth,
}

/// One retained occurrence. `end_token` is exclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pub start_token: usize,
    pub end_token: usize,
    pub graph: String,
    pub entry_id: Option<String>,
}

/// Every `e` such that `tokens[pos..e]` is accepted by `graph`.
pub fn match_at(
    set: &GrammarSet,
    lexicon: &Lexicon,
    tokens: &[Token],
    pos: usize,
    graph: &str,
    policy: &MatchPolicy,
) -> Result<BTreeSet<usize>, MatchError> {
    if pos > tokens.len() {
        return Err(MatchError::PositionOutOfRange { pos, len: tokens.len() });
    }
    let compiled = Compiled::new(set, policy.fold_case);
    let g = compiled
        .graph_index(graph)
        .ok_or_else(|| MatchError::UnknownGraph(graph.to_owned()))?;
    let infos = prepare(tokens, lexicon, policy.fold_case);
    let mut engine = Engine::new(&compiled, &infos, policy);
    let (ends, _) = engine.ends(g, pos, 0)?;
    Ok(ends.iter().copied().collect())
}

/// Tokenizes `text` and matches the main graph of `set` at every position.
pub fn match_corpus(
    set: &GrammarSet,
    lexicon: &Lexicon,
    text: &str,
    policy: &MatchPolicy,
) -> Result<Vec<Match>, MatchError> {
    match_tokens(set, lexicon, &tokenize(text), policy)
}

const CHUNK: usize = 4096;

/// Variants reachable from the main graph, with an index from first-token
/// keys to the variants that can start there.
struct DispatchIndex {
    variants: Vec<(usize, u32)>,
    always: Vec<usize>,
    by_literal: HashMap<String, Vec<usize>>,
    by_lemma: HashMap<String, Vec<usize>>,
}

impl DispatchIndex {
    fn new(compiled: &Compiled, main: usize) -> DispatchIndex {
        let mut variants: Vec<(usize, u32)> = match compiled.dispatch_targets(main) {
            Some(targets) => targets.into_iter().map(|t| (t, 1)).collect(),
            None => vec![(main, 0)],
        };
        variants.sort_by(|a, b| compiled.name(a.0).cmp(compiled.name(b.0)));
        variants.dedup();
        let mut entry = DispatchIndex {
            variants: Vec::new(),
            always: Vec::new(),
            by_literal: HashMap::new(),
            by_lemma: HashMap::new(),
        };
        for (slot, &(g, _)) in variants.iter().enumerate() {
            match compiled.start_keys(g) {
                None => entry.always.push(slot),
                Some((literals, lemmas)) => {
                    for k in literals {
                        entry.by_literal.entry(k.to_owned()).or_default().push(slot);
                    }
                    for l in lemmas {
                        entry.by_lemma.entry(l.to_owned()).or_default().push(slot);
                    }
                }
            }
        }
        entry.variants = variants;
        entry
    }

    fn candidates(&self, token: Option<&TokenInfo<'_>>) -> Vec<usize> {
        let mut out = self.always.clone();
        if let Some(t) = token {
            if let Some(v) = self.by_literal.get(t.key()) {
                out.extend(v);
            }
            for lemma in t.lemmas() {
                if let Some(v) = self.by_lemma.get(lemma) {
                    out.extend(v);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Matches pre-tokenized text. Start positions are scanned in parallel
/// chunks; the output is sorted by (start, end, graph) whatever the number
/// of worker threads.
pub fn match_tokens(
    set: &GrammarSet,
    lexicon: &Lexicon,
    tokens: &[Token],
    policy: &MatchPolicy,
) -> Result<Vec<Match>, MatchError> {
    if policy.max_call_depth == 0 {
        return Err(MatchError::InvalidDepth);
    }
    let compiled = Compiled::new(set, policy.fold_case);
    let main = compiled
        .graph_index(&set.main)
        .ok_or_else(|| MatchError::UnknownGraph(set.main.clone()))?;
    let infos = prepare(tokens, lexicon, policy.fold_case);
    let entry = DispatchIndex::new(&compiled, main);
    let via_dispatch = entry.variants.iter().any(|&(_, depth)| depth == 1);

    let starts: Vec<usize> = (0..tokens.len()).step_by(CHUNK).collect();
    let chunks: Vec<Vec<Match>> = starts
        .par_iter()
        .map(|&from| {
            let mut engine = Engine::new(&compiled, &infos, policy);
            let mut found = Vec::new();
            for start in from..(from + CHUNK).min(tokens.len()) {
                engine.advance(start);
                let mut best: Option<(usize, usize)> = None;
                for slot in entry.candidates(infos.get(start)) {
                    let (g, depth) = entry.variants[slot];
                    let (ends, _) = engine.ends(g, start, depth as usize)?;
                    match policy.mode {
                        MatchMode::All => {
                            for &e in ends.iter().filter(|&&e| e > start) {
                                found.push((start, e, g));
                            }
                        }
                        MatchMode::LongestPerStart => {
                            if let Some(&e) = ends.last().filter(|&&e| e > start) {
                                // slots are in name order, so the first variant wins ties
                                if best.is_none_or(|(be, _)| e > be) {
                                    best = Some((e, g));
                                }
                            }
                        }
                    }
                }
                if let Some((e, g)) = best {
                    found.push((start, e, g));
                }
            }
            Ok(found
                .into_iter()
                .map(|(s, e, g)| {
                    let name = compiled.name(g);
                    Match {
                        start_token: s,
                        end_token: e,
                        graph: name.to_owned(),
                        entry_id: if via_dispatch {
                            name.rsplit_once('-').map(|(_, id)| id.to_owned())
                        } else {
                            None
                        },
                    }
                })
                .collect())
        })
        .collect::<Result<_, MatchError>>()?;
    let mut matches: Vec<Match> = chunks.into_iter().flatten().collect();
    matches.sort();
    Ok(matches)
}

fn escape_field(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

/// Match lines: start_char, end_char, start_token, end_token, graph, entry
/// id (or `-`), surface text.
pub fn format_matches(text: &str, tokens: &[Token], matches: &[Match]) -> String {
    let chars: Vec<char> = text.chars().collect();
    let mut out = String::new();
    for m in matches {
        let start = tokens[m.start_token].start;
        let end = tokens[m.end_token - 1].end;
        let surface: String = chars[start..end].iter().collect();
        out.push_str(&format!(
            "{start}\t{end}\t{}\t{}\t{}\t{}\t{}\n",
            m.start_token,
            m.end_token,
            m.graph,
            m.entry_id.as_deref().unwrap_or("-"),
            escape_field(&surface)
        ));
    }
    out
}
