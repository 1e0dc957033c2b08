//! Scoring of retained occurrences against gold annotations.
//!
//! A match is *complete* when its span equals an in-scope gold span and
//! *partial* when it lies strictly inside one. Pairing is one-to-one and
//! greedy: exact spans first, containment second, earlier positions first.
//! Everything else is a false positive. Out-of-scope gold spans are ignored
//! for recall.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write;

use crate::matcher::Match;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSpan {
    pub start_token: usize,
    pub end_token: usize,
    pub label: String,
    pub in_scope: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: empty span {start}..{end}")]
    EmptySpan { line: usize, start: usize, end: usize },
}

fn malformed(line: usize, message: impl Into<String>) -> EvalError {
    EvalError::Malformed {
        line,
        message: message.into(),
    }
}

fn parse_index(line: usize, field: &str, what: &str) -> Result<usize, EvalError> {
    field
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("invalid {what} {field:?}")))
}

/// Parses a gold file: start_token, end_token, label, `in|out`.
pub fn load_gold(text: &str) -> Result<Vec<GoldSpan>, EvalError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let [start, end, label, scope] = fields.as_slice() else {
            return Err(malformed(line, format!("expected 4 fields, found {}", fields.len())));
        };
        let start = parse_index(line, start, "start")?;
        let end = parse_index(line, end, "end")?;
        if start >= end {
            return Err(EvalError::EmptySpan { line, start, end });
        }
        let in_scope = match scope.trim() {
            "in" => true,
            "out" => false,
            other => return Err(malformed(line, format!("scope must be in|out, found {other:?}"))),
        };
        out.push(GoldSpan {
            start_token: start,
            end_token: end,
            label: label.to_string(),
            in_scope,
        });
    }
    Ok(out)
}

/// Anything with a token span that can be scored.
pub trait ScoredSpan {
    fn span(&self) -> (usize, usize);

    /// Error category used to bucket false positives.
    fn label(&self) -> Option<&str> {
        None
    }
}

impl ScoredSpan for Match {
    fn span(&self) -> (usize, usize) {
        (self.start_token, self.end_token)
    }
}

/// A match read back from a match file, with an optional trailing label column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledMatch {
    pub matched: Match,
    pub label: Option<String>,
}

impl ScoredSpan for LabeledMatch {
    fn span(&self) -> (usize, usize) {
        self.matched.span()
    }

    fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
}

/// Reads the match file written by the matcher. An eighth column, when
/// present, is taken as a hand-assigned error label.
pub fn parse_match_file(text: &str) -> Result<Vec<LabeledMatch>, EvalError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.is_empty() {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 7 && fields.len() != 8 {
            return Err(malformed(line, format!("expected 7 or 8 fields, found {}", fields.len())));
        }
        let start = parse_index(line, fields[2], "start token")?;
        let end = parse_index(line, fields[3], "end token")?;
        if start >= end {
            return Err(EvalError::EmptySpan { line, start, end });
        }
        out.push(LabeledMatch {
            matched: Match {
                start_token: start,
                end_token: end,
                graph: fields[4].to_owned(),
                entry_id: (fields[5] != "-").then(|| fields[5].to_owned()),
            },
            label: fields.get(7).filter(|l| !l.is_empty()).map(|l| l.to_string()),
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub retained: usize,
    pub correct_complete: usize,
    pub correct_partial: usize,
    /// `None` when nothing was retained.
    pub precision: Option<f64>,
    pub gold_in_scope: usize,
    pub recalled: usize,
    /// `None` when no gold span is in scope.
    pub recall: Option<f64>,
    pub error_breakdown: BTreeMap<String, usize>,
}

/// A ratio as a percentage with three decimals.
pub fn percent(ratio: f64) -> String {
    format!("{:.3}", ratio * 100.0)
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl EvalReport {
    pub fn correct(&self) -> usize {
        self.correct_complete + self.correct_partial
    }

    pub fn complete_share(&self) -> Option<f64> {
        ratio(self.correct_complete, self.correct())
    }

    pub fn partial_share(&self) -> Option<f64> {
        ratio(self.correct_partial, self.correct())
    }

    pub fn false_positives(&self) -> usize {
        self.retained - self.correct()
    }

    pub fn to_text(&self) -> String {
        let pct = |r: Option<f64>, why: &str| match r {
            Some(r) => format!("{} %", percent(r)),
            None => format!("undefined ({why})"),
        };
        let mut out = String::new();
        writeln!(out, "retained occurrences: {}", self.retained).unwrap();
        writeln!(out, "correct, complete:    {}", self.correct_complete).unwrap();
        writeln!(out, "correct, partial:     {}", self.correct_partial).unwrap();
        writeln!(out, "precision:            {}", pct(self.precision, "no retained occurrences")).unwrap();
        writeln!(out, "complete share:       {}", pct(self.complete_share(), "no correct occurrences")).unwrap();
        writeln!(out, "partial share:        {}", pct(self.partial_share(), "no correct occurrences")).unwrap();
        writeln!(out, "gold in scope:        {}", self.gold_in_scope).unwrap();
        writeln!(out, "recalled:             {}", self.recalled).unwrap();
        writeln!(out, "recall:               {}", pct(self.recall, "no gold span in scope")).unwrap();
        if !self.error_breakdown.is_empty() {
            writeln!(out, "false positives by label:").unwrap();
            for (label, n) in &self.error_breakdown {
                writeln!(out, "  {label}: {n}").unwrap();
            }
        }
        out
    }

    /// `key=value` lines; undefined ratios are written as `undefined`.
    pub fn to_kv(&self) -> String {
        let value = |r: Option<f64>| r.map_or_else(|| "undefined".to_owned(), |r| format!("{r:.6}"));
        let pct = |r: Option<f64>| r.map_or_else(|| "undefined".to_owned(), percent);
        let mut out = String::new();
        writeln!(out, "retained={}", self.retained).unwrap();
        writeln!(out, "correct_complete={}", self.correct_complete).unwrap();
        writeln!(out, "correct_partial={}", self.correct_partial).unwrap();
        writeln!(out, "precision={}", value(self.precision)).unwrap();
        writeln!(out, "precision_percent={}", pct(self.precision)).unwrap();
        writeln!(out, "complete_share={}", value(self.complete_share())).unwrap();
        writeln!(out, "partial_share={}", value(self.partial_share())).unwrap();
        writeln!(out, "gold_in_scope={}", self.gold_in_scope).unwrap();
        writeln!(out, "recalled={}", self.recalled).unwrap();
        writeln!(out, "recall={}", value(self.recall)).unwrap();
        writeln!(out, "recall_percent={}", pct(self.recall)).unwrap();
        for (label, n) in &self.error_breakdown {
            writeln!(out, "error.{label}={n}").unwrap();
        }
        out
    }
}

pub const UNLABELED: &str = "unlabeled";

pub fn score<M: ScoredSpan>(matches: &[M], gold: &[GoldSpan]) -> EvalReport {
    let mut order: Vec<usize> = (0..matches.len()).collect();
    order.sort_by(|&a, &b| {
        (matches[a].span(), matches[a].label()).cmp(&(matches[b].span(), matches[b].label()))
    });
    let mut gold_order: Vec<usize> = (0..gold.len()).filter(|&i| gold[i].in_scope).collect();
    gold_order.sort_by_key(|&i| (gold[i].start_token, gold[i].end_token, i));

    let mut used = vec![false; gold.len()];
    let mut exact: HashMap<(usize, usize), VecDeque<usize>> = HashMap::new();
    for &g in &gold_order {
        exact
            .entry((gold[g].start_token, gold[g].end_token))
            .or_default()
            .push_back(g);
    }

    let mut paired = vec![false; matches.len()];
    let mut complete = 0;
    for &m in &order {
        if let Some(g) = exact.get_mut(&matches[m].span()).and_then(VecDeque::pop_front) {
            used[g] = true;
            paired[m] = true;
            complete += 1;
        }
    }
    let mut partial = 0;
    for &m in &order {
        if paired[m] {
            continue;
        }
        let (s, e) = matches[m].span();
        let container = gold_order.iter().copied().find(|&g| {
            let gs = &gold[g];
            !used[g] && gs.start_token <= s && e <= gs.end_token && (gs.start_token, gs.end_token) != (s, e)
        });
        if let Some(g) = container {
            used[g] = true;
            paired[m] = true;
            partial += 1;
        }
    }

    let mut error_breakdown = BTreeMap::new();
    for m in (0..matches.len()).filter(|&m| !paired[m]) {
        let label = matches[m].label().unwrap_or(UNLABELED).to_owned();
        *error_breakdown.entry(label).or_insert(0) += 1;
    }
    let gold_in_scope = gold_order.len();
    let recalled = used.iter().filter(|&&u| u).count();
    EvalReport {
        retained: matches.len(),
        correct_complete: complete,
        correct_partial: partial,
        precision: ratio(complete + partial, matches.len()),
        gold_in_scope,
        recalled,
        recall: ratio(recalled, gold_in_scope),
        error_breakdown,
    }
}
