//! Inflected-form lexicons (`.dlf`) and lexical-mask matching.
//!
//! ```text
//! CODES POS=V,N,DET FEAT=KP3spmf
//! préféré,préférer.V:K
//! recèle,receler.V:P3s
//! ```
//!
//! POS codes are comma separated; feature codes are single characters.

use std::collections::{BTreeMap, BTreeSet};

use crate::rtn::LexicalMask;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LexEntry {
    pub form: String,
    pub lemma: String,
    pub pos: String,
    pub features: BTreeSet<char>,
}

impl LexEntry {
    /// Subset semantics: every constraint the mask states holds for this entry.
    pub fn satisfies(&self, mask: &LexicalMask) -> bool {
        mask.lemma.as_ref().is_none_or(|l| *l == self.lemma)
            && mask.pos.as_ref().is_none_or(|p| *p == self.pos)
            && mask.feature_codes().all(|c| self.features.contains(&c))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: undeclared code {code:?}")]
    UndeclaredCode { line: usize, code: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    pos_codes: BTreeSet<String>,
    feature_codes: BTreeSet<char>,
    entries: BTreeMap<String, BTreeSet<LexEntry>>,
}

fn malformed(line: usize, message: impl Into<String>) -> LexiconError {
    LexiconError::Malformed {
        line,
        message: message.into(),
    }
}

impl Lexicon {
    pub fn new(pos_codes: impl IntoIterator<Item = String>, feature_codes: impl IntoIterator<Item = char>) -> Self {
        Lexicon {
            pos_codes: pos_codes.into_iter().collect(),
            feature_codes: feature_codes.into_iter().collect(),
            entries: BTreeMap::new(),
        }
    }

    pub fn pos_codes(&self) -> &BTreeSet<String> {
        &self.pos_codes
    }

    pub fn feature_codes(&self) -> &BTreeSet<char> {
        &self.feature_codes
    }

    /// Adds an entry; fails with the offending code when it is undeclared.
    pub fn insert(&mut self, entry: LexEntry) -> Result<bool, String> {
        if !self.pos_codes.contains(&entry.pos) {
            return Err(entry.pos);
        }
        if let Some(c) = entry.features.iter().find(|c| !self.feature_codes.contains(c)) {
            return Err(c.to_string());
        }
        Ok(self.entries.entry(entry.form.clone()).or_default().insert(entry))
    }

    /// All entries (homographs included) for an exact surface form.
    pub fn lookup(&self, form: &str) -> impl Iterator<Item = &LexEntry> {
        self.entries.get(form).into_iter().flatten()
    }

    /// Entries for `token`, treating the case of its first character as
    /// irrelevant when `fold_case` is set.
    pub fn candidates<'a>(&'a self, token: &str, fold_case: bool) -> Vec<&'a LexEntry> {
        if !fold_case {
            return self.lookup(token).collect();
        }
        let (lower, upper) = first_case_variants(token);
        let mut out: Vec<&LexEntry> = self.lookup(&lower).collect();
        if upper != lower {
            out.extend(self.lookup(&upper));
        }
        if token != lower && token != upper {
            out.extend(self.lookup(token));
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn entries(&self) -> impl Iterator<Item = &LexEntry> {
        self.entries.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Codes a mask uses that this lexicon does not declare.
    pub fn undeclared_codes(&self, mask: &LexicalMask) -> Vec<String> {
        let mut out = Vec::new();
        if let Some(pos) = &mask.pos {
            if !self.pos_codes.contains(pos) {
                out.push(pos.clone());
            }
        }
        out.extend(
            mask.feature_codes()
                .filter(|c| !self.feature_codes.contains(c))
                .map(String::from),
        );
        out
    }
}

/// The token with its first character lowercased and uppercased.
pub(crate) fn first_case_variants(token: &str) -> (String, String) {
    let mut chars = token.chars();
    match chars.next() {
        None => (String::new(), String::new()),
        Some(first) => {
            let rest = chars.as_str();
            (
                first.to_lowercase().chain(rest.chars()).collect(),
                first.to_uppercase().chain(rest.chars()).collect(),
            )
        }
    }
}

/// Does some reading of `token` satisfy `mask`?
pub fn mask_matches(mask: &LexicalMask, token: &str, lexicon: &Lexicon, fold_case: bool) -> bool {
    lexicon
        .candidates(token, fold_case)
        .into_iter()
        .any(|e| e.satisfies(mask))
}

fn parse_codes(line: usize, header: &str) -> Result<(Vec<String>, Vec<char>), LexiconError> {
    let mut words = header.split_whitespace();
    if words.next() != Some("CODES") {
        return Err(malformed(line, "expected `CODES POS=... FEAT=...` header"));
    }
    let mut pos = None;
    let mut feat = None;
    for w in words {
        if let Some(list) = w.strip_prefix("POS=") {
            pos = Some(list.split(',').filter(|s| !s.is_empty()).map(str::to_owned).collect());
        } else if let Some(list) = w.strip_prefix("FEAT=") {
            feat = Some(list.chars().collect());
        } else {
            return Err(malformed(line, format!("unexpected header field {w:?}")));
        }
    }
    match (pos, feat) {
        (Some(p), f) => Ok((p, f.unwrap_or_default())),
        (None, _) => Err(malformed(line, "header declares no POS codes")),
    }
}

/// Parses one `form,lemma.POS:codes` line.
pub fn parse_entry_line(text: &str) -> Result<LexEntry, String> {
    let (form, rest) = text.split_once(',').ok_or("missing ',' after form")?;
    let (head, features) = match rest.split_once(':') {
        Some((h, f)) => (h, f),
        None => (rest, ""),
    };
    let (lemma, pos) = head.rsplit_once('.').ok_or("missing '.POS'")?;
    if form.is_empty() {
        return Err("empty form".into());
    }
    if lemma.is_empty() {
        return Err("empty lemma".into());
    }
    if pos.is_empty() {
        return Err("empty part of speech".into());
    }
    if rest.contains(char::is_whitespace) || form.contains(char::is_whitespace) {
        return Err("whitespace inside entry".into());
    }
    Ok(LexEntry {
        form: form.to_owned(),
        lemma: lemma.to_owned(),
        pos: pos.to_owned(),
        features: features.chars().collect(),
    })
}

pub fn parse_lexicon(text: &str) -> Result<Lexicon, LexiconError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line, header) = lines.next().ok_or_else(|| malformed(1, "missing CODES header"))?;
    let (pos, feat) = parse_codes(line, header)?;
    let mut lexicon = Lexicon::new(pos, feat);
    for (line, text) in lines {
        let entry = parse_entry_line(text).map_err(|m| malformed(line, m))?;
        lexicon
            .insert(entry)
            .map_err(|code| LexiconError::UndeclaredCode { line, code })?;
    }
    Ok(lexicon)
}

pub fn serialize_lexicon(lexicon: &Lexicon) -> String {
    let pos: Vec<&str> = lexicon.pos_codes.iter().map(String::as_str).collect();
    let feat: String = lexicon.feature_codes.iter().collect();
    let mut out = format!("CODES POS={} FEAT={}\n", pos.join(","), feat);
    for e in lexicon.entries() {
        out.push_str(&format!("{},{}.{}", e.form, e.lemma, e.pos));
        if !e.features.is_empty() {
            out.push(':');
            out.extend(e.features.iter());
        }
        out.push('\n');
    }
    out
}
