//! Lexicon-grammar tables (`.lgt`).
//!
//! ```text
//! TABLE 32NM LEVEL lexical
//! id	V	N0VN1
//! identifier	value	switch
//! 0005	préférer	+
//! ```
//!
//! Each graph parameter binds to one column. Switch cells hold a binary
//! acceptability trait, value cells hold text copied into the graph, and the
//! identifier column names the entry. `<E>` writes the empty value.
//! Fields are separated by tabs.
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeSet, HashMap};
use std::fmt;

/// Written form of the empty value.
pub const EMPTY_VALUE: &str = "<E>";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ColumnKind {
    Identifier,
    Switch,
    Value,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Identifier => "identifier",
            ColumnKind::Switch => "switch",
            ColumnKind::Value => "value",
        }
    }

    fn parse(word: &str) -> Option<Self> {
        match word {
            "identifier" => Some(ColumnKind::Identifier),
            "switch" => Some(ColumnKind::Switch),
            "value" => Some(ColumnKind::Value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
}

/// Whether a table describes lexical items or classes of them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Lexical,
    Class,
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Lexical => "lexical",
            Level::Class => "class",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub id: String,
    /// Cells in schema order, identifier included.
    pub cells: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown column kind {kind:?}")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: invalid switch trait {cell:?} in column {column}")]
    InvalidSwitch { line: usize, column: String, cell: String },
    #[error("line {line}: duplicate entry id {id:?}")]
    DuplicateEntry { line: usize, id: String },
    #[error("line {line}: empty value cell in column {column} (write <E> for the empty value)")]
    EmptyCell { line: usize, column: String },
    #[error("line {line}: pass-through token {cell:?} in a lexical-level table")]
    PassThroughInLexical { line: usize, cell: String },
    #[error("duplicate column {0:?}")]
    DuplicateColumn(String),
    #[error("a table needs exactly one identifier column, found {0}")]
    IdentifierCount(usize),
    #[error("unknown entry {0:?}")]
    UnknownEntry(String),
    #[error("unknown column {0:?}")]
    UnknownColumn(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub name: String,
    pub level: Level,
    schema: Vec<ColumnSchema>,
    entries: Vec<Entry>,
    columns: HashMap<String, usize>,
    rows: HashMap<String, usize>,
    id_column: usize,
}

fn syntax(line: usize, message: impl Into<String>) -> TableError {
    TableError::Syntax {
        line,
        message: message.into(),
    }
}

impl Table {
    /// Builds a table, checking the schema and every entry.
    pub fn new(
        name: impl Into<String>,
        level: Level,
        schema: Vec<ColumnSchema>,
        rows: Vec<Vec<String>>,
    ) -> Result<Self, TableError> {
        Self::build(name.into(), level, schema, rows.into_iter().map(|r| (0, r)).collect())
    }

    fn build(
        name: String,
        level: Level,
        schema: Vec<ColumnSchema>,
        rows: Vec<(usize, Vec<String>)>,
    ) -> Result<Self, TableError> {
        let mut columns = HashMap::new();
        for (i, c) in schema.iter().enumerate() {
            if columns.insert(c.name.clone(), i).is_some() {
                return Err(TableError::DuplicateColumn(c.name.clone()));
            }
        }
        let ids: Vec<usize> = schema
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == ColumnKind::Identifier)
            .map(|(i, _)| i)
            .collect();
        if ids.len() != 1 {
            return Err(TableError::IdentifierCount(ids.len()));
        }
        let id_column = ids[0];
        let mut entries = Vec::with_capacity(rows.len());
        let mut index = HashMap::new();
        for (line, cells) in rows {
            if cells.len() != schema.len() {
                return Err(syntax(
                    line,
                    format!("expected {} cells, found {}", schema.len(), cells.len()),
                ));
            }
            for (col, cell) in schema.iter().zip(&cells) {
                match col.kind {
                    ColumnKind::Switch if cell != "+" && cell != "-" => {
                        return Err(TableError::InvalidSwitch {
                            line,
                            column: col.name.clone(),
                            cell: cell.clone(),
                        })
                    }
                    _ if cell.is_empty() => {
                        return Err(TableError::EmptyCell {
                            line,
                            column: col.name.clone(),
                        })
                    }
                    ColumnKind::Identifier if cell.contains(['@', '\t', ' ']) => {
                        return Err(syntax(line, format!("invalid identifier {cell:?}")))
                    }
                    _ => {}
                }
                if level == Level::Lexical && cell.contains('@') {
                    return Err(TableError::PassThroughInLexical {
                        line,
                        cell: cell.clone(),
                    });
                }
            }
            let id = cells[id_column].clone();
            if index.insert(id.clone(), entries.len()).is_some() {
                return Err(TableError::DuplicateEntry { line, id });
            }
            entries.push(Entry { id, cells });
        }
        Ok(Table {
            name,
            level,
            schema,
            entries,
            columns,
            rows: index,
            id_column,
        })
    }

    pub fn schema(&self) -> &[ColumnSchema] {
        &self.schema
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry_ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSchema> {
        self.columns.get(name).map(|&i| &self.schema[i])
    }

    pub fn identifier_column(&self) -> &ColumnSchema {
        &self.schema[self.id_column]
    }

    pub fn entry(&self, id: &str) -> Option<&Entry> {
        self.rows.get(id).map(|&i| &self.entries[i])
    }

    /// The cell of `entry_id` in `column`, verbatim.
    pub fn lookup(&self, entry_id: &str, column: &str) -> Result<&str, TableError> {
        let entry = self
            .entry(entry_id)
            .ok_or_else(|| TableError::UnknownEntry(entry_id.to_owned()))?;
        let &col = self
            .columns
            .get(column)
            .ok_or_else(|| TableError::UnknownColumn(column.to_owned()))?;
        Ok(&entry.cells[col])
    }

    /// Entry ids that occur more than once. Always empty for a constructed table.
    pub fn duplicate_ids(&self) -> Vec<&str> {
        let mut seen = BTreeSet::new();
        self.entries
            .iter()
            .filter(|e| !seen.insert(e.id.as_str()))
            .map(|e| e.id.as_str())
            .collect()
    }
}

/// Parses a `.lgt` table file.
pub fn parse_table(text: &str) -> Result<Table, TableError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));

    let (line, header) = lines.next().ok_or_else(|| syntax(1, "missing TABLE line"))?;
    let words: Vec<&str> = header.split_whitespace().collect();
    let (name, level) = match words.as_slice() {
        ["TABLE", name, "LEVEL", level] => {
            let level = match *level {
                "lexical" => Level::Lexical,
                "class" => Level::Class,
                other => return Err(syntax(line, format!("unknown level {other:?}"))),
            };
            (name.to_string(), level)
        }
        _ => return Err(syntax(line, "expected `TABLE <name> LEVEL lexical|class`")),
    };

    let (_, names) = lines.next().ok_or_else(|| syntax(line + 1, "missing column names"))?;
    let (kind_line, kinds) = lines.next().ok_or_else(|| syntax(line + 2, "missing column kinds"))?;
    let names: Vec<&str> = names.split('\t').map(str::trim).collect();
    let kinds: Vec<&str> = kinds.split('\t').map(str::trim).collect();
    if names.len() != kinds.len() {
        return Err(syntax(kind_line, "column name and kind rows differ in length"));
    }
    let mut schema = Vec::with_capacity(names.len());
    for (n, k) in names.iter().zip(&kinds) {
        if n.is_empty() {
            return Err(syntax(kind_line - 1, "empty column name"));
        }
        let kind = ColumnKind::parse(k).ok_or_else(|| TableError::UnknownKind {
            line: kind_line,
            kind: k.to_string(),
        })?;
        schema.push(ColumnSchema {
            name: n.to_string(),
            kind,
        });
    }
    let rows = lines
        .map(|(l, row)| (l, row.split('\t').map(|c| c.trim().to_owned()).collect()))
        .collect();
    Table::build(name, level, schema, rows)
}

/// Writes a table in the `.lgt` format.
pub fn serialize_table(table: &Table) -> String {
    let mut out = format!("TABLE {} LEVEL {}\n", table.name, table.level);
    let names: Vec<&str> = table.schema.iter().map(|c| c.name.as_str()).collect();
    let kinds: Vec<&str> = table.schema.iter().map(|c| c.kind.as_str()).collect();
    out.push_str(&names.join("\t"));
    out.push('\n');
    out.push_str(&kinds.join("\t"));
    out.push('\n');
    for e in &table.entries {
        out.push_str(&e.cells.join("\t"));
        out.push('\n');
    }
    out
}
