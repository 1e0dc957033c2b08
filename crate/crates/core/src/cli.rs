//! Command-line front end. `run` returns the process exit status:
//! 0 on success, 1 for semantic errors (invalid grammar, unknown column,
//! unresolved call), 2 for I/O and format errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use crate::eval::{load_gold, parse_match_file, percent, score};
use crate::io::{load_graphs, load_grammar_dir, manifest_dispatch, write_lexicalized, LoadError};
use crate::lexicalizer::{lexicalize_set, lexicalize_two_pass, parameterized_graphs, scan_parameters, ParamKind};
use crate::lexicon::{parse_lexicon, Lexicon};
use crate::matcher::{format_matches, match_tokens, tokenize, MatchMode, MatchPolicy};
use crate::rtn::{export_dot, validate_set, Atom, GrammarSet, Graph};
use crate::table::{parse_table, Table};

#[derive(Debug, Parser)]
#[command(name = "lexigraph", version, about = "Lexicalize parameterized graph grammars and match them on text")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check graphs, tables and lexicon for well-formedness.
    Validate(RunConfig),
    /// Instantiate parameterized graphs against table entries.
    Lexicalize(RunConfig),
    /// Match a grammar against a corpus.
    Match(RunConfig),
    /// Score a match file against gold annotations.
    Eval(RunConfig),
    /// Export graphs in Graphviz format.
    Dot(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    All,
    Longest,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Directory of `.rg` graph files.
    #[arg(long)]
    pub grammar: Option<PathBuf>,
    /// Name of the main graph.
    #[arg(long)]
    pub main: Option<String>,
    /// Lexicon-grammar table (single pass).
    #[arg(long)]
    pub table: Vec<PathBuf>,
    #[arg(long)]
    pub class_table: Option<PathBuf>,
    #[arg(long)]
    pub lexical_table: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub gold: Option<PathBuf>,
    /// Match file to score (`matches.tsv` from `match`).
    #[arg(long)]
    pub matches: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "longest")]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 16)]
    pub max_depth: usize,
    #[arg(long)]
    pub fold_case: bool,
    /// Report calls to graphs missing from the set.
    #[arg(long)]
    pub require_resolved: bool,
    /// Graph to export (repeatable).
    #[arg(long)]
    pub graph: Vec<String>,
    /// Export every graph.
    #[arg(long)]
    pub all: bool,
}

enum Failure {
    Semantic(String),
    Format(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Semantic(_) => 1,
            Failure::Format(_) => 2,
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        if e.is_format() {
            Failure::Format(e.to_string())
        } else {
            Failure::Semantic(e.to_string())
        }
    }
}

fn semantic(e: impl std::fmt::Display) -> Failure {
    Failure::Semantic(e.to_string())
}

fn format_err(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Format(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| format_err(path, e))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| format_err(path, e))
}

fn create_dir(path: &Path) -> Result<(), Failure> {
    fs::create_dir_all(path).map_err(|e| format_err(path, e))
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    value.as_ref().ok_or_else(|| Failure::Format(format!("missing --{flag}")))
}

fn load_table(path: &Path) -> Result<Table, Failure> {
    parse_table(&read(path)?).map_err(|e| format_err(path, e))
}

fn load_lexicon(path: &Path) -> Result<Lexicon, Failure> {
    parse_lexicon(&read(path)?).map_err(|e| format_err(path, e))
}

fn load_set(cfg: &RunConfig) -> Result<GrammarSet, Failure> {
    let dir = required(&cfg.grammar, "grammar")?;
    let set = load_grammar_dir(dir, cfg.main.as_deref())?;
    info!("loaded {} graphs from {}, main graph {}", set.graphs.len(), dir.display(), set.main);
    Ok(set)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Validate(cfg) => validate(cfg, out),
        Command::Lexicalize(cfg) => lexicalize(cfg, out),
        Command::Match(cfg) => run_match(cfg, out),
        Command::Eval(cfg) => evaluate(cfg, out),
        Command::Dot(cfg) => dot(cfg, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let (Failure::Semantic(m) | Failure::Format(m)) = &f;
            let _ = writeln!(err, "error: {m}");
            f.code()
        }
    }
}

fn validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut problems: Vec<String> = Vec::new();
    let mut checked = 0;

    let mut graphs: Vec<Graph> = Vec::new();
    if let Some(dir) = &cfg.grammar {
        graphs = load_graphs(dir)?;
        let main = match cfg.main.clone() {
            Some(m) => Some(m),
            None => manifest_dispatch(dir)?,
        }
        .or_else(|| graphs.first().map(|g| g.name.clone()));
        match main {
            None => problems.push(format!("{}: no graph files", dir.display())),
            Some(main) => match GrammarSet::new(graphs.clone(), main) {
                Err(e) => problems.push(e.to_string()),
                Ok(set) => problems.extend(validate_set(&set, cfg.require_resolved).iter().map(|d| d.to_string())),
            },
        }
        checked += 1;
    }

    let mut tables = Vec::new();
    for path in cfg.table.iter().chain(&cfg.class_table).chain(&cfg.lexical_table) {
        tables.push(load_table(path)?);
        checked += 1;
    }
    if !tables.is_empty() && !graphs.is_empty() {
        let by_name = graphs.iter().map(|g| (g.name.clone(), g.clone())).collect();
        match parameterized_graphs(&by_name) {
            Err(e) => problems.push(e.to_string()),
            Ok(family) => {
                for name in family {
                    match scan_parameters(&by_name[&name]) {
                        Err(e) => problems.push(e.to_string()),
                        Ok(params) => {
                            for p in params {
                                if let ParamKind::Column(c) = &p.kind {
                                    if tables.iter().all(|t| t.column(c).is_none()) {
                                        problems.push(format!("graph {name}: parameter @{c}@ names no column of the given tables"));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    if let Some(path) = &cfg.lexicon {
        let lexicon = load_lexicon(path)?;
        checked += 1;
        for g in &graphs {
            for atom in g.atoms() {
                if let Atom::Mask(m) = atom {
                    if m.to_string().contains('@') {
                        continue;
                    }
                    for code in lexicon.undeclared_codes(m) {
                        problems.push(format!("graph {}: mask {m} uses undeclared code {code:?}", g.name));
                    }
                }
            }
        }
    }

    if checked == 0 {
        return Err(Failure::Format("nothing to validate: pass --grammar, --table or --lexicon".into()));
    }
    problems.sort();
    problems.dedup();
    for p in &problems {
        let _ = writeln!(out, "{p}");
    }
    if problems.is_empty() {
        let _ = writeln!(out, "ok");
        Ok(0)
    } else {
        Ok(1)
    }
}

fn lexicalize(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let set = load_set(cfg)?;
    let dir = required(&cfg.out, "out")?;
    let result = match (&cfg.class_table, &cfg.lexical_table, cfg.table.as_slice()) {
        (Some(c), Some(l), []) => lexicalize_two_pass(&set, &load_table(c)?, &load_table(l)?),
        (None, None, [t]) => lexicalize_set(&set, &load_table(t)?),
        _ => {
            return Err(Failure::Format(
                "pass either one --table or both --class-table and --lexical-table".into(),
            ))
        }
    }
    .map_err(semantic)?;
    write_lexicalized(dir, result.set.as_ref(), &result.report)?;
    let r = &result.report;
    match &r.dispatch {
        Some(d) => {
            let _ = writeln!(out, "{} variants, {} dropped, dispatch {d}", r.variants.len(), r.dropped.len());
        }
        None => {
            if r.dropped_dispatch.is_some() {
                warn!("no variant of the main graph survived");
            }
            let _ = writeln!(out, "{} variants, {} dropped, no dispatch", r.variants.len(), r.dropped.len());
        }
    }
    Ok(0)
}

fn run_match(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let set = load_set(cfg)?;
    let diagnostics = validate_set(&set, true);
    if !diagnostics.is_empty() {
        let lines: Vec<String> = diagnostics.iter().map(|d| d.to_string()).collect();
        return Err(Failure::Semantic(lines.join("\n")));
    }
    let lexicon = match &cfg.lexicon {
        Some(p) => load_lexicon(p)?,
        None => Lexicon::default(),
    };
    let corpus_path = required(&cfg.corpus, "corpus")?;
    let text = read(corpus_path)?;
    let mode = match cfg.mode {
        ModeArg::All => MatchMode::All,
        ModeArg::Longest => MatchMode::LongestPerStart,
    };
    let policy = MatchPolicy::new(mode, cfg.max_depth, cfg.fold_case).map_err(semantic)?;
    let tokens = tokenize(&text);
    info!("{} tokens", tokens.len());
    let matches = match_tokens(&set, &lexicon, &tokens, &policy).map_err(semantic)?;
    let tsv = format_matches(&text, &tokens, &matches);
    match &cfg.out {
        Some(dir) => {
            create_dir(dir)?;
            write_file(&dir.join("matches.tsv"), &tsv)?;
            let _ = writeln!(out, "{} matches", matches.len());
        }
        None => {
            let _ = write!(out, "{tsv}");
        }
    }
    Ok(0)
}

fn evaluate(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let gold_path = required(&cfg.gold, "gold")?;
    let gold = load_gold(&read(gold_path)?).map_err(|e| format_err(gold_path, e))?;
    let matches_path = match (&cfg.matches, &cfg.out) {
        (Some(m), _) => m.clone(),
        (None, Some(dir)) => dir.join("matches.tsv"),
        (None, None) => return Err(Failure::Format("missing --matches".into())),
    };
    let matches = parse_match_file(&read(&matches_path)?).map_err(|e| format_err(&matches_path, e))?;
    let report = score(&matches, &gold);
    if let Some(dir) = &cfg.out {
        create_dir(dir)?;
        write_file(&dir.join("eval.txt"), &report.to_text())?;
        write_file(&dir.join("eval.kv"), &report.to_kv())?;
    }
    let show = |r: Option<f64>| r.map(percent).unwrap_or_else(|| "undefined".into());
    let _ = writeln!(
        out,
        "precision {} recall {}",
        show(report.precision),
        show(report.recall)
    );
    Ok(0)
}

fn dot(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32, Failure> {
    let dir = required(&cfg.grammar, "grammar")?;
    let graphs = load_graphs(dir)?;
    let selected: Vec<&Graph> = if cfg.all {
        graphs.iter().collect()
    } else {
        if cfg.graph.is_empty() {
            return Err(Failure::Format("pass --graph <name> or --all".into()));
        }
        let mut v = Vec::new();
        for name in &cfg.graph {
            match graphs.iter().find(|g| &g.name == name) {
                Some(g) => v.push(g),
                None => return Err(Failure::Semantic(format!("unknown graph {name:?}"))),
            }
        }
        v
    };
    match &cfg.out {
        Some(out_dir) => {
            create_dir(out_dir)?;
            for g in &selected {
                let file = crate::io::graph_file_name(&g.name).replace(".rg", ".dot");
                write_file(&out_dir.join(file), &export_dot(g))?;
            }
            let _ = writeln!(out, "{} graphs exported", selected.len());
        }
        None => {
            for g in &selected {
                let _ = write!(out, "{}", export_dot(g));
            }
        }
    }
    Ok(0)
}
