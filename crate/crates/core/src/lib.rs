//! Lexicalization of parameterized recursive transition network grammars
//! against lexicon-grammar tables, and matching of the resulting grammars on
//! tokenized text.

pub mod cli;
pub mod eval;
pub mod io;
pub mod lexicalizer;
pub mod lexicon;
pub mod matcher;
pub mod rtn;
pub mod table;
