//! Lexer, parser and binder for `.swl` programs.

pub mod ast;
mod binder;
mod diagnostics;
mod lexer;
mod parser;
mod pretty;

pub use binder::{
    bind_and_check, lower_unchecked, CExpr, CLet, CheckedFunction, CheckedProgram, Clause,
    DatasetInfo, EnsuresClause, EnsuresItem,
};
pub use diagnostics::{Code, Diagnostic, Severity, Span};
pub use lexer::{lex, Tok, Token};
pub use parser::{parse, parse_formula};
pub use pretty::{pretty_print, pretty_term};

use crate::logic::{normalize, Formula};

/// Parses and lowers a standalone formula without declarations in scope.
pub fn read_formula(src: &str) -> Result<Formula, Diagnostic> {
    let f = parse_formula(src)?;
    lower_unchecked(&f).map(|f| normalize(&f))
}

/// Parses and checks a whole program.
pub fn check_source(src: &str) -> Result<CheckedProgram, Vec<Diagnostic>> {
    let ast = parse(src).map_err(|d| vec![d])?;
    bind_and_check(&ast)
}
