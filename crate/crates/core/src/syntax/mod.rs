//! Lexing, parsing and printing of SPL source text.

mod ast;
mod lexer;
mod parser;
mod pretty;

use thiserror::Error;

pub use ast::{declarations, dump, dump_structure, Ast, BinOp, CmpOp, Kind, Mode};
pub use lexer::{tokenize, LexError, Token, TokenKind, KEYWORDS};
pub use parser::{parse, SyntaxError};
pub use pretty::{pretty, term as pretty_term, type_expr as pretty_type};

use crate::diagnostic::Diagnostic;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FrontendError {
    #[error(transparent)]
    Lex(#[from] LexError),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

impl FrontendError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        match self {
            FrontendError::Lex(e) => e.to_diagnostic(),
            FrontendError::Syntax(e) => e.to_diagnostic(),
        }
    }
}

/// Tokenizes and parses `source`; `file` names it in spans.
pub fn parse_source(file: &str, source: &str) -> Result<Ast, FrontendError> {
    let tokens = tokenize(file, source)?;
    Ok(parse(&tokens)?)
}
