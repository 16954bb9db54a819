//! Diagnostics shared by the lexer, the parser and both analyses.

use std::fmt;

use serde::Serialize;

use crate::span::SourceSpan;

/// Every diagnostic code the compiler can emit. The code determines the
/// message template.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Code {
    /// Character outside the SPL alphabet.
    Lex001,
    /// Numeral larger than 2^31 - 1.
    Lex002,
    Syn001,
    Name001,
    Name002,
    Type001,
    Type002,
    Type003,
    Type004,
    Type005,
    Type006,
    Type007,
    Type008,
    Type009,
    Type010,
    Type011,
    Type012,
}

impl Code {
    pub fn as_str(self) -> &'static str {
        match self {
            Code::Lex001 => "LEX001",
            Code::Lex002 => "LEX002",
            Code::Syn001 => "SYN001",
            Code::Name001 => "NAME001",
            Code::Name002 => "NAME002",
            Code::Type001 => "TYPE001",
            Code::Type002 => "TYPE002",
            Code::Type003 => "TYPE003",
            Code::Type004 => "TYPE004",
            Code::Type005 => "TYPE005",
            Code::Type006 => "TYPE006",
            Code::Type007 => "TYPE007",
            Code::Type008 => "TYPE008",
            Code::Type009 => "TYPE009",
            Code::Type010 => "TYPE010",
            Code::Type011 => "TYPE011",
            Code::Type012 => "TYPE012",
        }
    }

    pub fn parse(text: &str) -> Option<Code> {
        ALL_CODES.iter().copied().find(|c| c.as_str() == text)
    }

    pub fn category(self) -> Category {
        match self {
            Code::Lex001 | Code::Lex002 => Category::Lexical,
            Code::Syn001 => Category::Syntax,
            Code::Name001 | Code::Name002 => Category::Name,
            _ => Category::Type,
        }
    }

    /// Fixed message text for the codes whose message takes no argument.
    pub fn template(self) -> &'static str {
        match self {
            Code::Lex001 => "unexpected character",
            Code::Lex002 => "numeral out of range",
            Code::Syn001 => "syntax error",
            Code::Name001 => "undefined variable",
            Code::Name002 => "duplicate declaration",
            Code::Type001 => "operand must be int",
            Code::Type002 => "illegal access",
            Code::Type003 => "illegal index",
            Code::Type004 => "condition must be boolean",
            Code::Type005 => "assignment type mismatch",
            Code::Type006 => "illegal assignment target",
            Code::Type007 => "not a procedure",
            Code::Type008 => "wrong number of arguments",
            Code::Type009 => "argument type mismatch",
            Code::Type010 => "ref argument must be a variable",
            Code::Type011 => "not a type",
            Code::Type012 => "cyclic type synonym",
        }
    }
}

pub const ALL_CODES: [Code; 17] = [
    Code::Lex001,
    Code::Lex002,
    Code::Syn001,
    Code::Name001,
    Code::Name002,
    Code::Type001,
    Code::Type002,
    Code::Type003,
    Code::Type004,
    Code::Type005,
    Code::Type006,
    Code::Type007,
    Code::Type008,
    Code::Type009,
    Code::Type010,
    Code::Type011,
    Code::Type012,
];

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Category {
    Lexical,
    Syntax,
    Name,
    Type,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Diagnostic {
    pub code: Code,
    pub span: SourceSpan,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: Code, span: SourceSpan) -> Self {
        Diagnostic {
            code,
            span,
            message: code.template().to_string(),
        }
    }

    /// Template text followed by `: detail`.
    pub fn with_detail(code: Code, span: SourceSpan, detail: impl fmt::Display) -> Self {
        Diagnostic {
            code,
            span,
            message: format!("{}: {}", code.template(), detail),
        }
    }

    pub fn sort_key(&self) -> (u32, u32, Code) {
        (self.span.line_start, self.span.col_start, self.code)
    }

    pub fn to_record(&self) -> JsonRecord<'_> {
        JsonRecord {
            code: self.code.as_str(),
            file: &self.span.file,
            line: self.span.line_start,
            col: self.span.col_start,
            message: &self.message,
        }
    }
}

/// Sort by (line, col, code). Stable, so equal keys keep contribution order.
pub fn sort_diagnostics(diags: &mut [Diagnostic]) {
    diags.sort_by_key(|d| d.sort_key());
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: error[{}]: {}",
            self.span.file, self.span.line_start, self.span.col_start, self.code, self.message
        )
    }
}

/// Flat machine-readable form, one per line with `--json`.
#[derive(Debug, Serialize)]
pub struct JsonRecord<'a> {
    pub code: &'a str,
    pub file: &'a str,
    pub line: u32,
    pub col: u32,
    pub message: &'a str,
}
