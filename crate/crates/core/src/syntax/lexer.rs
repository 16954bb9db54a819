use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::diagnostic::{Code, Diagnostic};
use crate::span::SourceSpan;

pub const KEYWORDS: [&str; 11] = [
    "proc", "var", "type", "ref", "val", "if", "else", "while", "array", "of", "int",
];

const MAX_NUMERAL: u64 = i32::MAX as u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Identifier,
    Numeral,
    Keyword,
    Operator,
    Punctuation,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
}

impl Token {
    pub fn is(&self, text: &str) -> bool {
        self.kind != TokenKind::Eof && self.text == text
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            TokenKind::Eof => f.write_str("end of input"),
            TokenKind::Identifier => write!(f, "identifier `{}`", self.text),
            TokenKind::Numeral => write!(f, "numeral `{}`", self.text),
            _ => write!(f, "`{}`", self.text),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unexpected character {ch:?}")]
    UnexpectedChar { ch: char, span: SourceSpan },
    #[error("numeral {text} exceeds 2147483647")]
    NumeralTooLarge { text: String, span: SourceSpan },
}

impl LexError {
    pub fn span(&self) -> &SourceSpan {
        match self {
            LexError::UnexpectedChar { span, .. } | LexError::NumeralTooLarge { span, .. } => span,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        let code = match self {
            LexError::UnexpectedChar { .. } => Code::Lex001,
            LexError::NumeralTooLarge { .. } => Code::Lex002,
        };
        Diagnostic {
            code,
            span: self.span().clone(),
            message: self.to_string(),
        }
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> (u32, u32) {
        (self.line, self.col)
    }
}

pub fn tokenize(file: &str, source: &str) -> Result<Vec<Token>, LexError> {
    let file: Arc<str> = Arc::from(file);
    let mut cur = Cursor {
        chars: source.chars().peekable(),
        line: 1,
        col: 1,
    };
    let mut tokens = Vec::new();
    loop {
        // whitespace and `//` comments
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '/' && source_has_comment(&cur) {
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }
        let start = cur.pos();
        let Some(c) = cur.bump() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                text: String::new(),
                span: SourceSpan::new(file.clone(), start, start),
            });
            return Ok(tokens);
        };
        let mut text = String::from(c);
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            while let Some(n) = cur
                .peek()
                .filter(|n| n.is_ascii_alphanumeric() || *n == '_')
            {
                text.push(n);
                cur.bump();
            }
            if KEYWORDS.contains(&text.as_str()) {
                TokenKind::Keyword
            } else {
                TokenKind::Identifier
            }
        } else if c.is_ascii_digit() {
            while let Some(n) = cur.peek().filter(char::is_ascii_digit) {
                text.push(n);
                cur.bump();
            }
            TokenKind::Numeral
        } else {
            match c {
                ':' | '<' | '>' if cur.peek() == Some('=') => {
                    text.push('=');
                    cur.bump();
                    TokenKind::Operator
                }
                '+' | '-' | '*' | '/' | '=' | '#' | '<' | '>' => TokenKind::Operator,
                '(' | ')' | '[' | ']' | '{' | '}' | ',' | ';' | ':' => TokenKind::Punctuation,
                _ => {
                    return Err(LexError::UnexpectedChar {
                        ch: c,
                        span: SourceSpan::new(file.clone(), start, start),
                    })
                }
            }
        };
        let end = (cur.line, cur.col - 1);
        let span = SourceSpan::new(file.clone(), start, end);
        if kind == TokenKind::Numeral && !numeral_fits(&text) {
            return Err(LexError::NumeralTooLarge { text, span });
        }
        tokens.push(Token { kind, text, span });
    }
}

fn source_has_comment(cur: &Cursor<'_>) -> bool {
    let mut ahead = cur.chars.clone();
    ahead.next() == Some('/') && ahead.next() == Some('/')
}

fn numeral_fits(text: &str) -> bool {
    let digits = text.trim_start_matches('0');
    digits.len() <= 10 && digits.parse::<u64>().map_or(true, |v| v <= MAX_NUMERAL)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds_and_texts(src: &str) -> Vec<(TokenKind, String)> {
        tokenize("t.spl", src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.text))
            .collect()
    }

    #[test]
    fn inequality_operator() {
        use TokenKind::*;
        assert_eq!(
            kinds_and_texts("a # b"),
            vec![
                (Identifier, "a".into()),
                (Operator, "#".into()),
                (Identifier, "b".into()),
                (Eof, "".into())
            ]
        );
    }

    #[test]
    fn empty_input_is_just_eof() {
        assert_eq!(kinds_and_texts(""), vec![(TokenKind::Eof, String::new())]);
        assert_eq!(
            kinds_and_texts("  // only a comment\n"),
            vec![(TokenKind::Eof, String::new())]
        );
    }

    #[test]
    fn numeral() {
        assert_eq!(
            kinds_and_texts("25"),
            vec![
                (TokenKind::Numeral, "25".into()),
                (TokenKind::Eof, "".into())
            ]
        );
    }

    #[test]
    fn compound_operators_and_keywords() {
        let toks = kinds_and_texts("x := y <= z >= w < v > u; proc var arrays");
        let texts: Vec<_> = toks.iter().map(|t| t.1.as_str()).collect();
        assert_eq!(
            texts,
            [
                "x", ":=", "y", "<=", "z", ">=", "w", "<", "v", ">", "u", ";", "proc", "var",
                "arrays", ""
            ]
        );
        assert_eq!(toks[12].0, TokenKind::Keyword);
        assert_eq!(toks[14].0, TokenKind::Identifier);
    }

    #[test]
    fn spans_are_one_based_and_inclusive() {
        let toks = tokenize("t.spl", "proc main()\n  x := 10;").unwrap();
        assert_eq!(toks[0].span.to_string(), "1:1-1:4");
        assert_eq!(toks[1].span.to_string(), "1:6-1:9");
        assert_eq!(toks[4].span.to_string(), "2:3-2:3");
        assert_eq!(toks[5].span.to_string(), "2:5-2:6");
        assert_eq!(toks[6].span.to_string(), "2:8-2:9");
        assert_eq!(toks.last().unwrap().span.to_string(), "2:11-2:11");
    }

    #[test]
    fn slash_is_division_unless_doubled() {
        let texts: Vec<_> = kinds_and_texts("a / b // c\nd")
            .into_iter()
            .map(|t| t.1)
            .collect();
        assert_eq!(texts, ["a", "/", "b", "d", ""]);
    }

    #[test]
    fn rejects_characters_outside_alphabet() {
        let err = tokenize("t.spl", "x := 'c';").unwrap_err();
        assert!(matches!(err, LexError::UnexpectedChar { ch: '\'', .. }));
        assert_eq!(err.span().to_string(), "1:6-1:6");
        assert_eq!(err.to_diagnostic().code, Code::Lex001);
    }

    #[test]
    fn numeral_range() {
        assert!(tokenize("t", "2147483647").is_ok());
        assert!(tokenize("t", "0002147483647").is_ok());
        let err = tokenize("t", "2147483648").unwrap_err();
        assert!(matches!(err, LexError::NumeralTooLarge { .. }));
        assert_eq!(err.to_diagnostic().code, Code::Lex002);
        assert!(tokenize("t", "99999999999999999999999").is_err());
    }
}
