use thiserror::Error;

use super::ast::{Ast, BinOp, CmpOp, Kind, Mode};
use super::lexer::{Token, TokenKind};
use crate::diagnostic::{Code, Diagnostic};
use crate::rag::NodeId;
use crate::span::SourceSpan;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("expected {}, found {found}", expected_list(.expected))]
pub struct SyntaxError {
    pub expected: Vec<String>,
    pub found: String,
    pub span: SourceSpan,
}

fn expected_list(expected: &[String]) -> String {
    match expected {
        [one] => one.clone(),
        [init @ .., last] => format!("{} or {}", init.join(", "), last),
        [] => "nothing".into(),
    }
}

impl SyntaxError {
    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic::with_detail(Code::Syn001, self.span.clone(), self)
    }
}

type PResult<T> = Result<T, SyntaxError>;

/// Parses a token list ending in eof into a `Program` tree.
pub fn parse(tokens: &[Token]) -> PResult<Ast> {
    assert!(
        tokens.last().is_some_and(|t| t.kind == TokenKind::Eof),
        "token list must end with eof"
    );
    let mut p = Parser {
        tokens,
        pos: 0,
        tree: Ast::new(),
    };
    let root = p.program()?;
    p.tree.set_root(root);
    Ok(p.tree)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
    tree: Ast,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Token {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)]
    }

    fn at(&self, text: &str) -> bool {
        self.peek().is(text)
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = self.peek();
        Err(SyntaxError {
            expected: expected.iter().map(|e| e.to_string()).collect(),
            found: t.to_string(),
            span: t.span.clone(),
        })
    }

    fn expect(&mut self, text: &str) -> PResult<Token> {
        if self.at(text) {
            Ok(self.advance())
        } else {
            self.error(&[&format!("`{text}`")])
        }
    }

    fn eat(&mut self, text: &str) -> Option<Token> {
        self.at(text).then(|| self.advance())
    }

    fn identifier(&mut self) -> PResult<Token> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.advance())
        } else {
            self.error(&["identifier"])
        }
    }

    fn node(&mut self, kind: Kind, span: SourceSpan, children: Vec<NodeId>) -> NodeId {
        self.tree.add(kind, span, children)
    }

    fn span_of(&self, node: NodeId) -> SourceSpan {
        self.tree.span(node).clone()
    }

    fn program(&mut self) -> PResult<NodeId> {
        let first = self.peek().span.clone();
        let mut decls = Vec::new();
        while self.peek().kind != TokenKind::Eof {
            decls.push(self.declaration()?);
        }
        let span = match (decls.first(), decls.last()) {
            (Some(&a), Some(&b)) => self.span_of(a).to(&self.span_of(b)),
            _ => SourceSpan::new(first.file.clone(), (1, 1), (1, 1)),
        };
        Ok(self.node(Kind::Program, span, decls))
    }

    fn declaration(&mut self) -> PResult<NodeId> {
        if self.at("type") {
            let start = self.advance().span;
            let name = self.identifier()?.text;
            self.expect("=")?;
            let ty = self.type_expr()?;
            let end = self.expect(";")?.span;
            Ok(self.node(Kind::TypeSynonymDecl { name }, start.to(&end), vec![ty]))
        } else if self.at("proc") {
            self.procedure()
        } else {
            self.error(&["`proc`", "`type`"])
        }
    }

    fn procedure(&mut self) -> PResult<NodeId> {
        let start = self.expect("proc")?.span;
        let name = self.identifier()?.text;
        self.expect("(")?;
        let mut params = Vec::new();
        if !self.at(")") {
            params.push(self.parameter()?);
            while self.eat(",").is_some() {
                params.push(self.parameter()?);
            }
        }
        self.expect(")")?;
        let open = self.expect("{")?.span;
        let mut vars = Vec::new();
        while self.at("var") {
            vars.push(self.variable()?);
        }
        let mut stmts = Vec::new();
        while !self.at("}") {
            if self.peek().kind == TokenKind::Eof {
                return self.error(&["statement", "`}`"]);
            }
            stmts.push(self.statement()?);
        }
        let close = self.advance().span;
        let body = self.node(Kind::Compound, open.to(&close), stmts);
        let kind = Kind::ProcDecl {
            name,
            params: params.len(),
            vars: vars.len(),
        };
        let children = params.into_iter().chain(vars).chain([body]).collect();
        Ok(self.node(kind, start.to(&close), children))
    }

    fn parameter(&mut self) -> PResult<NodeId> {
        let mode = if self.at("ref") {
            Mode::Ref
        } else if self.at("val") {
            Mode::Val
        } else {
            return self.error(&["`ref`", "`val`"]);
        };
        let start = self.advance().span;
        let name = self.identifier()?.text;
        self.expect(":")?;
        let ty = self.type_expr()?;
        let span = start.to(&self.span_of(ty));
        Ok(self.node(Kind::Param { mode, name }, span, vec![ty]))
    }

    fn variable(&mut self) -> PResult<NodeId> {
        let start = self.expect("var")?.span;
        let name = self.identifier()?.text;
        self.expect(":")?;
        let ty = self.type_expr()?;
        let end = self.expect(";")?.span;
        Ok(self.node(Kind::VarDecl { name }, start.to(&end), vec![ty]))
    }

    fn type_expr(&mut self) -> PResult<NodeId> {
        let t = self.peek().clone();
        if t.kind == TokenKind::Identifier {
            self.advance();
            Ok(self.node(Kind::NamedType { name: t.text }, t.span, vec![]))
        } else if t.is("int") {
            self.advance();
            Ok(self.node(Kind::IntType, t.span, vec![]))
        } else if t.is("array") {
            self.advance();
            self.expect("[")?;
            let len = self.peek().clone();
            if len.kind != TokenKind::Numeral {
                return self.error(&["numeral"]);
            }
            self.advance();
            self.expect("]")?;
            self.expect("of")?;
            let base = self.type_expr()?;
            let length = len.text.parse().expect("lexer bounds numerals");
            let span = t.span.to(&self.span_of(base));
            Ok(self.node(Kind::ArrayType { length }, span, vec![base]))
        } else {
            self.error(&["identifier", "`int`", "`array`"])
        }
    }

    fn statement(&mut self) -> PResult<NodeId> {
        let t = self.peek().clone();
        if t.is(";") {
            self.advance();
            Ok(self.node(Kind::Skip, t.span, vec![]))
        } else if t.is("{") {
            self.advance();
            let mut stmts = Vec::new();
            while !self.at("}") {
                if self.peek().kind == TokenKind::Eof {
                    return self.error(&["statement", "`}`"]);
                }
                stmts.push(self.statement()?);
            }
            let close = self.advance().span;
            Ok(self.node(Kind::Compound, t.span.to(&close), stmts))
        } else if t.is("if") {
            self.advance();
            self.expect("(")?;
            let cond = self.term()?;
            self.expect(")")?;
            let then = self.statement()?;
            let otherwise = if self.eat("else").is_some() {
                self.statement()?
            } else {
                // A missing else branch is `skip`, placed at the end of the
                // then branch.
                let end = self.span_of(then);
                let at = (end.line_end, end.col_end);
                let span = SourceSpan::new(end.file.clone(), at, at);
                self.node(Kind::Skip, span, vec![])
            };
            let span = t.span.to(&self.span_of(otherwise));
            Ok(self.node(Kind::If, span, vec![cond, then, otherwise]))
        } else if t.is("while") {
            self.advance();
            self.expect("(")?;
            let cond = self.term()?;
            self.expect(")")?;
            let body = self.statement()?;
            let span = t.span.to(&self.span_of(body));
            Ok(self.node(Kind::While, span, vec![cond, body]))
        } else if t.kind == TokenKind::Identifier && self.peek_at(1).is("(") {
            self.advance();
            self.advance();
            let mut args = Vec::new();
            if !self.at(")") {
                args.push(self.term()?);
                while self.eat(",").is_some() {
                    args.push(self.term()?);
                }
            }
            self.expect(")")?;
            let end = self.expect(";")?.span;
            let kind = Kind::Call {
                callee: t.text,
                callee_span: t.span.clone(),
            };
            Ok(self.node(kind, t.span.to(&end), args))
        } else if t.kind == TokenKind::Identifier
            || t.kind == TokenKind::Numeral
            || t.is("(")
            || t.is("-")
        {
            let lhs = self.term()?;
            self.expect(":=")?;
            let rhs = self.term()?;
            let end = self.expect(";")?.span;
            let span = self.span_of(lhs).to(&end);
            Ok(self.node(Kind::Assign, span, vec![lhs, rhs]))
        } else {
            self.error(&["statement"])
        }
    }

    fn term(&mut self) -> PResult<NodeId> {
        let mut left = self.additive()?;
        while let Some(op) = self.comparison_op() {
            self.advance();
            let right = self.additive()?;
            let span = self.span_of(left).to(&self.span_of(right));
            left = self.node(Kind::Comparison { op }, span, vec![left, right]);
        }
        Ok(left)
    }

    fn comparison_op(&self) -> Option<CmpOp> {
        let t = self.peek();
        if t.kind != TokenKind::Operator {
            return None;
        }
        Some(match t.text.as_str() {
            "=" => CmpOp::Eq,
            "#" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    fn additive(&mut self) -> PResult<NodeId> {
        let mut left = self.multiplicative()?;
        loop {
            let op = if self.at("+") {
                BinOp::Add
            } else if self.at("-") {
                BinOp::Sub
            } else {
                return Ok(left);
            };
            self.advance();
            let right = self.multiplicative()?;
            let span = self.span_of(left).to(&self.span_of(right));
            left = self.node(Kind::Binary { op }, span, vec![left, right]);
        }
    }

    fn multiplicative(&mut self) -> PResult<NodeId> {
        let mut left = self.unary()?;
        loop {
            let op = if self.at("*") {
                BinOp::Mul
            } else if self.at("/") {
                BinOp::Div
            } else {
                return Ok(left);
            };
            self.advance();
            let right = self.unary()?;
            let span = self.span_of(left).to(&self.span_of(right));
            left = self.node(Kind::Binary { op }, span, vec![left, right]);
        }
    }

    fn unary(&mut self) -> PResult<NodeId> {
        if let Some(minus) = self.eat("-") {
            let operand = self.unary()?;
            let span = minus.span.to(&self.span_of(operand));
            return Ok(self.node(Kind::Negative, span, vec![operand]));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> PResult<NodeId> {
        let mut target = self.primary()?;
        while self.eat("[").is_some() {
            let index = self.term()?;
            let close = self.expect("]")?.span;
            let span = self.span_of(target).to(&close);
            target = self.node(Kind::ArrayAccess, span, vec![target, index]);
        }
        Ok(target)
    }

    fn primary(&mut self) -> PResult<NodeId> {
        let t = self.peek().clone();
        match t.kind {
            TokenKind::Identifier => {
                self.advance();
                Ok(self.node(Kind::Identifier { name: t.text }, t.span, vec![]))
            }
            TokenKind::Numeral => {
                self.advance();
                let value = t.text.parse().expect("lexer bounds numerals");
                Ok(self.node(Kind::IntegerLiteral { value }, t.span, vec![]))
            }
            _ if t.is("(") => {
                self.advance();
                let inner = self.term()?;
                self.expect(")")?;
                Ok(inner)
            }
            _ => self.error(&["identifier", "numeral", "`(`", "`-`"]),
        }
    }
}
