//! Abstract syntax of SPL, stored as [`Kind`] payloads in a [`Tree`].
//!
//! Child layout per variant:
//!
//! | variant           | children                                  |
//! |-------------------|-------------------------------------------|
//! | `Program`         | declarations                              |
//! | `TypeSynonymDecl` | type expression                           |
//! | `ProcDecl`        | parameters, then variables, then the body |
//! | `Param`, `VarDecl`| type expression                           |
//! | `ArrayType`       | base type                                 |
//! | `Assign`          | lhs, rhs                                  |
//! | `Call`            | arguments                                 |
//! | `Compound`        | statements                                |
//! | `If`              | condition, then, else                     |
//! | `While`           | condition, body                           |
//! | `ArrayAccess`     | target, index                             |
//! | `Binary`, `Comparison` | left, right                          |
//! | `Negative`        | operand                                   |

use std::fmt;

use crate::rag::{NodeData, NodeId, Tree};
use crate::span::SourceSpan;

pub type Ast = Tree<Kind>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Ref,
    Val,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ref => "ref",
            Mode::Val => "val",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "#",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Kind {
    Program,
    TypeSynonymDecl {
        name: String,
    },
    ProcDecl {
        name: String,
        params: usize,
        vars: usize,
    },
    Param {
        mode: Mode,
        name: String,
    },
    VarDecl {
        name: String,
    },
    NamedType {
        name: String,
    },
    IntType,
    ArrayType {
        length: u32,
    },
    Assign,
    Call {
        callee: String,
        callee_span: SourceSpan,
    },
    Compound,
    If,
    While,
    Skip,
    Identifier {
        name: String,
    },
    ArrayAccess,
    IntegerLiteral {
        value: u32,
    },
    Binary {
        op: BinOp,
    },
    Comparison {
        op: CmpOp,
    },
    Negative,
}

impl NodeData for Kind {
    fn variant(&self) -> &'static str {
        match self {
            Kind::Program => "Program",
            Kind::TypeSynonymDecl { .. } => "TypeSynonymDecl",
            Kind::ProcDecl { .. } => "ProcDecl",
            Kind::Param { .. } => "Param",
            Kind::VarDecl { .. } => "VarDecl",
            Kind::NamedType { .. } => "NamedType",
            Kind::IntType => "IntType",
            Kind::ArrayType { .. } => "ArrayType",
            Kind::Assign => "Assign",
            Kind::Call { .. } => "Call",
            Kind::Compound => "Compound",
            Kind::If => "If",
            Kind::While => "While",
            Kind::Skip => "Skip",
            Kind::Identifier { .. } => "Identifier",
            Kind::ArrayAccess => "ArrayAccess",
            Kind::IntegerLiteral { .. } => "IntegerLiteral",
            Kind::Binary { .. } => "Binary",
            Kind::Comparison { .. } => "Comparison",
            Kind::Negative => "Negative",
        }
    }

    fn child_role(&self, index: usize) -> &'static str {
        match self {
            Kind::Program => "declaration",
            Kind::ProcDecl { params, vars, .. } => {
                if index < *params {
                    "parameter"
                } else if index < params + vars {
                    "variable"
                } else {
                    "body"
                }
            }
            Kind::TypeSynonymDecl { .. } | Kind::Param { .. } | Kind::VarDecl { .. } => "type",
            Kind::ArrayType { .. } => "base",
            Kind::Assign => ["lhs", "rhs"][index],
            Kind::Call { .. } => "argument",
            Kind::Compound => "statement",
            Kind::If => ["condition", "then", "else"][index],
            Kind::While => ["condition", "body"][index],
            Kind::ArrayAccess => ["target", "index"][index],
            Kind::Binary { .. } | Kind::Comparison { .. } => ["left", "right"][index],
            Kind::Negative => "operand",
            _ => "child",
        }
    }
}

impl Kind {
    /// Name bound by a declaration node.
    pub fn declared_name(&self) -> Option<&str> {
        match self {
            Kind::TypeSynonymDecl { name }
            | Kind::ProcDecl { name, .. }
            | Kind::Param { name, .. }
            | Kind::VarDecl { name } => Some(name),
            _ => None,
        }
    }

    pub fn is_term(&self) -> bool {
        matches!(
            self,
            Kind::Identifier { .. }
                | Kind::ArrayAccess
                | Kind::IntegerLiteral { .. }
                | Kind::Binary { .. }
                | Kind::Comparison { .. }
                | Kind::Negative
        )
    }

    pub fn is_type_expr(&self) -> bool {
        matches!(
            self,
            Kind::NamedType { .. } | Kind::IntType | Kind::ArrayType { .. }
        )
    }

    /// Variables and parameters: the declarations a term can denote.
    pub fn is_variable(&self) -> bool {
        matches!(self, Kind::Param { .. } | Kind::VarDecl { .. })
    }

    /// Fields shown after the variant name in AST dumps.
    pub fn fields(&self) -> String {
        match self {
            Kind::TypeSynonymDecl { name }
            | Kind::VarDecl { name }
            | Kind::NamedType { name }
            | Kind::Identifier { name } => format!("name={name}"),
            Kind::ProcDecl { name, .. } => format!("name={name}"),
            Kind::Param { mode, name } => format!("mode={mode} name={name}"),
            Kind::ArrayType { length } => format!("length={length}"),
            Kind::Call { callee, .. } => format!("callee={callee}"),
            Kind::IntegerLiteral { value } => format!("value={value}"),
            Kind::Binary { op } => format!("op={}", op.symbol()),
            Kind::Comparison { op } => format!("op={}", op.symbol()),
            _ => String::new(),
        }
    }
}

/// Indented one-node-per-line rendering: `Kind [l:c-l:c] field=value`.
pub fn dump(tree: &Ast) -> String {
    render(tree, true)
}

/// Like [`dump`] but without spans, for structural comparison.
pub fn dump_structure(tree: &Ast) -> String {
    render(tree, false)
}

fn render(tree: &Ast, spans: bool) -> String {
    let mut out = String::new();
    let mut stack = vec![(tree.root(), 0usize)];
    while let Some((node, depth)) = stack.pop() {
        let data = tree.data(node);
        out.push_str(&"  ".repeat(depth));
        out.push_str(data.variant());
        if spans {
            out.push_str(&format!(" [{}]", tree.span(node)));
        }
        let fields = data.fields();
        if !fields.is_empty() {
            out.push(' ');
            out.push_str(&fields);
        }
        out.push('\n');
        for &c in tree.children(node).iter().rev() {
            stack.push((c, depth + 1));
        }
    }
    out
}

/// The declarations directly below a `Program`.
pub fn declarations(tree: &Ast) -> &[NodeId] {
    tree.children(tree.root())
}
