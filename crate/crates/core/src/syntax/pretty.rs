//! Source rendering of a tree. Re-parsing the output yields the same tree
//! up to spans.

use super::ast::{Ast, BinOp, Kind};
use crate::rag::NodeId;

pub fn pretty(tree: &Ast) -> String {
    let mut out = String::new();
    for (i, &decl) in tree.children(tree.root()).iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        declaration(tree, decl, &mut out);
    }
    out
}

fn declaration(tree: &Ast, node: NodeId, out: &mut String) {
    let children = tree.children(node);
    match tree.data(node) {
        Kind::TypeSynonymDecl { name } => {
            out.push_str(&format!(
                "type {name} = {};\n",
                type_expr(tree, children[0])
            ));
        }
        Kind::ProcDecl { name, params, vars } => {
            let ps: Vec<String> = children[..*params]
                .iter()
                .map(|&p| match tree.data(p) {
                    Kind::Param { mode, name } => {
                        format!("{mode} {name}: {}", type_expr(tree, tree.children(p)[0]))
                    }
                    other => unreachable!("parameter slot holds {other:?}"),
                })
                .collect();
            out.push_str(&format!("proc {name}({}) {{\n", ps.join(", ")));
            for &v in &children[*params..params + vars] {
                if let Kind::VarDecl { name } = tree.data(v) {
                    out.push_str(&format!(
                        "  var {name}: {};\n",
                        type_expr(tree, tree.children(v)[0])
                    ));
                }
            }
            let body = children[params + vars];
            for &s in tree.children(body) {
                statement(tree, s, 1, out);
            }
            out.push_str("}\n");
        }
        other => unreachable!("declaration slot holds {other:?}"),
    }
}

pub fn type_expr(tree: &Ast, node: NodeId) -> String {
    match tree.data(node) {
        Kind::NamedType { name } => name.clone(),
        Kind::IntType => "int".into(),
        Kind::ArrayType { length } => {
            format!(
                "array[{length}] of {}",
                type_expr(tree, tree.children(node)[0])
            )
        }
        other => unreachable!("type slot holds {other:?}"),
    }
}

fn statement(tree: &Ast, node: NodeId, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    let c = tree.children(node);
    match tree.data(node) {
        Kind::Skip => out.push_str(&format!("{pad};\n")),
        Kind::Assign => out.push_str(&format!(
            "{pad}{} := {};\n",
            term(tree, c[0]),
            term(tree, c[1])
        )),
        Kind::Call { callee, .. } => {
            let args: Vec<String> = c.iter().map(|&a| term(tree, a)).collect();
            out.push_str(&format!("{pad}{callee}({});\n", args.join(", ")));
        }
        Kind::Compound => {
            out.push_str(&format!("{pad}{{\n"));
            for &s in c {
                statement(tree, s, depth + 1, out);
            }
            out.push_str(&format!("{pad}}}\n"));
        }
        Kind::If => {
            out.push_str(&format!("{pad}if ({})\n", term(tree, c[0])));
            statement(tree, c[1], depth + 1, out);
            out.push_str(&format!("{pad}else\n"));
            statement(tree, c[2], depth + 1, out);
        }
        Kind::While => {
            out.push_str(&format!("{pad}while ({})\n", term(tree, c[0])));
            statement(tree, c[1], depth + 1, out);
        }
        other => unreachable!("statement slot holds {other:?}"),
    }
}

/// Binding strength; higher binds tighter.
fn precedence(kind: &Kind) -> u8 {
    match kind {
        Kind::Comparison { .. } => 1,
        Kind::Binary {
            op: BinOp::Add | BinOp::Sub,
        } => 2,
        Kind::Binary { .. } => 3,
        Kind::Negative => 4,
        _ => 5,
    }
}

pub fn term(tree: &Ast, node: NodeId) -> String {
    let c = tree.children(node);
    let kind = tree.data(node);
    let prec = precedence(kind);
    // Operands bind at least as tight as the operator; right operands of
    // left-associative operators strictly tighter.
    let operand = |child: NodeId, min: u8| {
        let text = term(tree, child);
        if precedence(tree.data(child)) < min {
            format!("({text})")
        } else {
            text
        }
    };
    match kind {
        Kind::Identifier { name } => name.clone(),
        Kind::IntegerLiteral { value } => value.to_string(),
        Kind::ArrayAccess => format!("{}[{}]", operand(c[0], 5), term(tree, c[1])),
        Kind::Negative => format!("-{}", operand(c[0], 4)),
        Kind::Binary { op } => format!(
            "{} {} {}",
            operand(c[0], prec),
            op.symbol(),
            operand(c[1], prec + 1)
        ),
        Kind::Comparison { op } => format!(
            "{} {} {}",
            operand(c[0], prec),
            op.symbol(),
            operand(c[1], prec + 1)
        ),
        other => unreachable!("term slot holds {other:?}"),
    }
}
