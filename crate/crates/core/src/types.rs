//! Type analysis: the synthesized `type` attribute on terms, synonym
//! resolution by rewriting, and the `typeErrors` collection.
//!
//! Each typing rule for terms is one `type` equation for its conclusion plus
//! one contribution per premise. A rule whose result depends on a premise
//! (array access) yields [`TypeRep::Bottom`] when the premise fails. Bottom
//! is equal to every type, so a fault is reported once and not again at
//! every enclosing term.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use crate::diagnostic::{Code, Diagnostic};
use crate::names::{lookup_name, NameAttrs};
use crate::rag::{Coll, ConfigError, Eval, EvalResult, Grammar, NodeId, Syn, Tree};
use crate::syntax::{Kind, Mode};

/// A type. Arrays are identified by the type expression node that wrote
/// them, so two textually equal array types are different types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeRep {
    Int,
    Bool,
    Array(NodeId),
    Bottom,
}

impl TypeRep {
    /// Referential equivalence; Bottom is equal to everything.
    pub fn is_equal_to(self, other: TypeRep) -> bool {
        self == other || self == TypeRep::Bottom || other == TypeRep::Bottom
    }

    /// SPL has no subtyping.
    pub fn is_subtype_of(self, other: TypeRep) -> bool {
        self.is_equal_to(other)
    }

    pub fn is_array(self) -> bool {
        matches!(self, TypeRep::Array(_))
    }
}

/// Cycle facts about the type synonyms of a program. A synonym whose
/// expression mentions, directly or through other synonyms, a synonym on a
/// cycle is never expanded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SynonymCycles {
    pub members: HashSet<NodeId>,
    pub reaches_cycle: HashSet<NodeId>,
}

#[derive(Clone, Copy, Debug)]
pub struct TypeAttrs {
    pub synonym_cycles: Syn<(), Rc<SynonymCycles>>,
    /// Type denoted by a (rewritten) type expression.
    pub resolved_type: Syn<(), TypeRep>,
    /// Type of a parameter or variable declaration.
    pub declared_type: Syn<(), TypeRep>,
    pub ty: Syn<(), TypeRep>,
    pub is_lvalue: Syn<(), bool>,
    pub type_errors: Coll<Diagnostic>,
}

pub fn install(g: &mut Grammar<Kind>, names: NameAttrs) -> Result<TypeAttrs, ConfigError> {
    let attrs = TypeAttrs {
        synonym_cycles: g.syn("synonymCycles"),
        resolved_type: g.syn("resolvedType"),
        declared_type: g.syn("declaredType"),
        ty: g.syn("type"),
        is_lvalue: g.syn("isLvalue"),
        type_errors: g.coll("typeErrors", "Program"),
    };
    let TypeAttrs {
        synonym_cycles,
        resolved_type,
        declared_type,
        ty,
        is_lvalue,
        type_errors,
    } = attrs;
    let lookup = names.lookup;
    let lookup_in_scope = names.lookup_in_scope;

    g.eq_syn(synonym_cycles, "Program", move |ev, program, _| {
        let synonyms: Vec<NodeId> = ev
            .children(program)?
            .into_iter()
            .filter(|&d| matches!(ev.data(d), Kind::TypeSynonymDecl { .. }))
            .collect();
        let mut edges = HashMap::new();
        for &s in &synonyms {
            let mut names = Vec::new();
            source_type_names(ev.tree(), ev.tree().children(s)[0], &mut names);
            let mut targets = Vec::new();
            for name in names {
                if let Some(d) = ev.syn(lookup_in_scope, program, name)? {
                    if matches!(ev.data(d.target), Kind::TypeSynonymDecl { .. }) {
                        targets.push(d.target);
                    }
                }
            }
            edges.insert(s, targets);
        }
        Ok(Rc::new(find_cycles(&synonyms, &edges)))
    })?;

    g.rewrite(
        "resolveSynonym",
        "NamedType",
        move |ev, n| {
            let Some(decl) = lookup_name(ev, lookup, n)? else {
                return Ok(false);
            };
            if !matches!(ev.data(decl.target), Kind::TypeSynonymDecl { .. }) {
                return Ok(false);
            }
            let root = ev.root();
            let cycles = ev.syn(synonym_cycles, root, ())?;
            Ok(!cycles.reaches_cycle.contains(&decl.target))
        },
        move |ev, n| {
            let decl = lookup_name(ev, lookup, n)?.expect("checked by condition");
            let expr = ev.child(decl.target, 0)?;
            Ok(ev.tree_mut().clone_subtree(expr))
        },
    );

    g.eq_syn(resolved_type, "IntType", |_, _, _| Ok(TypeRep::Int))?;
    g.eq_syn(resolved_type, "ArrayType", |ev, n, _| {
        Ok(TypeRep::Array(ev.tree().origin(n)))
    })?;
    // Only names that could not be expanded survive rewriting.
    g.eq_syn(resolved_type, "NamedType", |_, _, _| Ok(TypeRep::Bottom))?;

    for decl in ["Param", "VarDecl"] {
        g.eq_syn(declared_type, decl, move |ev, n, _| {
            let expr = ev.child(n, 0)?;
            ev.syn(resolved_type, expr, ())
        })?;
    }

    g.eq_syn(ty, "IntegerLiteral", |_, _, _| Ok(TypeRep::Int))?;
    g.eq_syn(ty, "Binary", |_, _, _| Ok(TypeRep::Int))?;
    g.eq_syn(ty, "Negative", |_, _, _| Ok(TypeRep::Int))?;
    g.eq_syn(ty, "Comparison", |_, _, _| Ok(TypeRep::Bool))?;
    g.eq_syn(ty, "Identifier", move |ev, n, _| {
        match lookup_name(ev, lookup, n)? {
            Some(d) if ev.data(d.target).is_variable() => ev.syn(declared_type, d.target, ()),
            _ => Ok(TypeRep::Bottom),
        }
    })?;
    g.eq_syn(ty, "ArrayAccess", move |ev, n, _| {
        let target = ev.child(n, 0)?;
        match ev.syn(ty, target, ())? {
            TypeRep::Array(origin) => element_type(ev, resolved_type, origin),
            _ => Ok(TypeRep::Bottom),
        }
    })?;

    // Unbound names count as assignable so that only the name error shows.
    g.eq_syn(is_lvalue, "Identifier", move |ev, n, _| {
        Ok(match lookup_name(ev, lookup, n)? {
            Some(d) => ev.data(d.target).is_variable(),
            None => true,
        })
    })?;
    g.eq_syn(is_lvalue, "ArrayAccess", move |ev, n, _| {
        let target = ev.child(n, 0)?;
        ev.syn(is_lvalue, target, ())
    })?;
    g.default_syn(is_lvalue, |_, _, _| Ok(false))?;

    let int_operands = move |ev: &mut Eval<'_, Kind>, n: NodeId| -> EvalResult<Vec<Diagnostic>> {
        let mut out = Vec::new();
        for operand in ev.children(n)? {
            if !ev.syn(ty, operand, ())?.is_equal_to(TypeRep::Int) {
                out.push(at(ev, Code::Type001, operand));
            }
        }
        Ok(out)
    };
    for variant in ["Binary", "Comparison", "Negative"] {
        g.contribute_each(type_errors, variant, int_operands);
    }

    g.contribute(
        type_errors,
        "ArrayAccess",
        move |ev, n| {
            let target = ev.child(n, 0)?;
            let t = ev.syn(ty, target, ())?;
            Ok(!t.is_array() && t != TypeRep::Bottom)
        },
        |ev, n| Ok(at(ev, Code::Type002, ev.tree().children(n)[0])),
    );
    g.contribute(
        type_errors,
        "ArrayAccess",
        move |ev, n| {
            let index = ev.child(n, 1)?;
            Ok(!ev.syn(ty, index, ())?.is_equal_to(TypeRep::Int))
        },
        |ev, n| Ok(at(ev, Code::Type003, ev.tree().children(n)[1])),
    );

    for stmt in ["If", "While"] {
        g.contribute(
            type_errors,
            stmt,
            move |ev, n| {
                let cond = ev.child(n, 0)?;
                Ok(!ev.syn(ty, cond, ())?.is_equal_to(TypeRep::Bool))
            },
            |ev, n| Ok(at(ev, Code::Type004, ev.tree().children(n)[0])),
        );
    }

    g.contribute(
        type_errors,
        "Assign",
        move |ev, n| {
            let lhs = ev.child(n, 0)?;
            Ok(!ev.syn(is_lvalue, lhs, ())?)
        },
        |ev, n| Ok(at(ev, Code::Type006, ev.tree().children(n)[0])),
    );
    g.contribute_each(type_errors, "Assign", move |ev, n| {
        let lhs = ev.child(n, 0)?;
        let rhs = ev.child(n, 1)?;
        let (l, r) = (ev.syn(ty, lhs, ())?, ev.syn(ty, rhs, ())?);
        if l.is_equal_to(r) {
            return Ok(vec![]);
        }
        let detail = format!(
            "`{}` := `{}`",
            render(ev, resolved_type, l)?,
            render(ev, resolved_type, r)?
        );
        Ok(vec![Diagnostic::with_detail(
            Code::Type005,
            ev.tree().span(n).clone(),
            detail,
        )])
    });

    g.contribute_each(type_errors, "Call", move |ev, n| {
        let Some(decl) = lookup_name(ev, lookup, n)? else {
            return Ok(vec![]);
        };
        let callee_span = match ev.data(n) {
            Kind::Call { callee_span, .. } => callee_span.clone(),
            _ => unreachable!(),
        };
        let Kind::ProcDecl { params, .. } = *ev.data(decl.target) else {
            return Ok(vec![Diagnostic::with_detail(
                Code::Type007,
                callee_span,
                format_args!("'{}'", decl.name),
            )]);
        };
        let args = ev.children(n)?;
        let mut out = Vec::new();
        if args.len() != params {
            out.push(Diagnostic::with_detail(
                Code::Type008,
                ev.tree().span(n).clone(),
                format_args!("expected {params}, found {}", args.len()),
            ));
        }
        for (i, &arg) in args.iter().enumerate().take(params) {
            let param = ev.child(decl.target, i)?;
            let expected = ev.syn(declared_type, param, ())?;
            let found = ev.syn(ty, arg, ())?;
            if !found.is_equal_to(expected) {
                let detail = format!(
                    "expected `{}`, found `{}`",
                    render(ev, resolved_type, expected)?,
                    render(ev, resolved_type, found)?
                );
                out.push(Diagnostic::with_detail(
                    Code::Type009,
                    ev.tree().span(arg).clone(),
                    detail,
                ));
            }
            let by_ref = matches!(
                ev.data(param),
                Kind::Param {
                    mode: Mode::Ref,
                    ..
                }
            );
            if by_ref && !ev.syn(is_lvalue, arg, ())? {
                out.push(at(ev, Code::Type010, arg));
            }
        }
        Ok(out)
    });

    g.contribute(
        type_errors,
        "NamedType",
        move |ev, n| {
            if ev.tree().is_copy(n) {
                return Ok(false);
            }
            Ok(lookup_name(ev, lookup, n)?
                .is_some_and(|d| !matches!(ev.data(d.target), Kind::TypeSynonymDecl { .. })))
        },
        |ev, n| {
            let name = crate::names::name_of(ev, n);
            Ok(Diagnostic::with_detail(
                Code::Type011,
                ev.tree().span(n).clone(),
                format_args!("'{name}'"),
            ))
        },
    );
    g.contribute(
        type_errors,
        "TypeSynonymDecl",
        move |ev, n| {
            let root = ev.root();
            Ok(ev.syn(synonym_cycles, root, ())?.members.contains(&n))
        },
        |ev, n| {
            let name = ev.data(n).declared_name().unwrap_or_default();
            Ok(Diagnostic::with_detail(
                Code::Type012,
                ev.tree().span(n).clone(),
                format_args!("'{name}'"),
            ))
        },
    );

    Ok(attrs)
}

fn at(ev: &Eval<'_, Kind>, code: Code, node: NodeId) -> Diagnostic {
    Diagnostic::new(code, ev.tree().span(node).clone())
}

/// Element type of the array type written at `origin`.
pub fn element_type(
    ev: &mut Eval<'_, Kind>,
    resolved_type: Syn<(), TypeRep>,
    origin: NodeId,
) -> EvalResult<TypeRep> {
    let base = ev.child(origin, 0)?;
    ev.syn(resolved_type, base, ())
}

/// Names of named types in a type expression as written in the source,
/// looking through rewrites already applied.
fn source_type_names(tree: &Tree<Kind>, node: NodeId, out: &mut Vec<String>) {
    let node = tree.original(node);
    match tree.data(node) {
        Kind::NamedType { name } => out.push(name.clone()),
        Kind::ArrayType { .. } => source_type_names(tree, tree.children(node)[0], out),
        _ => {}
    }
}

fn find_cycles(nodes: &[NodeId], edges: &HashMap<NodeId, Vec<NodeId>>) -> SynonymCycles {
    let reachable = |from: NodeId| {
        let mut seen = HashSet::new();
        let mut stack: Vec<NodeId> = edges[&from].clone();
        while let Some(n) = stack.pop() {
            if seen.insert(n) {
                stack.extend(&edges[&n]);
            }
        }
        seen
    };
    let reach: HashMap<NodeId, HashSet<NodeId>> =
        nodes.iter().map(|&n| (n, reachable(n))).collect();
    let members: HashSet<NodeId> = nodes
        .iter()
        .copied()
        .filter(|n| reach[n].contains(n))
        .collect();
    let reaches_cycle = nodes
        .iter()
        .copied()
        .filter(|n| members.contains(n) || reach[n].iter().any(|m| members.contains(m)))
        .collect();
    SynonymCycles {
        members,
        reaches_cycle,
    }
}

/// Source-like rendering of a type; Bottom renders as `<error>`.
pub fn render(
    ev: &mut Eval<'_, Kind>,
    resolved_type: Syn<(), TypeRep>,
    t: TypeRep,
) -> EvalResult<String> {
    Ok(match t {
        TypeRep::Int => "int".into(),
        TypeRep::Bool => "bool".into(),
        TypeRep::Bottom => "<error>".into(),
        TypeRep::Array(origin) => {
            let Kind::ArrayType { length } = *ev.data(origin) else {
                unreachable!("array origin is an array type")
            };
            let base = element_type(ev, resolved_type, origin)?;
            format!("array[{length}] of {}", render(ev, resolved_type, base)?)
        }
    })
}

impl fmt::Display for TypeRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRep::Int => f.write_str("int"),
            TypeRep::Bool => f.write_str("bool"),
            TypeRep::Array(origin) => write!(f, "array{origin:?}"),
            TypeRep::Bottom => f.write_str("<error>"),
        }
    }
}
