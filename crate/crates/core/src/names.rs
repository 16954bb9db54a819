//! Name analysis: a `lookup` attribute from uses to declaration nodes, plus
//! the `nameErrors` collection.
//!
//! Programs and procedures are the two scopes. Each scope lists its
//! declarations, searches them with `lookup_in_scope`, and hands its
//! children a `lookup` equation that tries the scope first and otherwise
//! defers to its own context. Everything below those children receives the
//! value by broadcasting. Names in the types of parameters and variables
//! are never captured by the procedure's locals; their `lookup` goes
//! straight to the program.

use std::collections::HashSet;
use std::fmt;
use std::rc::Rc;

use crate::diagnostic::{Code, Diagnostic};
use crate::rag::{Coll, ConfigError, Eval, EvalResult, Grammar, Inh, NodeId, Syn};
use crate::span::SourceSpan;
use crate::syntax::{Kind, Mode};

/// Reference to a declaration node. Equality is node identity.
#[derive(Clone)]
pub struct DeclRef {
    pub target: NodeId,
    pub name: Rc<str>,
}

impl PartialEq for DeclRef {
    fn eq(&self, other: &Self) -> bool {
        self.target == other.target
    }
}

impl Eq for DeclRef {}

impl fmt::Debug for DeclRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.name, self.target)
    }
}

pub type LookupResult = Option<DeclRef>;

/// Procedures every program can call without declaring them.
pub const PREDEFINED: [(&str, Mode); 2] = [("printi", Mode::Val), ("readi", Mode::Ref)];

#[derive(Clone, Copy, Debug)]
pub struct NameAttrs {
    /// Non-terminal attribute on `Program`: the predefined procedures.
    pub predefined: Syn<(), Rc<Vec<NodeId>>>,
    /// Declarations of a scope (`Program` or `ProcDecl`), duplicates kept.
    pub declarations: Syn<(), Rc<Vec<DeclRef>>>,
    /// First declaration of a name in one scope only.
    pub lookup_in_scope: Syn<String, LookupResult>,
    pub lookup: Inh<String, LookupResult>,
    pub name_errors: Coll<Diagnostic>,
}

pub fn install(g: &mut Grammar<Kind>) -> Result<NameAttrs, ConfigError> {
    let attrs = NameAttrs {
        predefined: g.syn("predefined"),
        declarations: g.syn("declarations"),
        lookup_in_scope: g.syn("lookupInScope"),
        lookup: g.inh("lookup"),
        name_errors: g.coll("nameErrors", "Program"),
    };
    let NameAttrs {
        predefined,
        declarations,
        lookup_in_scope,
        lookup,
        name_errors,
    } = attrs;

    g.eq_syn(predefined, "Program", |ev, program, _| {
        let decls = PREDEFINED
            .iter()
            .map(|&(name, mode)| {
                let ids = build_predefined(ev, name, mode);
                ev.tree_mut().attach(program, ids, "predefined");
                ids
            })
            .collect();
        Ok(Rc::new(decls))
    })?;

    g.eq_syn(declarations, "Program", move |ev, program, _| {
        let mut nodes = ev.syn(predefined, program, ())?.as_ref().clone();
        nodes.extend(ev.children(program)?);
        Ok(Rc::new(decl_refs(ev, &nodes)))
    })?;
    g.eq_syn(declarations, "ProcDecl", |ev, proc_, _| {
        let Kind::ProcDecl { params, vars, .. } = *ev.data(proc_) else {
            unreachable!()
        };
        let nodes = (0..params + vars)
            .map(|i| ev.child(proc_, i))
            .collect::<EvalResult<Vec<_>>>()?;
        Ok(Rc::new(decl_refs(ev, &nodes)))
    })?;

    // lookupGlobal on programs and lookupLocal on procedures share one body.
    for scope in ["Program", "ProcDecl"] {
        g.eq_syn(lookup_in_scope, scope, move |ev, node, name| {
            let decls = ev.syn(declarations, node, ())?;
            Ok(decls.iter().find(|d| *d.name == **name).cloned())
        })?;
    }

    for role in ["parameter", "variable", "body"] {
        g.eq_inh(
            lookup,
            "ProcDecl",
            Some(role),
            move |ev, proc_, _, name| match ev.syn(lookup_in_scope, proc_, name.clone())? {
                Some(local) => Ok(Some(local)),
                None => ev.inh(lookup, proc_, name.clone()),
            },
        )?;
    }
    for role in ["declaration", "predefined"] {
        g.eq_inh(
            lookup,
            "Program",
            Some(role),
            move |ev, program, _, name| ev.syn(lookup_in_scope, program, name.clone()),
        )?;
    }
    // Type names are global even inside a procedure's parameter list.
    for decl in ["Param", "VarDecl"] {
        g.eq_inh(lookup, decl, Some("type"), move |ev, _, _, name| {
            let root = ev.root();
            ev.syn(lookup_in_scope, root, name.clone())
        })?;
    }

    g.contribute(
        name_errors,
        "Identifier",
        move |ev, n| Ok(lookup_name(ev, lookup, n)?.is_none()),
        |ev, n| Ok(undefined(ev.tree().span(n).clone(), name_of(ev, n))),
    );
    g.contribute(
        name_errors,
        "NamedType",
        move |ev, n| Ok(!ev.tree().is_copy(n) && lookup_name(ev, lookup, n)?.is_none()),
        |ev, n| Ok(undefined(ev.tree().span(n).clone(), name_of(ev, n))),
    );
    g.contribute(
        name_errors,
        "Call",
        move |ev, n| Ok(lookup_name(ev, lookup, n)?.is_none()),
        |ev, n| match ev.data(n) {
            Kind::Call {
                callee,
                callee_span,
            } => Ok(undefined(callee_span.clone(), callee)),
            _ => unreachable!(),
        },
    );
    for scope in ["Program", "ProcDecl"] {
        g.contribute_each(name_errors, scope, move |ev, n| {
            let decls = ev.syn(declarations, n, ())?;
            let mut seen = HashSet::new();
            Ok(decls
                .iter()
                .filter(|d| !seen.insert(d.name.clone()))
                .map(|d| {
                    Diagnostic::with_detail(
                        Code::Name002,
                        ev.tree().span(d.target).clone(),
                        format_args!("'{}'", d.name),
                    )
                })
                .collect())
        });
    }

    Ok(attrs)
}

fn build_predefined(ev: &mut Eval<'_, Kind>, name: &str, mode: Mode) -> NodeId {
    let span = SourceSpan::builtin();
    let tree = ev.tree_mut();
    let int = tree.add(Kind::IntType, span.clone(), vec![]);
    let param = tree.add(
        Kind::Param {
            mode,
            name: "i".into(),
        },
        span.clone(),
        vec![int],
    );
    let body = tree.add(Kind::Compound, span.clone(), vec![]);
    tree.add(
        Kind::ProcDecl {
            name: name.into(),
            params: 1,
            vars: 0,
        },
        span,
        vec![param, body],
    )
}

fn decl_refs(ev: &Eval<'_, Kind>, nodes: &[NodeId]) -> Vec<DeclRef> {
    nodes
        .iter()
        .map(|&target| DeclRef {
            target,
            name: Rc::from(ev.data(target).declared_name().expect("declaration node")),
        })
        .collect()
}

/// The name a use node refers to: identifiers, named types, call callees.
pub fn name_of<'a>(ev: &'a Eval<'_, Kind>, node: NodeId) -> &'a str {
    match ev.data(node) {
        Kind::Identifier { name } | Kind::NamedType { name } => name,
        Kind::Call { callee, .. } => callee,
        other => panic!("{other:?} does not use a name"),
    }
}

/// `lookup(name)` at a use node, for the name it uses.
pub fn lookup_name(
    ev: &mut Eval<'_, Kind>,
    lookup: Inh<String, LookupResult>,
    node: NodeId,
) -> EvalResult<LookupResult> {
    let name = name_of(ev, node).to_string();
    ev.inh(lookup, node, name)
}

fn undefined(span: SourceSpan, name: &str) -> Diagnostic {
    Diagnostic::with_detail(Code::Name001, span, format_args!("'{name}'"))
}
