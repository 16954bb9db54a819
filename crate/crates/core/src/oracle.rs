//! Reference checker written the conventional way: explicit symbol tables
//! and one recursive pass with an environment. Shares nothing with the
//! attribute grammar except the syntax tree, and exists to cross-check it.
//!
//! Also provides literal `binders` and `fv` functions over declarations.

use std::collections::hash_map::Entry as MapEntry;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use crate::diagnostic::{Code, Diagnostic};
use crate::names::PREDEFINED;
use crate::rag::NodeId;
use crate::syntax::{Ast, Kind, Mode};

/// Multiset of names: name → multiplicity.
pub type Multiset = BTreeMap<String, usize>;

/// Binders of a sequence of declarations, kept as a multiset so repeated
/// names stay visible.
pub fn binders(tree: &Ast, decls: &[NodeId]) -> Multiset {
    let mut out = Multiset::new();
    for &d in decls {
        if let Some(name) = tree.data(d).declared_name() {
            *out.entry(name.to_string()).or_default() += 1;
        }
    }
    out
}

/// Free names of any construct. Only procedures and programs bind; every
/// other identifier occurrence is free.
pub fn fv(tree: &Ast, node: NodeId) -> BTreeSet<String> {
    fv_with_predefined(tree, node, &[])
}

/// Like [`fv`], with `predefined` names counted among the program's binders.
pub fn fv_with_predefined(tree: &Ast, node: NodeId, predefined: &[&str]) -> BTreeSet<String> {
    let children = tree.children(node);
    match tree.data(node) {
        Kind::Program => {
            let mut bound: BTreeSet<String> = binders(tree, children).into_keys().collect();
            bound.extend(predefined.iter().map(|s| s.to_string()));
            fv_seq(tree, children).difference(&bound).cloned().collect()
        }
        Kind::ProcDecl { params, vars, .. } => {
            let (params, rest) = children.split_at(*params);
            let (vars, body) = rest.split_at(*vars);
            let local: BTreeSet<String> = binders(tree, params)
                .into_keys()
                .chain(binders(tree, vars).into_keys())
                .collect();
            let mut out = fv_seq(tree, params);
            out.extend(fv_seq(tree, vars));
            out.extend(fv(tree, body[0]).difference(&local).cloned());
            out
        }
        Kind::Identifier { name } | Kind::NamedType { name } => BTreeSet::from([name.clone()]),
        Kind::Call { callee, .. } => {
            let mut out = fv_seq(tree, children);
            out.insert(callee.clone());
            out
        }
        _ => fv_seq(tree, children),
    }
}

fn fv_seq(tree: &Ast, nodes: &[NodeId]) -> BTreeSet<String> {
    nodes.iter().flat_map(|&n| fv(tree, n)).collect()
}

/// What a name use resolves to.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Binding {
    Unbound,
    Predefined(String),
    Decl(NodeId),
}

#[derive(Clone, Debug)]
enum Entry {
    Predefined { name: &'static str, mode: Mode },
    Synonym(NodeId),
    Proc(NodeId),
    Var(NodeId),
}

impl Entry {
    fn binding(&self) -> Binding {
        match self {
            Entry::Predefined { name, .. } => Binding::Predefined(name.to_string()),
            Entry::Synonym(n) | Entry::Proc(n) | Entry::Var(n) => Binding::Decl(*n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
    Array(NodeId),
    Bottom,
}

fn same(a: Ty, b: Ty) -> bool {
    a == Ty::Bottom || b == Ty::Bottom || a == b
}

/// Two-level symbol table. Insertions never overwrite; a repeated name is
/// reported and the first declaration stays in effect.
#[derive(Default)]
struct Env {
    global: HashMap<String, Entry>,
    local: HashMap<String, Entry>,
    in_procedure: bool,
}

impl Env {
    fn find(&self, name: &str) -> Option<&Entry> {
        if self.in_procedure {
            if let Some(e) = self.local.get(name) {
                return Some(e);
            }
        }
        self.global.get(name)
    }
}

struct Checker<'t> {
    tree: &'t Ast,
    env: Env,
    /// Synonyms that lie on a cycle, and those that lead into one.
    cyclic: HashSet<NodeId>,
    blocked: HashSet<NodeId>,
    diags: Vec<Diagnostic>,
    bindings: HashMap<NodeId, Binding>,
}

/// All diagnostics for a program, unsorted.
pub fn check(tree: &Ast) -> Vec<Diagnostic> {
    let mut c = Checker::new(tree);
    c.run();
    c.diags
}

/// Binding of every identifier, named type and call in the program.
pub fn resolve_names(tree: &Ast) -> HashMap<NodeId, Binding> {
    let mut c = Checker::new(tree);
    c.run();
    c.bindings
}

impl<'t> Checker<'t> {
    fn new(tree: &'t Ast) -> Self {
        Checker {
            tree,
            env: Env::default(),
            cyclic: HashSet::new(),
            blocked: HashSet::new(),
            diags: Vec::new(),
            bindings: HashMap::new(),
        }
    }

    fn report(&mut self, code: Code, node: NodeId) {
        self.diags
            .push(Diagnostic::new(code, self.tree.span(node).clone()));
    }

    fn run(&mut self) {
        let tree = self.tree;
        let decls = tree.children(tree.root()).to_vec();
        for (name, mode) in PREDEFINED {
            self.env
                .global
                .insert(name.to_string(), Entry::Predefined { name, mode });
        }
        for &d in &decls {
            let (name, entry) = match tree.data(d) {
                Kind::TypeSynonymDecl { name } => (name, Entry::Synonym(d)),
                Kind::ProcDecl { name, .. } => (name, Entry::Proc(d)),
                _ => unreachable!(),
            };
            if self.env.global.contains_key(name) {
                self.report(Code::Name002, d);
            } else {
                self.env.global.insert(name.clone(), entry);
            }
        }
        self.find_synonym_cycles(&decls);
        for &d in &decls {
            match tree.data(d) {
                Kind::TypeSynonymDecl { .. } => {
                    if self.cyclic.contains(&d) {
                        self.report(Code::Type012, d);
                    }
                    self.type_names(tree.children(d)[0]);
                }
                Kind::ProcDecl { .. } => self.procedure(d),
                _ => unreachable!(),
            }
        }
    }

    /// Tarjan's strongest-components over synonym → synonym references.
    fn find_synonym_cycles(&mut self, decls: &[NodeId]) {
        let tree = self.tree;
        let synonyms: Vec<NodeId> = decls
            .iter()
            .copied()
            .filter(|&d| matches!(tree.data(d), Kind::TypeSynonymDecl { .. }))
            .collect();
        let mut succ: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for &s in &synonyms {
            let mut names = Vec::new();
            collect_type_names(tree, tree.children(s)[0], &mut names);
            let targets = names
                .iter()
                .filter_map(|n| match self.env.global.get(n) {
                    Some(Entry::Synonym(t)) => Some(*t),
                    _ => None,
                })
                .collect();
            succ.insert(s, targets);
        }

        struct Tarjan<'a> {
            succ: &'a HashMap<NodeId, Vec<NodeId>>,
            index: HashMap<NodeId, usize>,
            low: HashMap<NodeId, usize>,
            stack: Vec<NodeId>,
            on_stack: HashSet<NodeId>,
            next: usize,
            components: Vec<Vec<NodeId>>,
        }
        impl Tarjan<'_> {
            fn visit(&mut self, v: NodeId) {
                self.index.insert(v, self.next);
                self.low.insert(v, self.next);
                self.next += 1;
                self.stack.push(v);
                self.on_stack.insert(v);
                for &w in &self.succ[&v] {
                    if !self.index.contains_key(&w) {
                        self.visit(w);
                        let lw = self.low[&w];
                        let lv = self.low.get_mut(&v).unwrap();
                        *lv = (*lv).min(lw);
                    } else if self.on_stack.contains(&w) {
                        let iw = self.index[&w];
                        let lv = self.low.get_mut(&v).unwrap();
                        *lv = (*lv).min(iw);
                    }
                }
                if self.low[&v] == self.index[&v] {
                    let mut comp = Vec::new();
                    loop {
                        let w = self.stack.pop().unwrap();
                        self.on_stack.remove(&w);
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    self.components.push(comp);
                }
            }
        }
        let mut t = Tarjan {
            succ: &succ,
            index: HashMap::new(),
            low: HashMap::new(),
            stack: Vec::new(),
            on_stack: HashSet::new(),
            next: 0,
            components: Vec::new(),
        };
        for &s in &synonyms {
            if !t.index.contains_key(&s) {
                t.visit(s);
            }
        }
        for comp in &t.components {
            if comp.len() > 1 || succ[&comp[0]].contains(&comp[0]) {
                self.cyclic.extend(comp);
            }
        }
        // Components come out in reverse topological order, so successors
        // are settled before the synonyms that mention them.
        for comp in &t.components {
            let leads_into_cycle = comp.iter().any(|v| {
                self.cyclic.contains(v) || succ[v].iter().any(|w| self.blocked.contains(w))
            });
            if leads_into_cycle {
                self.blocked.extend(comp);
            }
        }
    }

    /// Reports unknown and non-type names in a type expression as written.
    fn type_names(&mut self, node: NodeId) {
        let tree = self.tree;
        match tree.data(node) {
            Kind::NamedType { name } => {
                let found = self.env.global.get(name).cloned();
                self.bindings.insert(
                    node,
                    found.as_ref().map_or(Binding::Unbound, Entry::binding),
                );
                match found {
                    None => self.report(Code::Name001, node),
                    Some(Entry::Synonym(_)) => {}
                    Some(_) => self.report(Code::Type011, node),
                }
            }
            Kind::ArrayType { .. } => self.type_names(tree.children(node)[0]),
            _ => {}
        }
    }

    /// Type denoted by a type expression; names are global.
    fn denote(&self, node: NodeId) -> Ty {
        let tree = self.tree;
        match tree.data(node) {
            Kind::IntType => Ty::Int,
            Kind::ArrayType { .. } => Ty::Array(node),
            Kind::NamedType { name } => match self.env.global.get(name) {
                Some(Entry::Synonym(d)) if !self.blocked.contains(d) => {
                    self.denote(tree.children(*d)[0])
                }
                _ => Ty::Bottom,
            },
            _ => unreachable!(),
        }
    }

    fn element(&self, array: NodeId) -> Ty {
        self.denote(self.tree.children(array)[0])
    }

    fn procedure(&mut self, proc_: NodeId) {
        let tree = self.tree;
        let Kind::ProcDecl { params, vars, .. } = *tree.data(proc_) else {
            unreachable!()
        };
        let children = tree.children(proc_);
        self.env.local.clear();
        for &d in &children[..params + vars] {
            self.type_names(tree.children(d)[0]);
            let name = tree.data(d).declared_name().unwrap().to_string();
            match self.env.local.entry(name) {
                MapEntry::Occupied(_) => self.report(Code::Name002, d),
                MapEntry::Vacant(v) => {
                    v.insert(Entry::Var(d));
                }
            }
        }
        self.env.in_procedure = true;
        self.statement(children[params + vars]);
        self.env.in_procedure = false;
    }

    fn statement(&mut self, node: NodeId) {
        let tree = self.tree;
        let c = tree.children(node);
        match tree.data(node) {
            Kind::Skip => {}
            Kind::Compound => c.iter().for_each(|&s| self.statement(s)),
            Kind::If | Kind::While => {
                if !same(self.term(c[0]), Ty::Bool) {
                    self.report(Code::Type004, c[0]);
                }
                c[1..].iter().for_each(|&s| self.statement(s));
            }
            Kind::Assign => {
                let lhs = self.term(c[0]);
                let rhs = self.term(c[1]);
                if !self.assignable(c[0]) {
                    self.report(Code::Type006, c[0]);
                }
                if !same(lhs, rhs) {
                    self.report(Code::Type005, node);
                }
            }
            Kind::Call {
                callee,
                callee_span,
            } => {
                let arg_types: Vec<Ty> = c.iter().map(|&a| self.term(a)).collect();
                let found = self.env.find(callee).cloned();
                self.bindings.insert(
                    node,
                    found.as_ref().map_or(Binding::Unbound, Entry::binding),
                );
                let signature: Vec<(Mode, Ty)> = match found {
                    None => {
                        self.diags
                            .push(Diagnostic::new(Code::Name001, callee_span.clone()));
                        return;
                    }
                    Some(Entry::Predefined { mode, .. }) => vec![(mode, Ty::Int)],
                    Some(Entry::Proc(p)) => {
                        let Kind::ProcDecl { params, .. } = *tree.data(p) else {
                            unreachable!()
                        };
                        tree.children(p)[..params]
                            .iter()
                            .map(|&q| match tree.data(q) {
                                Kind::Param { mode, .. } => {
                                    (*mode, self.denote(tree.children(q)[0]))
                                }
                                _ => unreachable!(),
                            })
                            .collect()
                    }
                    Some(_) => {
                        self.diags
                            .push(Diagnostic::new(Code::Type007, callee_span.clone()));
                        return;
                    }
                };
                if signature.len() != c.len() {
                    self.report(Code::Type008, node);
                }
                for ((&arg, &t), &(mode, expected)) in c.iter().zip(&arg_types).zip(&signature) {
                    if !same(t, expected) {
                        self.report(Code::Type009, arg);
                    }
                    if mode == Mode::Ref && !self.assignable(arg) {
                        self.report(Code::Type010, arg);
                    }
                }
            }
            other => unreachable!("not a statement: {other:?}"),
        }
    }

    fn assignable(&self, term: NodeId) -> bool {
        let tree = self.tree;
        match tree.data(term) {
            Kind::Identifier { name } => match self.env.find(name) {
                None | Some(Entry::Var(_)) => true,
                Some(_) => false,
            },
            Kind::ArrayAccess => self.assignable(tree.children(term)[0]),
            _ => false,
        }
    }

    fn term(&mut self, node: NodeId) -> Ty {
        let tree = self.tree;
        let c = tree.children(node);
        match tree.data(node) {
            Kind::IntegerLiteral { .. } => Ty::Int,
            Kind::Identifier { name } => {
                let found = self.env.find(name).cloned();
                self.bindings.insert(
                    node,
                    found.as_ref().map_or(Binding::Unbound, Entry::binding),
                );
                match found {
                    None => {
                        self.report(Code::Name001, node);
                        Ty::Bottom
                    }
                    Some(Entry::Var(d)) => self.denote(tree.children(d)[0]),
                    Some(_) => Ty::Bottom,
                }
            }
            Kind::Binary { .. } | Kind::Comparison { .. } | Kind::Negative => {
                for &operand in c {
                    if !same(self.term(operand), Ty::Int) {
                        self.report(Code::Type001, operand);
                    }
                }
                if matches!(tree.data(node), Kind::Comparison { .. }) {
                    Ty::Bool
                } else {
                    Ty::Int
                }
            }
            Kind::ArrayAccess => {
                let target = self.term(c[0]);
                let index = self.term(c[1]);
                if !matches!(target, Ty::Array(_) | Ty::Bottom) {
                    self.report(Code::Type002, c[0]);
                }
                if !same(index, Ty::Int) {
                    self.report(Code::Type003, c[1]);
                }
                match target {
                    Ty::Array(a) => self.element(a),
                    _ => Ty::Bottom,
                }
            }
            other => unreachable!("not a term: {other:?}"),
        }
    }
}

fn collect_type_names(tree: &Ast, node: NodeId, out: &mut Vec<String>) {
    match tree.data(node) {
        Kind::NamedType { name } => out.push(name.clone()),
        Kind::ArrayType { .. } => collect_type_names(tree, tree.children(node)[0], out),
        _ => {}
    }
}
