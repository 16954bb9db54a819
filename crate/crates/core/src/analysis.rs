//! Wiring of the SPL attribute grammar and the check pipeline.

use thiserror::Error;

use crate::diagnostic::{sort_diagnostics, Diagnostic};
use crate::names::{self, LookupResult, NameAttrs};
use crate::rag::{
    ConfigError, Eval, EvalError, EvalResult, Grammar, NodeId, Stats, DEFAULT_REWRITE_BOUND,
};
use crate::syntax::{self, Ast, FrontendError, Kind};
use crate::types::{self, TypeAttrs, TypeRep};

/// The complete SPL grammar: name analysis plus type analysis.
pub struct SplGrammar {
    pub grammar: Grammar<Kind>,
    pub names: NameAttrs,
    pub types: TypeAttrs,
}

impl SplGrammar {
    pub fn new() -> Self {
        Self::build().expect("SPL equations are consistent")
    }

    fn build() -> Result<Self, ConfigError> {
        let mut grammar = Grammar::new();
        let names = names::install(&mut grammar)?;
        let types = types::install(&mut grammar, names)?;
        Ok(SplGrammar {
            grammar,
            names,
            types,
        })
    }
}

impl Default for SplGrammar {
    fn default() -> Self {
        SplGrammar::new()
    }
}

#[derive(Clone, Debug)]
pub struct Options {
    pub rewrite_bound: usize,
    pub trace: bool,
    pub instrument: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            rewrite_bound: DEFAULT_REWRITE_BOUND,
            trace: false,
            instrument: false,
        }
    }
}

/// One compilation: a tree under evaluation.
pub struct Analysis<'g> {
    ev: Eval<'g, Kind>,
    names: NameAttrs,
    types: TypeAttrs,
}

impl<'g> Analysis<'g> {
    pub fn new(grammar: &'g SplGrammar, tree: Ast, options: &Options) -> Self {
        let mut ev = Eval::new(&grammar.grammar, tree).with_rewrite_bound(options.rewrite_bound);
        if options.trace {
            ev = ev.traced();
        }
        if options.instrument {
            ev = ev.instrumented();
        }
        Analysis {
            ev,
            names: grammar.names,
            types: grammar.types,
        }
    }

    pub fn eval(&mut self) -> &mut Eval<'g, Kind> {
        &mut self.ev
    }

    pub fn tree(&self) -> &Ast {
        self.ev.tree()
    }

    pub fn root(&self) -> NodeId {
        self.ev.root()
    }

    pub fn name_errors(&mut self) -> EvalResult<Vec<Diagnostic>> {
        let root = self.root();
        self.ev.collect(self.names.name_errors, root)
    }

    pub fn type_errors(&mut self) -> EvalResult<Vec<Diagnostic>> {
        let root = self.root();
        self.ev.collect(self.types.type_errors, root)
    }

    /// Name errors and type errors together, sorted by (line, col, code).
    pub fn diagnostics(&mut self) -> EvalResult<Vec<Diagnostic>> {
        let mut all = self.name_errors()?;
        all.extend(self.type_errors()?);
        sort_diagnostics(&mut all);
        Ok(all)
    }

    pub fn lookup(&mut self, node: NodeId, name: &str) -> EvalResult<LookupResult> {
        self.ev.inh(self.names.lookup, node, name.to_string())
    }

    pub fn declarations(&mut self, scope: NodeId) -> EvalResult<Vec<names::DeclRef>> {
        Ok(self
            .ev
            .syn(self.names.declarations, scope, ())?
            .as_ref()
            .clone())
    }

    pub fn lookup_in_scope(&mut self, scope: NodeId, name: &str) -> EvalResult<LookupResult> {
        self.ev
            .syn(self.names.lookup_in_scope, scope, name.to_string())
    }

    pub fn type_of(&mut self, term: NodeId) -> EvalResult<TypeRep> {
        self.ev.syn(self.types.ty, term, ())
    }

    pub fn declared_type(&mut self, decl: NodeId) -> EvalResult<TypeRep> {
        self.ev.syn(self.types.declared_type, decl, ())
    }

    /// Type denoted by a type expression (after synonym rewriting).
    pub fn resolved_type(&mut self, type_expr: NodeId) -> EvalResult<TypeRep> {
        self.ev.syn(self.types.resolved_type, type_expr, ())
    }

    pub fn render_type(&mut self, t: TypeRep) -> EvalResult<String> {
        types::render(&mut self.ev, self.types.resolved_type, t)
    }

    /// `span  Variant : type` for every term, in pre-order.
    pub fn dump_types(&mut self) -> EvalResult<String> {
        let mut out = String::new();
        for node in self.resolved_preorder()? {
            if !self.ev.data(node).is_term() {
                continue;
            }
            let t = self.type_of(node)?;
            let rendered = self.render_type(t)?;
            out.push_str(&format!(
                "{}  {} : {}\n",
                self.ev.tree().span(node),
                self.ev.tree().variant(node),
                rendered
            ));
        }
        Ok(out)
    }

    /// AST dump of the tree with every rewrite applied.
    pub fn dump_ast(&mut self) -> EvalResult<String> {
        self.resolved_preorder()?;
        Ok(syntax::dump(self.ev.tree()))
    }

    fn resolved_preorder(&mut self) -> EvalResult<Vec<NodeId>> {
        let mut out = Vec::new();
        let mut stack = vec![self.root()];
        while let Some(n) = stack.pop() {
            out.push(n);
            let children = self.ev.children(n)?;
            stack.extend(children.into_iter().rev());
        }
        Ok(out)
    }

    pub fn stats(&self) -> &Stats {
        self.ev.stats()
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.ev.take_trace()
    }

    pub fn rewrite_count(&self) -> usize {
        self.ev.rewrite_count()
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Result of checking one source text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub diagnostics: Vec<Diagnostic>,
}

impl CheckOutcome {
    pub fn is_clean(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Parses and analyses `source`, returning sorted diagnostics.
pub fn check_source(
    file: &str,
    source: &str,
    options: &Options,
) -> Result<CheckOutcome, CheckError> {
    let tree = syntax::parse_source(file, source)?;
    let grammar = SplGrammar::new();
    let mut analysis = Analysis::new(&grammar, tree, options);
    Ok(CheckOutcome {
        diagnostics: analysis.diagnostics()?,
    })
}
