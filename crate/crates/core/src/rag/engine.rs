use std::any::Any;
use std::collections::{HashMap, HashSet};
use std::fmt::{self, Debug};
use std::hash::Hash;
use std::marker::PhantomData;
use std::rc::Rc;

use thiserror::Error;

use super::tree::{NodeData, NodeId, Slot, Tree};

/// Rewrite steps allowed at one tree position before evaluation gives up.
pub const DEFAULT_REWRITE_BOUND: usize = 1000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no equation for attribute `{attribute}` on {variant}")]
    MissingEquation {
        variant: &'static str,
        attribute: &'static str,
    },
    #[error("circular evaluation of `{attribute}` on {variant}@{span}")]
    Cycle {
        variant: &'static str,
        attribute: &'static str,
        span: String,
    },
    #[error("no ancestor of {variant}@{span} defines inherited attribute `{attribute}`")]
    UnreachableDefinition {
        variant: &'static str,
        attribute: &'static str,
        span: String,
    },
    #[error("rewrite at {variant}@{span} exceeded {bound} steps")]
    RewriteDivergence {
        variant: &'static str,
        span: String,
        bound: usize,
    },
    #[error("collection `{attribute}` is rooted at {expected}, not {found}")]
    NotCollectionRoot {
        attribute: &'static str,
        expected: &'static str,
        found: &'static str,
    },
}

pub type EvalResult<T> = Result<T, EvalError>;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("attribute `{attribute}` already has an equation for {variant}{}", role.map(|r| format!(".{r}")).unwrap_or_default())]
    DuplicateEquation {
        attribute: &'static str,
        variant: &'static str,
        role: Option<&'static str>,
    },
    #[error("attribute `{attribute}` already has a default equation")]
    DuplicateDefault { attribute: &'static str },
}

/// Bounds on attribute arguments: compared structurally in memo keys.
pub trait AttrArgs: Clone + Eq + Hash + Debug + 'static {}
impl<T: Clone + Eq + Hash + Debug + 'static> AttrArgs for T {}

pub trait AttrValue: Clone + Debug + 'static {}
impl<T: Clone + Debug + 'static> AttrValue for T {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AttrKind {
    Synthesized,
    Inherited,
    Collection,
}

impl AttrKind {
    fn label(self) -> &'static str {
        match self {
            AttrKind::Synthesized => "syn",
            AttrKind::Inherited => "inh",
            AttrKind::Collection => "coll",
        }
    }
}

macro_rules! handle {
    ($(#[$m:meta])* $name:ident<$($p:ident),*>) => {
        $(#[$m])*
        pub struct $name<$($p),*> {
            id: usize,
            name: &'static str,
            _marker: PhantomData<fn($($p),*)>,
        }

        impl<$($p),*> Clone for $name<$($p),*> {
            fn clone(&self) -> Self {
                *self
            }
        }

        impl<$($p),*> Copy for $name<$($p),*> {}

        impl<$($p),*> $name<$($p),*> {
            pub fn name(&self) -> &'static str {
                self.name
            }
        }

        impl<$($p),*> fmt::Debug for $name<$($p),*> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name)
            }
        }
    };
}

handle!(
    /// Synthesized attribute taking arguments `A` and yielding `V`.
    Syn<A, V>
);
handle!(
    /// Inherited attribute; equations live on ancestors.
    Inh<A, V>
);
handle!(
    /// Collection attribute gathering elements `E` at a root variant.
    Coll<E>
);

type SynEq<K, A, V> = Rc<dyn Fn(&mut Eval<'_, K>, NodeId, &A) -> EvalResult<V>>;
/// Receives the node holding the equation and the child being asked.
type InhEq<K, A, V> = Rc<dyn Fn(&mut Eval<'_, K>, NodeId, NodeId, &A) -> EvalResult<V>>;
type Predicate<K> = Rc<dyn Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<bool>>;
type Contribute<K, E> = Rc<dyn Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<Vec<E>>>;
type Replace<K> = Rc<dyn Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<NodeId>>;

struct Contribution<K, E> {
    variant: &'static str,
    condition: Option<Predicate<K>>,
    values: Contribute<K, E>,
}

struct Collection<K, E> {
    root: &'static str,
    contributions: Vec<Contribution<K, E>>,
}

pub struct RewriteRule<K> {
    pub name: &'static str,
    pub subject: &'static str,
    condition: Predicate<K>,
    replace: Replace<K>,
}

struct AttrInfo {
    name: &'static str,
    kind: AttrKind,
}

/// Attribute declarations, equations, contributions and rewrite rules for
/// one tree language.
pub struct Grammar<K> {
    attrs: Vec<AttrInfo>,
    syn_eqs: HashMap<(usize, &'static str), Box<dyn Any>>,
    syn_defaults: HashMap<usize, Box<dyn Any>>,
    inh_eqs: HashMap<(usize, &'static str, Option<&'static str>), Box<dyn Any>>,
    collections: HashMap<usize, Box<dyn Any>>,
    rewrites: Vec<RewriteRule<K>>,
}

impl<K: NodeData> Default for Grammar<K> {
    fn default() -> Self {
        Grammar::new()
    }
}

impl<K: NodeData> Grammar<K> {
    pub fn new() -> Self {
        Grammar {
            attrs: Vec::new(),
            syn_eqs: HashMap::new(),
            syn_defaults: HashMap::new(),
            inh_eqs: HashMap::new(),
            collections: HashMap::new(),
            rewrites: Vec::new(),
        }
    }

    fn declare(&mut self, name: &'static str, kind: AttrKind) -> usize {
        self.attrs.push(AttrInfo { name, kind });
        self.attrs.len() - 1
    }

    pub fn syn<A: AttrArgs, V: AttrValue>(&mut self, name: &'static str) -> Syn<A, V> {
        let id = self.declare(name, AttrKind::Synthesized);
        Syn {
            id,
            name,
            _marker: PhantomData,
        }
    }

    pub fn inh<A: AttrArgs, V: AttrValue>(&mut self, name: &'static str) -> Inh<A, V> {
        let id = self.declare(name, AttrKind::Inherited);
        Inh {
            id,
            name,
            _marker: PhantomData,
        }
    }

    /// Declares a collection attribute whose value lives on nodes of
    /// variant `root`.
    pub fn coll<E: AttrValue>(&mut self, name: &'static str, root: &'static str) -> Coll<E> {
        let id = self.declare(name, AttrKind::Collection);
        let coll: Collection<K, E> = Collection {
            root,
            contributions: Vec::new(),
        };
        self.collections.insert(id, Box::new(coll));
        Coll {
            id,
            name,
            _marker: PhantomData,
        }
    }

    pub fn eq_syn<A: AttrArgs, V: AttrValue>(
        &mut self,
        attr: Syn<A, V>,
        variant: &'static str,
        eq: impl Fn(&mut Eval<'_, K>, NodeId, &A) -> EvalResult<V> + 'static,
    ) -> Result<(), ConfigError> {
        let key = (attr.id, variant);
        if self.syn_eqs.contains_key(&key) {
            return Err(ConfigError::DuplicateEquation {
                attribute: attr.name,
                variant,
                role: None,
            });
        }
        let eq: SynEq<K, A, V> = Rc::new(eq);
        self.syn_eqs.insert(key, Box::new(eq));
        Ok(())
    }

    /// Equation used for variants without their own equation.
    pub fn default_syn<A: AttrArgs, V: AttrValue>(
        &mut self,
        attr: Syn<A, V>,
        eq: impl Fn(&mut Eval<'_, K>, NodeId, &A) -> EvalResult<V> + 'static,
    ) -> Result<(), ConfigError> {
        if self.syn_defaults.contains_key(&attr.id) {
            return Err(ConfigError::DuplicateDefault {
                attribute: attr.name,
            });
        }
        let eq: SynEq<K, A, V> = Rc::new(eq);
        self.syn_defaults.insert(attr.id, Box::new(eq));
        Ok(())
    }

    /// Equation on `variant` defining `attr` for its children with the given
    /// role, or for all children when `role` is `None`.
    pub fn eq_inh<A: AttrArgs, V: AttrValue>(
        &mut self,
        attr: Inh<A, V>,
        variant: &'static str,
        role: Option<&'static str>,
        eq: impl Fn(&mut Eval<'_, K>, NodeId, NodeId, &A) -> EvalResult<V> + 'static,
    ) -> Result<(), ConfigError> {
        let key = (attr.id, variant, role);
        if self.inh_eqs.contains_key(&key) {
            return Err(ConfigError::DuplicateEquation {
                attribute: attr.name,
                variant,
                role,
            });
        }
        let eq: InhEq<K, A, V> = Rc::new(eq);
        self.inh_eqs.insert(key, Box::new(eq));
        Ok(())
    }

    /// `variant contributes value when condition to coll`.
    pub fn contribute<E: AttrValue>(
        &mut self,
        coll: Coll<E>,
        variant: &'static str,
        condition: impl Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<bool> + 'static,
        value: impl Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<E> + 'static,
    ) {
        self.collection_mut(coll).contributions.push(Contribution {
            variant,
            condition: Some(Rc::new(condition)),
            values: Rc::new(move |ev, n| Ok(vec![value(ev, n)?])),
        });
    }

    /// Contribution of zero or more elements per node.
    pub fn contribute_each<E: AttrValue>(
        &mut self,
        coll: Coll<E>,
        variant: &'static str,
        values: impl Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<Vec<E>> + 'static,
    ) {
        self.collection_mut(coll).contributions.push(Contribution {
            variant,
            condition: None,
            values: Rc::new(values),
        });
    }

    pub fn rewrite(
        &mut self,
        name: &'static str,
        subject: &'static str,
        condition: impl Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<bool> + 'static,
        replace: impl Fn(&mut Eval<'_, K>, NodeId) -> EvalResult<NodeId> + 'static,
    ) {
        self.rewrites.push(RewriteRule {
            name,
            subject,
            condition: Rc::new(condition),
            replace: Rc::new(replace),
        });
    }

    fn collection_mut<E: AttrValue>(&mut self, coll: Coll<E>) -> &mut Collection<K, E> {
        self.collections
            .get_mut(&coll.id)
            .and_then(|c| c.downcast_mut())
            .expect("collection handle from another grammar")
    }

    fn collection<E: AttrValue>(&self, coll: Coll<E>) -> &Collection<K, E> {
        self.collections
            .get(&coll.id)
            .and_then(|c| c.downcast_ref())
            .expect("collection handle from another grammar")
    }

    fn syn_eq<A: AttrArgs, V: AttrValue>(
        &self,
        attr: Syn<A, V>,
        variant: &'static str,
    ) -> Option<SynEq<K, A, V>> {
        self.syn_eqs
            .get(&(attr.id, variant))
            .or_else(|| self.syn_defaults.get(&attr.id))
            .map(|eq| {
                eq.downcast_ref::<SynEq<K, A, V>>()
                    .expect("equation type")
                    .clone()
            })
    }

    fn inh_eq<A: AttrArgs, V: AttrValue>(
        &self,
        attr: Inh<A, V>,
        variant: &'static str,
        role: &'static str,
    ) -> Option<InhEq<K, A, V>> {
        self.inh_eqs
            .get(&(attr.id, variant, Some(role)))
            .or_else(|| self.inh_eqs.get(&(attr.id, variant, None)))
            .map(|eq| {
                eq.downcast_ref::<InhEq<K, A, V>>()
                    .expect("equation type")
                    .clone()
            })
    }

    pub fn attribute_names(&self) -> impl Iterator<Item = (&'static str, AttrKind)> + '_ {
        self.attrs.iter().map(|a| (a.name, a.kind))
    }
}

enum MemoSlot<V> {
    InProgress,
    Done(V),
}

type MemoTable<A, V> = HashMap<(NodeId, A), MemoSlot<V>>;

/// One attribute instance: node, attribute and rendered argument tuple.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    pub node: NodeId,
    pub attribute: &'static str,
    pub args: String,
}

/// Counters collected while instrumentation is on.
#[derive(Clone, Debug, Default)]
pub struct Stats {
    /// Times each instance was computed (memo misses).
    pub instance_runs: HashMap<Instance, u32>,
    /// Explicit equation executions per attribute; broadcast copies excluded.
    pub equation_runs: HashMap<&'static str, u64>,
    pub rewrites: u64,
}

/// Evaluation context for one compilation: the (rewritable) tree plus memo
/// tables. Single-threaded; separate compilations use separate contexts.
pub struct Eval<'g, K> {
    grammar: &'g Grammar<K>,
    tree: Tree<K>,
    memo: Vec<Option<Box<dyn Any>>>,
    resolved: HashSet<NodeId>,
    resolving: HashSet<NodeId>,
    forward: HashMap<NodeId, NodeId>,
    rewrite_steps: HashMap<(NodeId, usize, usize), usize>,
    rewrite_bound: usize,
    instrument: bool,
    stats: Stats,
    trace: Option<Vec<String>>,
}

impl<'g, K: NodeData> Eval<'g, K> {
    pub fn new(grammar: &'g Grammar<K>, tree: Tree<K>) -> Self {
        Eval {
            grammar,
            tree,
            memo: (0..grammar.attrs.len()).map(|_| None).collect(),
            resolved: HashSet::new(),
            resolving: HashSet::new(),
            forward: HashMap::new(),
            rewrite_steps: HashMap::new(),
            rewrite_bound: DEFAULT_REWRITE_BOUND,
            instrument: false,
            stats: Stats::default(),
            trace: None,
        }
    }

    pub fn with_rewrite_bound(mut self, bound: usize) -> Self {
        self.rewrite_bound = bound;
        self
    }

    pub fn instrumented(mut self) -> Self {
        self.instrument = true;
        self
    }

    pub fn traced(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn stats(&self) -> &Stats {
        &self.stats
    }

    pub fn take_trace(&mut self) -> Vec<String> {
        self.trace.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn tree(&self) -> &Tree<K> {
        &self.tree
    }

    pub fn tree_mut(&mut self) -> &mut Tree<K> {
        &mut self.tree
    }

    pub fn into_tree(self) -> Tree<K> {
        self.tree
    }

    pub fn root(&self) -> NodeId {
        self.tree.root()
    }

    pub fn data(&self, node: NodeId) -> &K {
        self.tree.data(node)
    }

    /// The `index`th child of `parent`, rewritten to its final form.
    pub fn child(&mut self, parent: NodeId, index: usize) -> EvalResult<NodeId> {
        let child = self.tree.children(parent)[index];
        self.resolve(child)
    }

    pub fn children(&mut self, parent: NodeId) -> EvalResult<Vec<NodeId>> {
        (0..self.tree.children(parent).len())
            .map(|i| self.child(parent, i))
            .collect()
    }

    pub fn syn<A: AttrArgs, V: AttrValue>(
        &mut self,
        attr: Syn<A, V>,
        node: NodeId,
        args: A,
    ) -> EvalResult<V> {
        let node = self.resolve(node)?;
        let key = (node, args);
        match self.table::<A, V>(attr.id).get(&key) {
            Some(MemoSlot::Done(v)) => return Ok(v.clone()),
            Some(MemoSlot::InProgress) => return Err(self.cycle(node, attr.name)),
            None => {}
        }
        let variant = self.tree.variant(node);
        let eq = self
            .grammar
            .syn_eq(attr, variant)
            .ok_or(EvalError::MissingEquation {
                variant,
                attribute: attr.name,
            })?;
        self.table::<A, V>(attr.id)
            .insert(key.clone(), MemoSlot::InProgress);
        self.count(node, attr.name, &key.1, true);
        let result = eq(self, node, &key.1);
        self.finish(attr.id, key, result, AttrKind::Synthesized, attr.name)
    }

    pub fn inh<A: AttrArgs, V: AttrValue>(
        &mut self,
        attr: Inh<A, V>,
        node: NodeId,
        args: A,
    ) -> EvalResult<V> {
        // Inherited values come from the context, so they may be read while
        // `node` itself is still being rewritten.
        let node = self.forwarded(node);
        let key = (node, args);
        match self.table::<A, V>(attr.id).get(&key) {
            Some(MemoSlot::Done(v)) => return Ok(v.clone()),
            Some(MemoSlot::InProgress) => return Err(self.cycle(node, attr.name)),
            None => {}
        }
        let unreachable = || EvalError::UnreachableDefinition {
            variant: self.tree.variant(node),
            attribute: attr.name,
            span: self.tree.span(node).to_string(),
        };
        let (Some(parent), Some(role)) = (self.tree.parent(node), self.tree.role(node)) else {
            return Err(unreachable());
        };
        let eq = self.grammar.inh_eq(attr, self.tree.variant(parent), role);
        self.table::<A, V>(attr.id)
            .insert(key.clone(), MemoSlot::InProgress);
        self.count(node, attr.name, &key.1, eq.is_some());
        let result = match eq {
            Some(eq) => eq(self, parent, node, &key.1),
            None => self.inh(attr, parent, key.1.clone()),
        };
        self.finish(attr.id, key, result, AttrKind::Inherited, attr.name)
    }

    /// Value of collection `coll` at `root`: contributions of every node in
    /// the (rewritten) tree below `root`, in pre-order.
    pub fn collect<E: AttrValue>(&mut self, coll: Coll<E>, root: NodeId) -> EvalResult<Vec<E>> {
        let root = self.resolve(root)?;
        let key = (root, ());
        match self.table::<(), Vec<E>>(coll.id).get(&key) {
            Some(MemoSlot::Done(v)) => return Ok(v.clone()),
            Some(MemoSlot::InProgress) => return Err(self.cycle(root, coll.name)),
            None => {}
        }
        let grammar = self.grammar;
        let collection = grammar.collection(coll);
        let found = self.tree.variant(root);
        if found != collection.root {
            return Err(EvalError::NotCollectionRoot {
                attribute: coll.name,
                expected: collection.root,
                found,
            });
        }
        self.table::<(), Vec<E>>(coll.id)
            .insert(key, MemoSlot::InProgress);
        self.count(root, coll.name, &(), true);
        let result = self.gather(collection, root);
        self.finish(coll.id, (root, ()), result, AttrKind::Collection, coll.name)
    }

    fn gather<E: AttrValue>(
        &mut self,
        collection: &Collection<K, E>,
        root: NodeId,
    ) -> EvalResult<Vec<E>> {
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(node) = stack.pop() {
            let variant = self.tree.variant(node);
            for c in collection
                .contributions
                .iter()
                .filter(|c| c.variant == variant)
            {
                let applies = match &c.condition {
                    Some(cond) => cond(self, node)?,
                    None => true,
                };
                if applies {
                    out.extend((c.values)(self, node)?);
                }
            }
            let children = self.children(node)?;
            stack.extend(children.into_iter().rev());
        }
        Ok(out)
    }

    /// Applies rewrite rules to `node` until none applies and returns the
    /// node now standing at its position.
    pub fn resolve(&mut self, node: NodeId) -> EvalResult<NodeId> {
        let mut node = self.forwarded(node);
        let grammar = self.grammar;
        loop {
            if self.resolved.contains(&node) {
                return Ok(node);
            }
            if self.resolving.contains(&node) {
                return Err(self.cycle(node, "<rewrite>"));
            }
            let variant = self.tree.variant(node);
            let mut rules = grammar
                .rewrites
                .iter()
                .enumerate()
                .filter(|(_, r)| r.subject == variant)
                .peekable();
            if rules.peek().is_none() {
                self.resolved.insert(node);
                return Ok(node);
            }
            self.resolving.insert(node);
            let mut fired = None;
            for (index, rule) in rules {
                match (rule.condition)(self, node) {
                    Ok(true) => {
                        fired = Some((index, rule));
                        break;
                    }
                    Ok(false) => {}
                    Err(e) => {
                        self.resolving.remove(&node);
                        return Err(e);
                    }
                }
            }
            let Some((index, rule)) = fired else {
                self.resolving.remove(&node);
                self.resolved.insert(node);
                return Ok(node);
            };
            let position = match (self.tree.parent(node), self.tree.slot(node)) {
                (Some(p), Slot::Child(i)) => (p, i),
                _ => (node, usize::MAX),
            };
            let steps = self
                .rewrite_steps
                .entry((position.0, position.1, index))
                .or_default();
            *steps += 1;
            if *steps > self.rewrite_bound {
                self.resolving.remove(&node);
                return Err(EvalError::RewriteDivergence {
                    variant,
                    span: self.tree.span(node).to_string(),
                    bound: self.rewrite_bound,
                });
            }
            let replacement = (rule.replace)(self, node);
            self.resolving.remove(&node);
            let replacement = replacement?;
            self.tree.replace(node, replacement);
            self.forward.insert(node, replacement);
            if self.instrument {
                self.stats.rewrites += 1;
            }
            if let Some(trace) = &mut self.trace {
                trace.push(format!(
                    "REWRITE {}@{} -> {}",
                    variant,
                    self.tree.span(node),
                    self.tree.variant(replacement)
                ));
            }
            node = replacement;
        }
    }

    /// Total rewrite steps applied so far.
    pub fn rewrite_count(&self) -> usize {
        self.rewrite_steps.values().sum()
    }

    fn forwarded(&self, mut node: NodeId) -> NodeId {
        while let Some(&next) = self.forward.get(&node) {
            node = next;
        }
        node
    }

    fn table<A: AttrArgs, V: AttrValue>(&mut self, id: usize) -> &mut MemoTable<A, V> {
        self.memo[id]
            .get_or_insert_with(|| Box::new(MemoTable::<A, V>::new()))
            .downcast_mut()
            .expect("attribute used with inconsistent types")
    }

    fn finish<A: AttrArgs, V: AttrValue>(
        &mut self,
        id: usize,
        key: (NodeId, A),
        result: EvalResult<V>,
        kind: AttrKind,
        name: &'static str,
    ) -> EvalResult<V> {
        match result {
            Ok(v) => {
                if let Some(trace) = &mut self.trace {
                    let node = key.0;
                    trace.push(format!(
                        "EVAL {} {}@{} {}{} -> {}",
                        kind.label(),
                        self.tree.variant(node),
                        self.tree.span(node),
                        name,
                        render_args(&key.1),
                        summarize(&v)
                    ));
                }
                self.table::<A, V>(id)
                    .insert(key, MemoSlot::Done(v.clone()));
                Ok(v)
            }
            Err(e) => {
                self.table::<A, V>(id).remove(&key);
                Err(e)
            }
        }
    }

    fn count<A: AttrArgs>(
        &mut self,
        node: NodeId,
        attribute: &'static str,
        args: &A,
        equation: bool,
    ) {
        if !self.instrument {
            return;
        }
        let instance = Instance {
            node,
            attribute,
            args: render_args(args),
        };
        *self.stats.instance_runs.entry(instance).or_default() += 1;
        if equation {
            *self.stats.equation_runs.entry(attribute).or_default() += 1;
        }
    }

    fn cycle(&self, node: NodeId, attribute: &'static str) -> EvalError {
        EvalError::Cycle {
            variant: self.tree.variant(node),
            attribute,
            span: self.tree.span(node).to_string(),
        }
    }
}

/// `()` renders as `()`, a string `"a"` as `("a")`, tuples as themselves.
fn render_args<A: Debug>(args: &A) -> String {
    let text = format!("{args:?}");
    if text.starts_with('(') {
        text
    } else {
        format!("({text})")
    }
}

fn summarize<V: Debug>(value: &V) -> String {
    let text = format!("{value:?}");
    if text.chars().count() > 80 {
        let cut: String = text.chars().take(77).collect();
        format!("{cut}...")
    } else {
        text
    }
}
