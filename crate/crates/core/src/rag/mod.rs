//! A small demand-driven evaluator for reference attribute grammars.
//!
//! Attributes are declared on a [`Grammar`] and evaluated lazily by an
//! [`Eval`] context that owns the tree. Every attribute instance
//! (node, attribute, arguments) is computed at most once and cached.
//! Inherited attributes are broadcast: a node without an equation on its
//! parent copies the parent's value. Collection attributes walk the whole
//! tree once and gather contributions in pre-order. Rewrite rules fire when
//! a node is first reached, before any of its synthesized attributes are
//! read, and the replacement takes over the node's position permanently.

mod engine;
mod tree;

pub use engine::{
    AttrArgs, AttrKind, AttrValue, Coll, ConfigError, Eval, EvalError, EvalResult, Grammar, Inh,
    Instance, RewriteRule, Stats, Syn, DEFAULT_REWRITE_BOUND,
};
pub use tree::{Node, NodeData, NodeId, Slot, Tree};

#[cfg(test)]
mod tests {
    use std::cell::Cell;
    use std::rc::Rc;
    use std::sync::Arc;

    use super::*;
    use crate::span::SourceSpan;

    #[derive(Clone, Debug, PartialEq)]
    enum T {
        Root,
        Block,
        Leaf(i64),
        Alias(u32),
    }

    impl NodeData for T {
        fn variant(&self) -> &'static str {
            match self {
                T::Root => "Root",
                T::Block => "Block",
                T::Leaf(_) => "Leaf",
                T::Alias(_) => "Alias",
            }
        }

        fn child_role(&self, index: usize) -> &'static str {
            match (self, index) {
                (T::Root, 0) => "first",
                _ => "child",
            }
        }
    }

    fn sp(line: u32) -> SourceSpan {
        SourceSpan::new(Arc::from("t"), (line, 1), (line, 1))
    }

    /// Root(Block(Block(...(Leaf 7)))) with `depth` blocks; ids run root to leaf.
    fn chain(depth: usize) -> (Tree<T>, Vec<NodeId>) {
        let mut tree = Tree::new();
        let mut ids = Vec::new();
        let mut cur = tree.add(T::Leaf(7), sp(depth as u32 + 2), vec![]);
        ids.push(cur);
        for d in (0..depth).rev() {
            cur = tree.add(T::Block, sp(d as u32 + 2), vec![cur]);
            ids.push(cur);
        }
        let root = tree.add(T::Root, sp(1), vec![cur]);
        tree.set_root(root);
        ids.push(root);
        ids.reverse();
        (tree, ids)
    }

    #[test]
    fn synthesized_is_memoized() {
        let runs = Rc::new(Cell::new(0));
        let mut g = Grammar::<T>::new();
        let value: Syn<(), i64> = g.syn("value");
        let r = runs.clone();
        g.eq_syn(value, "Leaf", move |ev, n, _| {
            r.set(r.get() + 1);
            match ev.data(n) {
                T::Leaf(v) => Ok(*v),
                _ => unreachable!(),
            }
        })
        .unwrap();
        let (tree, ids) = chain(0);
        let leaf = *ids.last().unwrap();
        let mut ev = Eval::new(&g, tree).instrumented();
        assert_eq!(ev.syn(value, leaf, ()).unwrap(), 7);
        assert_eq!(ev.syn(value, leaf, ()).unwrap(), 7);
        assert_eq!(runs.get(), 1);
        assert!(ev.stats().instance_runs.values().all(|&c| c == 1));
    }

    #[test]
    fn circular_pair_is_an_error() {
        let mut g = Grammar::<T>::new();
        let a: Syn<(), i64> = g.syn("a");
        let b: Syn<(), i64> = g.syn("b");
        g.eq_syn(a, "Root", move |ev, n, _| ev.syn(b, n, ()))
            .unwrap();
        g.eq_syn(b, "Root", move |ev, n, _| ev.syn(a, n, ()))
            .unwrap();
        let mut tree = Tree::new();
        let root = tree.add(T::Root, sp(1), vec![]);
        tree.set_root(root);
        let mut ev = Eval::new(&g, tree);
        let err = ev.syn(a, root, ()).unwrap_err();
        assert!(
            matches!(err, EvalError::Cycle { attribute: "a", .. }),
            "{err:?}"
        );
        // The failed instance is not left marked in-progress.
        assert!(matches!(
            ev.syn(b, root, ()),
            Err(EvalError::Cycle { attribute: "b", .. })
        ));
    }

    #[test]
    fn missing_equation_names_variant_and_attribute() {
        let mut g = Grammar::<T>::new();
        let value: Syn<(), i64> = g.syn("value");
        let (tree, ids) = chain(1);
        let mut ev = Eval::new(&g, tree);
        assert_eq!(
            ev.syn(value, ids[1], ()),
            Err(EvalError::MissingEquation {
                variant: "Block",
                attribute: "value"
            })
        );
    }

    #[test]
    fn default_equation_applies_to_other_variants() {
        let mut g = Grammar::<T>::new();
        let value: Syn<(), i64> = g.syn("value");
        g.eq_syn(value, "Leaf", |_, _, _| Ok(1)).unwrap();
        g.default_syn(value, |_, _, _| Ok(0)).unwrap();
        let (tree, ids) = chain(1);
        let mut ev = Eval::new(&g, tree);
        assert_eq!(ev.syn(value, ids[1], ()).unwrap(), 0);
        assert_eq!(ev.syn(value, ids[2], ()).unwrap(), 1);
    }

    #[test]
    fn duplicate_equations_are_rejected() {
        let mut g = Grammar::<T>::new();
        let value: Syn<(), i64> = g.syn("value");
        g.eq_syn(value, "Leaf", |_, _, _| Ok(1)).unwrap();
        assert!(matches!(
            g.eq_syn(value, "Leaf", |_, _, _| Ok(2)),
            Err(ConfigError::DuplicateEquation {
                variant: "Leaf",
                ..
            })
        ));
        let depth: Inh<(), i64> = g.inh("depth");
        g.eq_inh(depth, "Root", Some("first"), |_, _, _, _| Ok(0))
            .unwrap();
        g.eq_inh(depth, "Root", None, |_, _, _, _| Ok(0)).unwrap();
        assert!(g
            .eq_inh(depth, "Root", Some("first"), |_, _, _, _| Ok(0))
            .is_err());
    }

    #[test]
    fn inherited_from_direct_parent() {
        let mut g = Grammar::<T>::new();
        let env: Inh<String, String> = g.inh("env");
        g.eq_inh(env, "Root", Some("first"), |_, _, _, name| {
            Ok(format!("root:{name}"))
        })
        .unwrap();
        let (tree, ids) = chain(0);
        let mut ev = Eval::new(&g, tree).instrumented();
        assert_eq!(ev.inh(env, ids[1], "x".into()).unwrap(), "root:x");
        assert_eq!(ev.stats().equation_runs["env"], 1);
    }

    #[test]
    fn broadcast_through_deep_chain_runs_equation_once() {
        let runs = Rc::new(Cell::new(0));
        let mut g = Grammar::<T>::new();
        let env: Inh<String, String> = g.inh("env");
        let r = runs.clone();
        g.eq_inh(env, "Root", None, move |_, _, _, name| {
            r.set(r.get() + 1);
            Ok(format!("root:{name}"))
        })
        .unwrap();
        let (tree, ids) = chain(10);
        let mut ev = Eval::new(&g, tree).instrumented();
        // Demand at the leaf first, then at every block on the way up.
        for &n in ids[1..].iter().rev() {
            assert_eq!(ev.inh(env, n, "a".into()).unwrap(), "root:a");
        }
        assert_eq!(runs.get(), 1);
        assert_eq!(ev.stats().equation_runs["env"], 1);
        assert_eq!(ev.stats().instance_runs.len(), 11);
        assert!(ev.stats().instance_runs.values().all(|&c| c == 1));
        // Distinct arguments are distinct instances.
        assert_eq!(ev.inh(env, ids[3], "b".into()).unwrap(), "root:b");
        assert_eq!(runs.get(), 2);
    }

    #[test]
    fn broadcast_value_equals_root_equation_everywhere() {
        let mut g = Grammar::<T>::new();
        let env: Inh<(), i64> = g.inh("env");
        g.eq_inh(env, "Root", None, |_, _, _, _| Ok(42)).unwrap();
        let (tree, _) = chain(6);
        let nodes: Vec<_> = tree.preorder().into_iter().skip(1).collect();
        let mut ev = Eval::new(&g, tree);
        for n in nodes {
            assert_eq!(ev.inh(env, n, ()).unwrap(), 42);
        }
    }

    #[test]
    fn inherited_without_equation_is_unreachable() {
        let mut g = Grammar::<T>::new();
        let env: Inh<(), i64> = g.inh("env");
        let (tree, ids) = chain(2);
        let mut ev = Eval::new(&g, tree);
        assert!(matches!(
            ev.inh(env, ids[2], ()),
            Err(EvalError::UnreachableDefinition {
                attribute: "env",
                ..
            })
        ));
    }

    #[test]
    fn collection_gathers_in_preorder() {
        let mut g = Grammar::<T>::new();
        let leaves: super::Coll<i64> = g.coll("leaves", "Root");
        g.contribute(
            leaves,
            "Leaf",
            |ev, n| Ok(matches!(ev.data(n), T::Leaf(v) if *v > 0)),
            |ev, n| match ev.data(n) {
                T::Leaf(v) => Ok(*v),
                _ => unreachable!(),
            },
        );
        let mut tree = Tree::new();
        let l1 = tree.add(T::Leaf(3), sp(3), vec![]);
        let l0 = tree.add(T::Leaf(0), sp(4), vec![]);
        let b = tree.add(T::Block, sp(2), vec![l1, l0]);
        let l2 = tree.add(T::Leaf(7), sp(7), vec![]);
        let root = tree.add(T::Root, sp(1), vec![b, l2]);
        tree.set_root(root);
        let mut ev = Eval::new(&g, tree);
        assert_eq!(ev.collect(leaves, root).unwrap(), vec![3, 7]);
        assert!(matches!(
            ev.collect(leaves, b),
            Err(EvalError::NotCollectionRoot { .. })
        ));
    }

    #[test]
    fn collection_without_contributors_is_empty() {
        let mut g = Grammar::<T>::new();
        let none: super::Coll<String> = g.coll("none", "Root");
        let (tree, ids) = chain(3);
        let mut ev = Eval::new(&g, tree);
        assert!(ev.collect(none, ids[0]).unwrap().is_empty());
    }

    /// Alias(k) rewrites to Alias(k-1) until Alias(0), which becomes Leaf.
    fn alias_grammar() -> (Grammar<T>, Syn<(), i64>) {
        let mut g = Grammar::<T>::new();
        let value: Syn<(), i64> = g.syn("value");
        g.eq_syn(value, "Leaf", |ev, n, _| match ev.data(n) {
            T::Leaf(v) => Ok(*v),
            _ => unreachable!(),
        })
        .unwrap();
        g.rewrite(
            "unalias",
            "Alias",
            |_, _| Ok(true),
            |ev, n| {
                let span = ev.tree().span(n).clone();
                let next = match ev.data(n) {
                    T::Alias(0) => T::Leaf(100),
                    T::Alias(k) => T::Alias(k - 1),
                    _ => unreachable!(),
                };
                Ok(ev.tree_mut().add(next, span, vec![]))
            },
        );
        (g, value)
    }

    #[test]
    fn rewrite_applies_before_attribute_access() {
        let (g, value) = alias_grammar();
        let mut tree = Tree::new();
        let alias = tree.add(T::Alias(1), sp(2), vec![]);
        let root = tree.add(T::Root, sp(1), vec![alias]);
        tree.set_root(root);
        let mut ev = Eval::new(&g, tree).traced();
        // Reading through the stale id is transparently forwarded.
        assert_eq!(ev.syn(value, alias, ()).unwrap(), 100);
        assert_eq!(ev.rewrite_count(), 2);
        let child = ev.child(root, 0).unwrap();
        assert_eq!(ev.data(child), &T::Leaf(100));
        assert_eq!(ev.tree().original(child), alias);
        let trace = ev.take_trace();
        assert_eq!(trace[0], "REWRITE Alias@2:1-2:1 -> Alias");
        assert_eq!(trace[1], "REWRITE Alias@2:1-2:1 -> Leaf");
        assert_eq!(trace[2], "EVAL syn Leaf@2:1-2:1 value() -> 100");
    }

    #[test]
    fn unmatched_node_is_not_rewritten() {
        let (g, value) = alias_grammar();
        let (tree, ids) = chain(0);
        let mut ev = Eval::new(&g, tree);
        assert_eq!(ev.syn(value, ids[1], ()).unwrap(), 7);
        assert_eq!(ev.rewrite_count(), 0);
    }

    #[test]
    fn rewrite_bound_stops_divergence() {
        let (g, value) = alias_grammar();
        let mut tree = Tree::new();
        let alias = tree.add(T::Alias(5000), sp(2), vec![]);
        let root = tree.add(T::Root, sp(1), vec![alias]);
        tree.set_root(root);
        let mut ev = Eval::new(&g, tree);
        assert!(matches!(
            ev.syn(value, alias, ()),
            Err(EvalError::RewriteDivergence { bound: 1000, .. })
        ));

        let mut tree = Tree::new();
        let alias = tree.add(T::Alias(3), sp(2), vec![]);
        let root = tree.add(T::Root, sp(1), vec![alias]);
        tree.set_root(root);
        let mut ev = Eval::new(&g, tree).with_rewrite_bound(3);
        assert!(ev.syn(value, alias, ()).is_err());
    }

    #[test]
    fn clone_subtree_records_origin() {
        let (mut tree, ids) = chain(2);
        let copy = tree.clone_subtree(ids[1]);
        assert_eq!(tree.copied_from(copy), Some(ids[1]));
        let inner = tree.children(copy)[0];
        assert_eq!(tree.origin(inner), ids[2]);
        let again = tree.clone_subtree(copy);
        assert_eq!(tree.origin(again), ids[1]);
        assert!(tree.parent(copy).is_none());
    }
}
