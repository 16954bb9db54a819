mod common;

use proptest::prelude::*;

use common::{multiset, parse, ProgramGen};
use splc::analysis::{Analysis, Options, SplGrammar};
use splc::oracle;
use splc::rag::NodeId;
use splc::syntax::{dump_structure, pretty, tokenize, TokenKind};
use splc::types::TypeRep;

/// Distinct array type nodes from a real tree.
fn array_nodes(n: usize) -> Vec<NodeId> {
    let vars: String = (0..n)
        .map(|i| format!("var v{i}: array[1] of int; "))
        .collect();
    let tree = parse(&format!("proc p() {{ {vars}}}"));
    let nodes: Vec<_> = tree
        .preorder()
        .into_iter()
        .filter(|&n| tree.variant(n) == "ArrayType")
        .collect();
    assert_eq!(nodes.len(), n);
    nodes
}

fn type_rep() -> impl Strategy<Value = TypeRep> {
    let arrays = array_nodes(4);
    prop_oneof![
        Just(TypeRep::Int),
        Just(TypeRep::Bool),
        (0usize..4).prop_map(move |i| TypeRep::Array(arrays[i])),
    ]
}

fn program() -> impl Strategy<Value = String> {
    any::<u64>().prop_map(|seed| ProgramGen::new(seed).program(30))
}

proptest! {
    #[test]
    fn equivalence_laws(a in type_rep(), b in type_rep(), c in type_rep()) {
        prop_assert!(a.is_equal_to(a));
        prop_assert_eq!(a.is_equal_to(b), b.is_equal_to(a));
        if a.is_equal_to(b) && b.is_equal_to(c) {
            prop_assert!(a.is_equal_to(c));
        }
        prop_assert_eq!(a.is_subtype_of(b), a.is_equal_to(b));
    }

    #[test]
    fn bottom_absorbs(a in type_rep()) {
        prop_assert!(TypeRep::Bottom.is_equal_to(a));
        prop_assert!(a.is_equal_to(TypeRep::Bottom));
    }

    #[test]
    fn distinct_array_nodes_differ(i in 0usize..20, j in 0usize..20) {
        let nodes = array_nodes(20);
        let (a, b) = (TypeRep::Array(nodes[i]), TypeRep::Array(nodes[j]));
        prop_assert_eq!(a.is_equal_to(b), i == j);
    }

    #[test]
    fn tokenize_is_total(src in "[a-z0-9 (){};:=<>#+*/\\[\\],\\n$-]{0,60}") {
        if let Ok(tokens) = tokenize("p.spl", &src) {
            prop_assert_eq!(tokens.last().map(|t| t.kind), Some(TokenKind::Eof));
            prop_assert_eq!(tokens.iter().filter(|t| t.kind == TokenKind::Eof).count(), 1);
        }
    }

    #[test]
    fn pretty_print_round_trips(src in program()) {
        let tree = parse(&src);
        let printed = pretty(&tree);
        let reparsed = parse(&printed);
        prop_assert_eq!(dump_structure(&tree), dump_structure(&reparsed));
        prop_assert_eq!(&pretty(&reparsed), &printed);
    }

    #[test]
    fn clean_exactly_when_oracle_accepts(src in program()) {
        let ours = common::diagnostics(&src);
        let theirs = oracle::check(&parse(&src));
        prop_assert_eq!(ours.is_empty(), theirs.is_empty());
        prop_assert_eq!(multiset(&ours), multiset(&theirs));
    }

    #[test]
    fn diagnostics_sorted_and_deterministic(src in program()) {
        let first = common::diagnostics(&src);
        let keys: Vec<_> = first.iter().map(|d| d.sort_key()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        prop_assert_eq!(keys, sorted);
        prop_assert_eq!(first, common::diagnostics(&src));
    }

    #[test]
    fn every_instance_computed_once(src in program()) {
        let grammar = SplGrammar::new();
        let options = Options { instrument: true, ..Options::default() };
        let mut a = Analysis::new(&grammar, parse(&src), &options);
        a.diagnostics().unwrap();
        a.dump_types().unwrap();
        prop_assert!(a.stats().instance_runs.values().all(|&n| n == 1));
    }

    #[test]
    fn rewriting_reaches_a_fixpoint(src in program()) {
        let grammar = SplGrammar::new();
        let mut a = Analysis::new(&grammar, parse(&src), &Options::default());
        a.dump_ast().unwrap();
        // Whatever is still a named type could not be expanded.
        let named: Vec<_> = a.tree().preorder().into_iter().filter(|&n| a.tree().variant(n) == "NamedType").collect();
        for n in named {
            prop_assert_eq!(a.resolved_type(n).unwrap(), TypeRep::Bottom);
        }
        let before = a.rewrite_count();
        a.dump_ast().unwrap();
        prop_assert_eq!(a.rewrite_count(), before);
    }
}
