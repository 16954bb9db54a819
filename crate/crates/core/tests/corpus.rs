mod common;

use common::{corpus, corpus_dir, diagnostics, parse};
use splc::oracle;
use splc::syntax::parse_source;
use splc::{Diagnostic, Options};

fn expected(name: &str) -> Vec<String> {
    let path = corpus_dir()
        .join("invalid")
        .join(name)
        .with_extension("expected");
    std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
        .lines()
        .map(str::to_string)
        .collect()
}

fn render(diags: &[Diagnostic]) -> Vec<String> {
    diags
        .iter()
        .map(|d| {
            format!(
                "{} {}:{}",
                d.code.as_str(),
                d.span.line_start,
                d.span.col_start
            )
        })
        .collect()
}

#[test]
fn valid_programs_are_clean() {
    let files = corpus("valid");
    assert!(files.len() >= 5);
    for (name, src) in files {
        assert_eq!(diagnostics(&src), [], "{name}");
        assert_eq!(oracle::check(&parse(&src)), [], "{name} (oracle)");
    }
}

#[test]
fn invalid_programs_match_expected() {
    let files = corpus("invalid");
    assert!(files.len() >= 10);
    for (name, src) in files {
        let want = expected(&name);
        assert!(!want.is_empty(), "{name}");
        let got = match parse_source(&name, &src) {
            Err(e) => vec![e.to_diagnostic()],
            Ok(tree) => {
                let mut o = oracle::check(&tree);
                splc::diagnostic::sort_diagnostics(&mut o);
                assert_eq!(render(&o), want, "{name} (oracle)");
                splc::check_source(&name, &src, &Options::default())
                    .unwrap()
                    .diagnostics
            }
        };
        assert_eq!(render(&got), want, "{name}");
    }
}
