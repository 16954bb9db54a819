#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use splc::analysis::{Analysis, Options, SplGrammar};
use splc::rag::NodeId;
use splc::syntax::{parse_source, Ast};
use splc::Diagnostic;

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

/// `(file name, source)` for every `.spl` file under `corpus/<sub>`.
pub fn corpus(sub: &str) -> Vec<(String, String)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir().join(sub))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "spl"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect()
}

/// Corpus programs that get past the parser.
pub fn parsable_corpus() -> Vec<(String, String)> {
    let mut all = corpus("valid");
    all.extend(corpus("invalid"));
    all.retain(|(name, src)| parse_source(name, src).is_ok());
    all
}

pub fn parse(src: &str) -> Ast {
    parse_source("t.spl", src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

/// Sorted diagnostics from the attribute grammar pipeline.
pub fn diagnostics(src: &str) -> Vec<Diagnostic> {
    let grammar = SplGrammar::new();
    let mut a = Analysis::new(&grammar, parse(src), &Options::default());
    a.diagnostics().unwrap()
}

pub fn codes(src: &str) -> Vec<&'static str> {
    diagnostics(src).iter().map(|d| d.code.as_str()).collect()
}

/// (code, span) → count.
pub fn multiset(diags: &[Diagnostic]) -> BTreeMap<(String, String), usize> {
    let mut m = BTreeMap::new();
    for d in diags {
        *m.entry((d.code.as_str().to_string(), d.span.to_string()))
            .or_default() += 1;
    }
    m
}

/// First node in pre-order whose variant is `variant` and whose source text
/// starts at `line:col`.
pub fn node_at(tree: &Ast, variant: &str, line: u32, col: u32) -> NodeId {
    tree.preorder()
        .into_iter()
        .find(|&n| tree.variant(n) == variant && tree.span(n).start() == (line, col))
        .unwrap_or_else(|| panic!("no {variant} at {line}:{col}"))
}

const NAMES: [&str; 6] = ["a", "b", "c", "p", "t", "printi"];

/// Random SPL source text. Names come from a small pool so that shadowing,
/// duplicates, unbound uses and kind confusion all occur often.
pub struct ProgramGen {
    rng: StdRng,
}

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        ProgramGen {
            rng: StdRng::seed_from_u64(seed),
        }
    }

    fn name(&mut self) -> &'static str {
        NAMES.choose(&mut self.rng).unwrap()
    }

    fn ty(&mut self, depth: u32) -> String {
        match self.rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
            0 => "int".into(),
            1 => self.name().into(),
            _ => format!(
                "array[{}] of {}",
                self.rng.gen_range(1..5),
                self.ty(depth - 1)
            ),
        }
    }

    fn term(&mut self, depth: u32) -> String {
        let pick = if depth == 0 {
            self.rng.gen_range(0..2)
        } else {
            self.rng.gen_range(0..7)
        };
        match pick {
            0 => self.rng.gen_range(0..10).to_string(),
            1 => self.name().into(),
            2 => format!(
                "{} {} {}",
                self.term(depth - 1),
                ["+", "-", "*", "/"].choose(&mut self.rng).unwrap(),
                self.term(depth - 1)
            ),
            3 => format!(
                "({} {} {})",
                self.term(depth - 1),
                ["<", "<=", "=", "#", ">", ">="]
                    .choose(&mut self.rng)
                    .unwrap(),
                self.term(depth - 1)
            ),
            4 => format!("-{}", self.term(0)),
            5 => format!("{}[{}]", self.name(), self.term(depth - 1)),
            _ => format!("({})", self.term(depth - 1)),
        }
    }

    fn statement(&mut self, depth: u32) -> String {
        let pick = if depth == 0 {
            self.rng.gen_range(0..3)
        } else {
            self.rng.gen_range(0..6)
        };
        match pick {
            0 => format!("{} := {};", self.term(1), self.term(1)),
            1 => {
                let n = self.rng.gen_range(0..3);
                let args: Vec<_> = (0..n).map(|_| self.term(1)).collect();
                format!("{}({});", self.name(), args.join(", "))
            }
            2 => ";".into(),
            3 => {
                let cond = self.term(1);
                let then = self.statement(depth - 1);
                if self.rng.gen_bool(0.5) {
                    format!("if ({cond}) {then} else {}", self.statement(depth - 1))
                } else {
                    format!("if ({cond}) {then}")
                }
            }
            4 => format!("while ({}) {}", self.term(1), self.statement(depth - 1)),
            _ => format!(
                "{{ {} {} }}",
                self.statement(depth - 1),
                self.statement(depth - 1)
            ),
        }
    }

    fn procedure(&mut self) -> String {
        let params: Vec<_> = (0..self.rng.gen_range(0..3))
            .map(|_| {
                let mode = if self.rng.gen_bool(0.5) { "val" } else { "ref" };
                format!("{mode} {}: {}", self.name(), self.ty(1))
            })
            .collect();
        let vars: Vec<_> = (0..self.rng.gen_range(0..3))
            .map(|_| format!("var {}: {};", self.name(), self.ty(1)))
            .collect();
        let body: Vec<_> = (0..self.rng.gen_range(0..4))
            .map(|_| self.statement(2))
            .collect();
        format!(
            "proc {}({}) {{\n  {}\n  {}\n}}\n",
            self.name(),
            params.join(", "),
            vars.join(" "),
            body.join("\n  ")
        )
    }

    fn candidate(&mut self) -> String {
        let mut out = String::new();
        for _ in 0..self.rng.gen_range(0..3) {
            out.push_str(&format!("type {} = {};\n", self.name(), self.ty(1)));
        }
        for _ in 0..self.rng.gen_range(1..3) {
            out.push_str(&self.procedure());
        }
        out
    }

    /// Next program with at most `max_nodes` syntax tree nodes.
    pub fn program(&mut self, max_nodes: usize) -> String {
        loop {
            let src = self.candidate();
            if parse(&src).len() <= max_nodes {
                return src;
            }
        }
    }
}

/// `count` generated programs of at most 30 nodes, deterministic per seed.
pub fn generated(seed: u64, count: usize) -> Vec<String> {
    let mut g = ProgramGen::new(seed);
    (0..count).map(|_| g.program(30)).collect()
}
