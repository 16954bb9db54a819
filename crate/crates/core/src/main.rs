use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use splc::analysis::{Analysis, Options, SplGrammar};
use splc::diagnostic::sort_diagnostics;
use splc::rag::DEFAULT_REWRITE_BOUND;
use splc::syntax::parse_source;
use splc::{oracle, Diagnostic};

const EXIT_DIAGNOSTICS: u8 = 1;
const EXIT_SYNTAX: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_ENGINE: u8 = 70;

#[derive(Parser)]
#[command(name = "splc", version, about = "Name and type checker for SPL")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check one SPL source file.
    Check(CheckArgs),
}

#[derive(clap::Args)]
struct CheckArgs {
    file: PathBuf,
    /// Print the syntax tree after all rewrites.
    #[arg(long)]
    dump_ast: bool,
    /// Print the type of every term.
    #[arg(long)]
    dump_types: bool,
    /// Write the attribute evaluation trace to stderr.
    #[arg(long)]
    trace_attrs: bool,
    /// One JSON record per diagnostic.
    #[arg(long)]
    json: bool,
    /// Use the reference checker instead of the attribute grammar.
    #[arg(long)]
    oracle: bool,
    #[arg(long, value_name = "N", default_value_t = DEFAULT_REWRITE_BOUND)]
    max_rewrite_steps: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let Command::Check(args) = cli.command;
    ExitCode::from(check(&args))
}

fn check(args: &CheckArgs) -> u8 {
    let file = args.file.display().to_string();
    let source = match std::fs::read_to_string(&args.file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("splc: cannot read {file}: {e}");
            return EXIT_IO;
        }
    };
    let mut out = std::io::stdout().lock();
    let tree = match parse_source(&file, &source) {
        Ok(tree) => tree,
        Err(e) => {
            emit(&mut out, &[e.to_diagnostic()], args.json);
            return EXIT_SYNTAX;
        }
    };

    if args.oracle {
        let mut diags = oracle::check(&tree);
        sort_diagnostics(&mut diags);
        emit(&mut out, &diags, args.json);
        return if diags.is_empty() {
            0
        } else {
            EXIT_DIAGNOSTICS
        };
    }

    let grammar = SplGrammar::new();
    let options = Options {
        rewrite_bound: args.max_rewrite_steps,
        trace: args.trace_attrs,
        instrument: false,
    };
    let mut analysis = Analysis::new(&grammar, tree, &options);
    let result = (|| {
        let diags = analysis.diagnostics()?;
        let ast = if args.dump_ast {
            Some(analysis.dump_ast()?)
        } else {
            None
        };
        let types = if args.dump_types {
            Some(analysis.dump_types()?)
        } else {
            None
        };
        Ok::<_, splc::rag::EvalError>((diags, ast, types))
    })();
    if args.trace_attrs {
        let mut err = std::io::stderr().lock();
        for line in analysis.take_trace() {
            let _ = writeln!(err, "{line}");
        }
    }
    match result {
        Ok((diags, ast, types)) => {
            for dump in [ast, types].into_iter().flatten() {
                let _ = out.write_all(dump.as_bytes());
            }
            emit(&mut out, &diags, args.json);
            if diags.is_empty() {
                0
            } else {
                EXIT_DIAGNOSTICS
            }
        }
        Err(e) => {
            eprintln!("splc: {file}: evaluation failed: {e}");
            EXIT_ENGINE
        }
    }
}

fn emit(out: &mut impl Write, diags: &[Diagnostic], json: bool) {
    for d in diags {
        let _ = if json {
            writeln!(
                out,
                "{}",
                serde_json::to_string(&d.to_record()).expect("plain record")
            )
        } else {
            writeln!(out, "{d}")
        };
    }
}
