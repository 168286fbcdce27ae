mod report;
mod serve;

use std::fs;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use abac_graph::dsl::{self, Diagnostic, ModelDocument};
use abac_graph::{evaluate, CombiningAlgorithm, Decision, Model};
use clap::{Parser, Subcommand, ValueEnum};

const EXIT_DENY: u8 = 1;
const EXIT_ERROR: u8 = 2;

#[derive(Parser)]
#[command(
    name = "abac",
    version,
    about = "Attribute-based access decisions over a property graph"
)]
struct Cli {
    /// Combining algorithm: deny-overrides, permit-overrides, first-applicable,
    /// max-score-deny-overrides or shortest-path-deny-overrides.
    #[arg(long, global = true, value_parser = parse_algorithm, default_value = "deny-overrides")]
    algorithm: CombiningAlgorithm,

    /// Traversal bound; must be at least the model's longest attribute chain.
    #[arg(long, global = true)]
    depth: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print Permit or Deny for one access query. Exits 0 on Permit, 1 on Deny.
    Check(QueryArgs),
    /// Show matching policies, their path lengths and how the decision was reached.
    Explain(QueryArgs),
    /// Check a model file and report every problem found.
    Validate { model: PathBuf },
    /// Write a Cypher script for the model or the decision statement.
    ExportCypher {
        model: PathBuf,
        #[arg(long, value_enum, default_value = "data")]
        what: Export,
    },
    /// Answer newline-delimited JSON requests from standard input.
    Serve { model: PathBuf },
}

#[derive(clap::Args)]
struct QueryArgs {
    model: PathBuf,
    subject: String,
    action: String,
    object: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Export {
    Data,
    Policies,
    Query,
}

fn parse_algorithm(s: &str) -> Result<CombiningAlgorithm, String> {
    s.parse().map_err(|e: abac_graph::Error| e.to_string())
}

/// Failure already reported on standard error.
struct Reported;

fn fail(msg: impl std::fmt::Display) -> Reported {
    eprintln!("abac: {msg}");
    Reported
}

fn print_diagnostics(path: &Path, diagnostics: &[Diagnostic]) {
    for d in diagnostics {
        eprintln!("{}:{d}", path.display());
    }
}

fn read(path: &Path) -> Result<String, Reported> {
    fs::read_to_string(path).map_err(|e| fail(format!("{}: {e}", path.display())))
}

fn parse(path: &Path) -> Result<ModelDocument, Reported> {
    dsl::parse_model(&read(path)?).map_err(|diags| {
        print_diagnostics(path, &diags);
        Reported
    })
}

fn load(path: &Path, depth: Option<usize>) -> Result<Model, Reported> {
    let mut model = parse(path)?.load().map_err(|diags| {
        print_diagnostics(path, &diags);
        Reported
    })?;
    if let Some(depth) = depth {
        model.set_attr_depth(depth).map_err(fail)?;
    }
    Ok(model)
}

fn decision_code(decision: Decision) -> u8 {
    match decision {
        Decision::Permit => 0,
        Decision::Deny => EXIT_DENY,
    }
}

fn run(cli: Cli) -> Result<u8, Reported> {
    match cli.command {
        Command::Check(q) => {
            let model = load(&q.model, cli.depth)?;
            let query = model.query(&q.subject, &q.action, &q.object).map_err(fail)?;
            let result = evaluate(&model, &query, cli.algorithm).map_err(fail)?;
            println!("{}", result.decision);
            Ok(decision_code(result.decision))
        }
        Command::Explain(q) => {
            let model = load(&q.model, cli.depth)?;
            let query = model.query(&q.subject, &q.action, &q.object).map_err(fail)?;
            let result = evaluate(&model, &query, cli.algorithm).map_err(fail)?;
            print!("{}", report::explain(&model, &query, &result).map_err(fail)?);
            Ok(decision_code(result.decision))
        }
        Command::Validate { model } => {
            let text = read(&model)?;
            let doc = match dsl::parse_document(&text) {
                Ok(doc) => doc,
                Err(diags) => {
                    print_diagnostics(&model, &diags);
                    return Err(Reported);
                }
            };
            let outcome = report::validate(&doc, cli.depth);
            for d in &outcome.diagnostics {
                eprintln!("{}:{d}", model.display());
            }
            print!("{}", outcome.text);
            Ok(outcome.code)
        }
        Command::ExportCypher { model, what } => {
            let script = match what {
                Export::Data | Export::Policies => {
                    let doc = parse(&model)?;
                    if let Some(depth) = cli.depth {
                        load(&model, Some(depth))?;
                    }
                    match what {
                        Export::Data => dsl::emit_cypher_data(&doc),
                        _ => dsl::emit_cypher_policies(&doc),
                    }
                }
                Export::Query => {
                    let loaded = load(&model, cli.depth)?;
                    dsl::emit_cypher_decision_query(cli.algorithm, loaded.attr_depth()).map_err(fail)?
                }
            };
            print!("{script}");
            Ok(0)
        }
        Command::Serve { model } => {
            let model = load(&model, cli.depth)?;
            let stdin = io::stdin().lock();
            let stdout = BufWriter::new(io::stdout().lock());
            serve::serve(&model, cli.algorithm, stdin, stdout).map_err(fail)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Reported) => ExitCode::from(EXIT_ERROR),
    }
}
