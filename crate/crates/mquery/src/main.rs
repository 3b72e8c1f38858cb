//! Command-line front end: evaluate, normalize, compare, fuzz, and run
//! the golden corpus.
//!
//! Exit codes: 0 success, 1 parse/validation failure, 2 semantic
//! disagreement (counterexample, rule violation, or golden mismatch),
//! 3 I/O failure.  All output is byte-deterministic for fixed inputs.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mquery::dvalue::{write_dvalue, write_dvalue_pretty, DValue, Object, SemanticsMode};
use mquery::engine::{eval_query, Query, Stage};
use mquery::harness::{check_equiv, fuzz_rules, gen_instance, run_golden_corpus, GenParams};
use mquery::optimizer::{normalize_report, RuleFamily};
use mquery::syntax::{load_instance, parse_query, print_query, ParseIssue};

#[derive(Parser)]
#[command(name = "mquery", version, about = "Reference engine for MQuery pipelines")]
struct Cli {
    /// Report diagnostics as JSON on stderr.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Ordered,
    Unordered,
}

impl From<ModeArg> for SemanticsMode {
    fn from(m: ModeArg) -> SemanticsMode {
        match m {
            ModeArg::Ordered => SemanticsMode::Ordered,
            ModeArg::Unordered => SemanticsMode::Unordered,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum RulesArg {
    All,
    Match,
    Unwind,
    Project,
    Lookup,
}

impl RulesArg {
    fn family(self) -> Option<RuleFamily> {
        match self {
            RulesArg::All => None,
            RulesArg::Match => Some(RuleFamily::Match),
            RulesArg::Unwind => Some(RuleFamily::Unwind),
            RulesArg::Project => Some(RuleFamily::Project),
            RulesArg::Lookup => Some(RuleFamily::Lookup),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate a query file over an instance file.
    Eval {
        /// Instance file: an object mapping collection names to arrays.
        #[arg(long)]
        db: PathBuf,
        /// Query file in the surface syntax.
        #[arg(long)]
        query: PathBuf,
        #[arg(long, value_enum, env = "MQUERY_MODE", default_value = "ordered")]
        mode: ModeArg,
        /// Pretty-print the answer.
        #[arg(long)]
        pretty: bool,
    },
    /// Normalize a query; optionally include the rewrite trace.
    Optimize {
        #[arg(long)]
        query: PathBuf,
        /// Emit a JSON report with the applied rewrite steps.
        #[arg(long)]
        trace: bool,
    },
    /// Check two queries for equivalence on an instance or generated seeds.
    Equiv {
        #[arg(long)]
        q1: PathBuf,
        #[arg(long)]
        q2: PathBuf,
        /// Check over this instance file.
        #[arg(long, conflicts_with = "seeds")]
        db: Option<PathBuf>,
        /// Check over this many generated instances instead.
        #[arg(long)]
        seeds: Option<u64>,
        #[arg(long, value_enum, env = "MQUERY_MODE", default_value = "ordered")]
        mode: ModeArg,
    },
    /// Run the per-rule rewrite soundness campaigns.
    Fuzz {
        /// Constructed windows per rule.
        #[arg(long, default_value_t = 1000)]
        seeds: u64,
        #[arg(long, value_enum, default_value = "all")]
        rules: RulesArg,
    },
    /// Run the embedded golden corpus.
    Golden,
}

const EXIT_INVALID: u8 = 1;
const EXIT_DISAGREE: u8 = 2;
const EXIT_IO: u8 = 3;

struct Reporter {
    json: bool,
}

impl Reporter {
    fn issues(&self, context: &str, issues: &[ParseIssue]) -> ExitCode {
        if self.json {
            let list = DValue::Array(
                issues
                    .iter()
                    .map(|i| {
                        let mut o = Object::new();
                        o.push("location", DValue::string(i.location.clone()));
                        o.push("message", DValue::string(i.message.clone()));
                        DValue::Object(o)
                    })
                    .collect(),
            );
            let mut o = Object::new();
            o.push("error", DValue::string(context));
            o.push("issues", list);
            eprintln!("{}", write_dvalue(&DValue::Object(o), SemanticsMode::Ordered));
        } else {
            eprintln!("{context}:");
            for i in issues {
                eprintln!("  {i}");
            }
        }
        ExitCode::from(EXIT_INVALID)
    }

    fn fail(&self, code: u8, message: &str) -> ExitCode {
        if self.json {
            let mut o = Object::new();
            o.push("error", DValue::string(message));
            eprintln!("{}", write_dvalue(&DValue::Object(o), SemanticsMode::Ordered));
        } else {
            eprintln!("error: {message}");
        }
        ExitCode::from(code)
    }
}

/// Prints to stdout, tolerating a closed pipe on the consumer side.
fn out(text: impl std::fmt::Display) {
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn read_file(r: &Reporter, path: &Path) -> Result<String, ExitCode> {
    std::fs::read_to_string(path)
        .map_err(|e| r.fail(EXIT_IO, &format!("cannot read {}: {e}", path.display())))
}

fn load_query(r: &Reporter, path: &Path) -> Result<Query, ExitCode> {
    let text = read_file(r, path)?;
    parse_query(&text)
        .map_err(|issues| r.issues(&format!("invalid query {}", path.display()), &issues))
}

fn is_core(q: &Query) -> bool {
    q.stages.iter().all(|s| match s {
        Stage::Match(_) | Stage::Unwind(_) | Stage::Project(_) | Stage::Group { .. } => true,
        Stage::Lookup { template, .. } => is_core(template),
        Stage::UnionWith(inner) => is_core(inner),
        Stage::GraphLookup { .. } | Stage::Count(_) | Stage::Sort(_) | Stage::Limit(_)
        | Stage::Skip(_) => false,
    })
}

fn run(cli: Cli) -> ExitCode {
    let r = Reporter { json: cli.json };
    match cli.cmd {
        Cmd::Eval { db, query, mode, pretty } => {
            let mode = SemanticsMode::from(mode);
            let db_text = match read_file(&r, &db) {
                Ok(t) => t,
                Err(c) => return c,
            };
            let instance = match load_instance(&db_text, mode) {
                Ok(i) => i,
                Err(issues) => {
                    return r.issues(&format!("invalid instance {}", db.display()), &issues)
                }
            };
            let q = match load_query(&r, &query) {
                Ok(q) => q,
                Err(c) => return c,
            };
            let answer = DValue::Array(
                eval_query(&instance, &q).into_iter().map(DValue::Object).collect(),
            );
            if pretty {
                out(write_dvalue_pretty(&answer, mode));
            } else {
                out(write_dvalue(&answer, mode));
            }
            ExitCode::SUCCESS
        }
        Cmd::Optimize { query, trace } => {
            let q = match load_query(&r, &query) {
                Ok(q) => q,
                Err(c) => return c,
            };
            let (normal, _, report) = normalize_report(&q);
            if trace {
                out(write_dvalue_pretty(&report, SemanticsMode::Ordered));
            } else {
                out(print_query(&normal));
            }
            ExitCode::SUCCESS
        }
        Cmd::Equiv { q1, q2, db, seeds, mode } => {
            let mode = SemanticsMode::from(mode);
            let (qa, qb) = match (load_query(&r, &q1), load_query(&r, &q2)) {
                (Ok(a), Ok(b)) => (a, b),
                (Err(c), _) | (_, Err(c)) => return c,
            };
            let instances = match (db, seeds) {
                (Some(path), None) => {
                    let text = match read_file(&r, &path) {
                        Ok(t) => t,
                        Err(c) => return c,
                    };
                    match load_instance(&text, mode) {
                        Ok(i) => vec![i],
                        Err(issues) => {
                            return r
                                .issues(&format!("invalid instance {}", path.display()), &issues)
                        }
                    }
                }
                (None, Some(n)) => {
                    if n == 0 {
                        return r.fail(EXIT_INVALID, "--seeds must be at least 1");
                    }
                    if !is_core(&qa) || !is_core(&qb) {
                        return r.fail(
                            EXIT_INVALID,
                            "seed-based equivalence covers only match, unwind, project, \
                             group, lookup, and union stages",
                        );
                    }
                    (0..n).map(|s| gen_instance(&GenParams::with_seed(s), mode)).collect()
                }
                _ => return r.fail(EXIT_INVALID, "exactly one of --db or --seeds is required"),
            };
            let report = check_equiv(&qa, &qb, &instances);
            out(write_dvalue_pretty(&report.to_dvalue(), SemanticsMode::Ordered));
            if report.is_equal() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_DISAGREE)
            }
        }
        Cmd::Fuzz { seeds, rules } => {
            if seeds == 0 {
                return r.fail(EXIT_INVALID, "--seeds must be at least 1");
            }
            let summary = fuzz_rules(rules.family(), seeds);
            out(write_dvalue_pretty(&summary.to_dvalue(), SemanticsMode::Ordered));
            if summary.total_violations() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_DISAGREE)
            }
        }
        Cmd::Golden => {
            let report = run_golden_corpus();
            for c in &report.outcomes {
                let verdict = if c.passed { "pass" } else { "FAIL" };
                out(format_args!("{verdict}  {}", c.name));
                if let Some(d) = &c.detail {
                    out(format_args!("      {}", d.replace('\n', "\n      ")));
                }
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_DISAGREE)
            }
        }
    }
}

fn main() -> ExitCode {
    run(Cli::parse())
}
