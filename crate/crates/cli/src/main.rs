//! `hcm`: actual causation and harm queries over `.hcm` causal utility models.
//!
//! Stdout carries only results (text, or a JSON report with `--json`);
//! diagnostics go to stderr.
//!
//! # Exit codes
//!
//! - **0**: the queried property holds, or every corpus entry passes
//! - **1**: the queried property does not hold, or some corpus entry fails
//! - **2**: input error: unreadable file, syntax error, invalid model
//! - **3**: semantic error: unknown context, invalid contrast, outcome in event

mod args;
mod corpus;
mod error;
mod query;
mod report;

use std::fs;
use std::io::{self, Read};
use std::process::ExitCode;

use causal_harm::scm::dependency_graph;
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command};
use error::CliError;
use query::{load_model, HarmMode, Options, Query, Replay};

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

/// The query a single-model command stands for.
fn to_query(cmd: Command) -> Query {
    match cmd {
        Command::Solve(m) => Query::Solve {
            model: m.model,
            context: m.context,
        },
        Command::Eval { model, formula } => Query::Eval {
            model: model.model,
            context: model.context,
            formula,
        },
        Command::Cause {
            model,
            event,
            contrast,
            effect,
            contrast_effect,
        } => Query::Cause {
            model: model.model,
            context: model.context,
            event,
            contrast,
            effect,
            contrast_effect,
        },
        Command::Harm {
            model,
            event,
            strict,
            counterfactual,
            below_default,
            alternative,
            default,
        } => {
            let mode = if strict {
                HarmMode::Strict
            } else if counterfactual {
                HarmMode::Counterfactual
            } else if below_default {
                HarmMode::BelowDefault
            } else if let Some(c) = alternative {
                HarmMode::Alternative(c)
            } else {
                HarmMode::Harm
            };
            Query::Harm {
                model: model.model,
                context: model.context,
                event,
                mode,
                default,
            }
        }
        Command::Corpus { .. } | Command::Graph { .. } | Command::Replay { .. } => {
            unreachable!("not a single-model query")
        }
    }
}

fn run_query(q: &Query, opts: &Options, as_json: bool) -> Result<(String, bool), CliError> {
    let report = query::run(q, opts)?;
    let text = if as_json { json(&report) } else { report.to_text() };
    Ok((text, report.holds))
}

fn execute(cli: Cli) -> Result<(String, bool), CliError> {
    let opts = Options {
        max_witness: cli.max_witness,
        all_witnesses: cli.all_witnesses,
    };
    match cli.command {
        Command::Corpus { filter, dir } => {
            let summary = corpus::run_corpus(filter.as_deref(), dir.as_deref())?;
            let text = if cli.json { json(&summary) } else { summary.to_text() };
            Ok((text, summary.all_passed()))
        }
        Command::Graph { model } => {
            let doc = load_model(&model)?;
            let m = doc.model();
            let g = dependency_graph(m);
            let text = if cli.json {
                #[derive(Serialize)]
                struct Graph {
                    nodes: Vec<String>,
                    edges: Vec<(String, String)>,
                }
                json(&Graph {
                    nodes: g.nodes().iter().map(|n| m.variable(*n).name.clone()).collect(),
                    edges: g.named_edges(m),
                })
            } else {
                g.to_dot(m)
            };
            Ok((text, true))
        }
        Command::Replay { report } => {
            let src = if report.as_os_str() == "-" {
                let mut s = String::new();
                io::stdin()
                    .read_to_string(&mut s)
                    .map_err(|source| CliError::Io { path: report.clone(), source })?;
                s
            } else {
                fs::read_to_string(&report).map_err(|source| CliError::Io { path: report.clone(), source })?
            };
            let replay: Replay = serde_json::from_str(&src)?;
            run_query(&replay.query, &replay.options, cli.json)
        }
        cmd => run_query(&to_query(cmd), &opts, cli.json),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok((text, holds)) => {
            print!("{text}");
            ExitCode::from(if holds { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("hcm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
