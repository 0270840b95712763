use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use causal_harm::causality::{check_contrastive_cause, check_plain_cause, enumerate_witnesses, CauseQuery};
use causal_harm::dsl::{parse_contrast, parse_event, parse_formula, parse_model, ModelDocument};
use causal_harm::harm::{
    assess_alternative, check_below_default, check_counterfactual_harm, check_harm, check_strict_harm,
};
use causal_harm::scm::{evaluate, format_rational, solve, Context, Event, Formula, Model, Utility};
use causal_harm::{HarmVerdict, SearchOptions, Setting, Witness};
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::report::{Binding, Certificate, Report, Timing, Utilities};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Options {
    pub max_witness: Option<usize>,
    #[serde(default)]
    pub all_witnesses: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", tag = "kind", content = "contrast")]
pub enum HarmMode {
    Harm,
    Strict,
    Counterfactual,
    BelowDefault,
    Alternative(String),
}

/// A single query as given on the command line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "camelCase", rename_all_fields = "camelCase")]
pub enum Query {
    Solve {
        model: PathBuf,
        context: Option<String>,
    },
    Eval {
        model: PathBuf,
        context: Option<String>,
        formula: String,
    },
    Cause {
        model: PathBuf,
        context: Option<String>,
        event: String,
        contrast: Option<String>,
        effect: String,
        contrast_effect: Option<String>,
    },
    Harm {
        model: PathBuf,
        context: Option<String>,
        event: String,
        mode: HarmMode,
        default: Option<String>,
    },
}

pub fn load_model(path: &Path) -> Result<ModelDocument, CliError> {
    let src = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_model(&src).map_err(|diagnostic| CliError::Model {
        path: path.to_path_buf(),
        diagnostic: Box::new(diagnostic),
    })
}

fn resolve_context(doc: &ModelDocument, name: Option<&str>) -> Result<(String, Context), CliError> {
    match name {
        Some(n) => doc
            .context(n)
            .map(|c| (n.to_string(), c))
            .ok_or_else(|| CliError::UnknownContext(n.to_string())),
        None => {
            if let Some((n, c)) = doc.default_context() {
                return Ok((n.to_string(), c));
            }
            if doc.model().exogenous().next().is_none() {
                let ctx = Context::all(doc.model()).pop().expect("one empty context");
                return Ok((String::new(), ctx));
            }
            Err(CliError::NoContext)
        }
    }
}

fn event(m: &Model, text: &str) -> Result<Event, CliError> {
    parse_event(m, text).map_err(|diagnostic| CliError::Expression {
        what: "event",
        text: text.to_string(),
        diagnostic: Box::new(diagnostic),
    })
}

fn formula(m: &Model, what: &'static str, text: &str) -> Result<Formula, CliError> {
    parse_formula(text)
        .and_then(|f| f.resolve_body(m))
        .map_err(|diagnostic| CliError::Expression {
            what,
            text: text.to_string(),
            diagnostic: Box::new(diagnostic),
        })
}

fn contrast(m: &Model, e: &Event, text: &str) -> Result<Vec<usize>, CliError> {
    parse_contrast(m, e, text).map_err(|diagnostic| CliError::Expression {
        what: "contrast",
        text: text.to_string(),
        diagnostic: Box::new(diagnostic),
    })
}

fn parse_default(text: &str) -> Result<Utility, CliError> {
    let u: Rational64 = text.trim().parse().map_err(|_| CliError::Default(text.to_string()))?;
    if u < Rational64::from_integer(0) || u > Rational64::from_integer(1) {
        return Err(CliError::Default(text.to_string()));
    }
    Ok(u)
}

fn contrast_bindings(m: &Model, e: &Event, values: &[usize]) -> Vec<Binding> {
    e.vars()
        .zip(values)
        .map(|(v, x)| Binding::new(&m.variable(v).name, m.value(v, *x)))
        .collect()
}

fn witness_bindings(m: &Model, w: &Witness) -> Vec<Binding> {
    w.pairs().map(|(v, x)| Binding::new(&m.variable(v).name, m.value(v, x))).collect()
}

fn witness_certificate(m: &Model, w: &Witness) -> Certificate {
    Certificate {
        witness_vars: w.vars.iter().map(|v| m.variable(*v).name.clone()).collect(),
        witness_values: w.pairs().map(|(v, x)| m.value(v, x).to_string()).collect(),
        ..Default::default()
    }
}

fn harm_report(m: &Model, e: &Event, v: &HarmVerdict) -> (BTreeMap<String, bool>, Option<Certificate>, Option<Certificate>) {
    let flags = BTreeMap::from([
        ("harms".to_string(), v.harms),
        ("strictlyHarms".to_string(), v.strictly_harms),
        ("counterfactuallyHarms".to_string(), v.counterfactually_harms),
        ("belowDefault".to_string(), v.below_default),
        ("eventHolds".to_string(), v.event_holds),
    ]);
    let o = m.outcome();
    let name = |x: usize| m.value(o, x).to_string();
    let util = |x: usize| format_rational(&m.utility(x));
    let cert = v.certificate.as_ref().map(|c| Certificate {
        contrast: contrast_bindings(m, e, &c.contrast),
        o: Some(name(c.outcome)),
        o_prime: Some(name(c.alternative)),
        o_double_prime: Some(name(c.counterfactual)),
        utilities: Some(Utilities {
            o: util(c.outcome),
            o_prime: Some(util(c.alternative)),
            o_double_prime: Some(util(c.counterfactual)),
            default: format_rational(&m.default_utility()),
        }),
        ..witness_certificate(m, &c.witness)
    });
    let cf = v.counterfactual.as_ref().map(|c| Certificate {
        contrast: contrast_bindings(m, e, &c.contrast),
        o: Some(name(c.outcome)),
        o_prime: Some(name(c.alternative)),
        utilities: Some(Utilities {
            o: util(c.outcome),
            o_prime: Some(util(c.alternative)),
            o_double_prime: None,
            default: format_rational(&m.default_utility()),
        }),
        ..Default::default()
    });
    (flags, cert, cf)
}

struct Outcome {
    holds: bool,
    flags: BTreeMap<String, bool>,
    assignment: Option<Vec<Binding>>,
    certificate: Option<Certificate>,
    counterfactual: Option<Certificate>,
    witnesses: Option<Vec<Vec<Binding>>>,
    failed: Vec<String>,
}

impl Outcome {
    fn flag(key: &str, holds: bool) -> Self {
        Outcome {
            holds,
            flags: BTreeMap::from([(key.to_string(), holds)]),
            assignment: None,
            certificate: None,
            counterfactual: None,
            witnesses: None,
            failed: Vec::new(),
        }
    }
}

fn model_and_context(q: &Query) -> (&Path, Option<&str>) {
    match q {
        Query::Solve { model, context }
        | Query::Eval { model, context, .. }
        | Query::Cause { model, context, .. }
        | Query::Harm { model, context, .. } => (model, context.as_deref()),
    }
}

/// Runs a query to completion.
pub fn run(q: &Query, opts: &Options) -> Result<Report, CliError> {
    let start = Instant::now();
    let (path, ctx_name) = model_and_context(q);
    let mut doc = load_model(path)?;
    if let Query::Harm { default: Some(d), .. } = q {
        doc = doc
            .with_default(parse_default(d)?)
            .map_err(|_| CliError::Default(d.clone()))?;
    }
    let (context_name, ctx) = resolve_context(&doc, ctx_name)?;
    let m = doc.model();
    let search = SearchOptions {
        max_witness: opts.max_witness,
        ..Default::default()
    };
    let setting = Setting::new(m, &ctx);
    let out = match q {
        Query::Solve { .. } => {
            let a = solve(m, &ctx);
            let bindings = m
                .topological_order()
                .iter()
                .filter(|v| m.is_endogenous(**v))
                .map(|v| Binding::new(&m.variable(*v).name, a.value(m, *v)))
                .collect();
            Outcome {
                assignment: Some(bindings),
                ..Outcome::flag("holds", true)
            }
        }
        Query::Eval { formula: text, .. } => {
            let f = parse_formula(text)
                .and_then(|f| f.resolve(m))
                .map_err(|diagnostic| CliError::Expression {
                    what: "formula",
                    text: text.clone(),
                    diagnostic: Box::new(diagnostic),
                })?;
            Outcome::flag("holds", evaluate(m, &ctx, &f))
        }
        Query::Cause {
            event: ev,
            contrast: c,
            effect,
            contrast_effect,
            ..
        } => {
            let e = event(m, ev)?;
            let effect = formula(m, "effect", effect)?;
            let (verdict, cq) = match (c, contrast_effect) {
                (Some(c), Some(ce)) => {
                    let cq = CauseQuery {
                        contrast: contrast(m, &e, c)?,
                        contrast_effect: formula(m, "contrast effect", ce)?,
                        event: e.clone(),
                        effect,
                    };
                    (check_contrastive_cause(&setting, &cq, &search)?, Some(cq))
                }
                _ => {
                    let p = check_plain_cause(&setting, &e, &effect, &search)?;
                    let cq = p.contrast.zip(p.contrast_effect).map(|(contrast, contrast_effect)| CauseQuery {
                        event: e.clone(),
                        contrast,
                        effect,
                        contrast_effect,
                    });
                    (p.verdict, cq)
                }
            };
            let mut out = Outcome::flag("isCause", verdict.is_cause);
            out.certificate = verdict.witness.as_ref().map(|w| {
                let mut cert = witness_certificate(m, w);
                if let Some(cq) = &cq {
                    cert.contrast = contrast_bindings(m, &e, &cq.contrast);
                    cert.contrast_effect = Some(cq.contrast_effect.display(m).to_string());
                }
                cert
            });
            if opts.all_witnesses {
                let all = match &cq {
                    Some(cq) => enumerate_witnesses(&setting, cq, &search)?,
                    None => Vec::new(),
                };
                out.witnesses = Some(all.iter().map(|w| witness_bindings(m, w)).collect());
            }
            out.failed = verdict.failed.iter().map(ToString::to_string).collect();
            if let Some(smaller) = &verdict.smaller_cause {
                let names: Vec<&str> = smaller.iter().map(|v| m.variable(*v).name.as_str()).collect();
                out.failed.push(format!("smallerCause={}", names.join(",")));
            }
            out
        }
        Query::Harm { event: ev, mode, .. } => {
            let e = event(m, ev)?;
            let (v, e_shown, holds) = match mode {
                HarmMode::Harm => {
                    let v = check_harm(&setting, &e, &search)?;
                    let h = v.harms;
                    (v, e, h)
                }
                HarmMode::Strict => {
                    let v = check_strict_harm(&setting, &e, &search)?;
                    let h = v.strictly_harms;
                    (v, e, h)
                }
                HarmMode::Counterfactual => {
                    let v = check_counterfactual_harm(&setting, &e, &search)?;
                    let h = v.counterfactually_harms;
                    (v, e, h)
                }
                HarmMode::BelowDefault => {
                    let h = check_below_default(&setting, &e, &search)?;
                    (check_harm(&setting, &e, &search)?, e, h)
                }
                HarmMode::Alternative(c) => {
                    let values = contrast(m, &e, c)?;
                    let v = assess_alternative(&setting, &e, &values, &search)?;
                    let h = v.strictly_harms;
                    (v, e.with_values(&values), h)
                }
            };
            let (flags, certificate, counterfactual) = harm_report(m, &e_shown, &v);
            Outcome {
                holds,
                flags,
                assignment: None,
                certificate,
                counterfactual,
                witnesses: None,
                failed: v.failed.iter().map(ToString::to_string).collect(),
            }
        }
    };
    Ok(Report {
        query: q.clone(),
        options: *opts,
        context: context_name,
        holds: out.holds,
        flags: out.flags,
        assignment: out.assignment,
        certificate: out.certificate,
        counterfactual: out.counterfactual,
        witnesses: out.witnesses,
        failed: out.failed,
        engine_version: env!("CARGO_PKG_VERSION").to_string(),
        timing: Timing {
            micros: u64::try_from(start.elapsed().as_micros()).unwrap_or(u64::MAX),
        },
    })
}

/// The part of a report needed to run it again.
#[derive(Debug, Deserialize)]
pub struct Replay {
    pub query: Query,
    #[serde(default)]
    pub options: Options,
}
