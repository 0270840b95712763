//! Worked examples shipped with the engine, each a `.hcm` model plus queries
//! and the verdicts they must produce.

mod manifest;

use std::fs;
use std::path::Path;

use thiserror::Error;

pub use manifest::{Expectation, Query, Record};

use crate::causality::{check_contrastive_cause, check_plain_cause, CauseQuery, SearchOptions, Setting};
use crate::dsl::{parse_contrast, parse_event, parse_formula, parse_model, Diagnostic, ModelDocument};
use crate::harm::{assess_alternative, assess_with_contrasts, check_strict_harm, HarmVerdict};
use crate::scm::{solve, Context};

const MANIFEST: &str = include_str!("../../corpus/MANIFEST");

const FIXTURES: &[(&str, &str)] = &[
    ("late_preemption.hcm", include_str!("../../corpus/late_preemption.hcm")),
    ("golf_clubs_d0.hcm", include_str!("../../corpus/golf_clubs_d0.hcm")),
    ("tip.hcm", include_str!("../../corpus/tip.hcm")),
    ("autonomous_car_2.hcm", include_str!("../../corpus/autonomous_car_2.hcm")),
    ("autonomous_car_3.hcm", include_str!("../../corpus/autonomous_car_3.hcm")),
    ("sophies_choice.hcm", include_str!("../../corpus/sophies_choice.hcm")),
    ("tear_gas.hcm", include_str!("../../corpus/tear_gas.hcm")),
    ("rescue_2.hcm", include_str!("../../corpus/rescue_2.hcm")),
    ("rescue_3.hcm", include_str!("../../corpus/rescue_3.hcm")),
    ("pills.hcm", include_str!("../../corpus/pills.hcm")),
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
    #[error("entry `{entry}`: cannot read `{file}`: {message}")]
    Missing { entry: String, file: String, message: String },
    #[error("entry `{entry}`: {file}: {diagnostic}")]
    Fixture {
        entry: String,
        file: String,
        diagnostic: Box<Diagnostic>,
    },
    #[error("entry `{entry}`: no context named `{context}`")]
    UnknownContext { entry: String, context: String },
}

/// A loaded corpus entry.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: String,
    pub summary: String,
    /// Fixture file name, source text and parsed document; absent for narrative-only entries.
    pub model: Option<Fixture>,
    pub expectations: Vec<Expectation>,
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub file: String,
    pub source: String,
    pub document: ModelDocument,
    pub context_name: String,
    pub context: Context,
}

impl CorpusEntry {
    pub fn is_narrative(&self) -> bool {
        self.model.is_none()
    }
}

fn load_record(rec: Record, read: &dyn Fn(&str) -> Result<String, String>) -> Result<CorpusEntry, CorpusError> {
    let model = match &rec.model {
        None => None,
        Some(file) => {
            let source = read(file).map_err(|message| CorpusError::Missing {
                entry: rec.name.clone(),
                file: file.clone(),
                message,
            })?;
            let document = parse_model(&source).map_err(|diagnostic| CorpusError::Fixture {
                entry: rec.name.clone(),
                file: file.clone(),
                diagnostic: Box::new(diagnostic),
            })?;
            let unknown = |context: String| CorpusError::UnknownContext {
                entry: rec.name.clone(),
                context,
            };
            let (context_name, context) = match &rec.context {
                Some(c) => (c.clone(), document.context(c).ok_or_else(|| unknown(c.clone()))?),
                None => {
                    let (n, c) = document.default_context().ok_or_else(|| unknown("main".into()))?;
                    (n.to_string(), c)
                }
            };
            Some(Fixture {
                file: file.clone(),
                source,
                document,
                context_name,
                context,
            })
        }
    };
    Ok(CorpusEntry {
        name: rec.name,
        summary: rec.summary,
        model,
        expectations: rec.expectations,
    })
}

/// Loads every entry from manifest text, resolving model files through `read`.
/// The outer error is a malformed manifest; each entry fails on its own.
pub fn load_from(
    manifest: &str,
    read: &dyn Fn(&str) -> Result<String, String>,
) -> Result<Vec<Result<CorpusEntry, CorpusError>>, CorpusError> {
    Ok(manifest::parse_manifest(manifest)?
        .into_iter()
        .map(|rec| load_record(rec, read))
        .collect())
}

/// The built-in corpus, entry by entry.
pub fn load_embedded() -> Vec<Result<CorpusEntry, CorpusError>> {
    let read = |file: &str| {
        FIXTURES
            .iter()
            .find(|(f, _)| *f == file)
            .map(|(_, src)| src.to_string())
            .ok_or_else(|| "not embedded".to_string())
    };
    load_from(MANIFEST, &read).expect("embedded manifest is well formed")
}

/// The built-in corpus; fails on the first entry that does not load.
pub fn load_corpus() -> Result<Vec<CorpusEntry>, CorpusError> {
    load_embedded().into_iter().collect()
}

/// A corpus laid out on disk as `dir/MANIFEST` plus model files.
pub fn load_corpus_dir(dir: &Path) -> Result<Vec<Result<CorpusEntry, CorpusError>>, CorpusError> {
    let manifest = fs::read_to_string(dir.join("MANIFEST")).map_err(|e| CorpusError::Missing {
        entry: "*".into(),
        file: "MANIFEST".into(),
        message: e.to_string(),
    })?;
    let read = |file: &str| fs::read_to_string(dir.join(file)).map_err(|e| e.to_string());
    load_from(&manifest, &read)
}

/// The parsed document of a built-in fixture, by entry name.
#[cfg(test)]
pub(crate) fn fixture(name: &str) -> ModelDocument {
    load_corpus()
        .unwrap()
        .into_iter()
        .find(|e| e.name == name)
        .and_then(|e| e.model)
        .map(|f| f.document)
        .unwrap_or_else(|| panic!("no fixture `{name}`"))
}

/// Outcome of one expectation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectationResult {
    pub text: String,
    /// `(key, expected, actual)` for every key that did not match.
    pub mismatches: Vec<(String, String, String)>,
    pub error: Option<String>,
}

impl ExpectationResult {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.mismatches.is_empty()
    }
}

fn harm_value(v: &HarmVerdict, key: &str) -> Option<String> {
    let b = match key {
        "harms" => v.harms,
        "strict" => v.strictly_harms,
        "counterfactual" => v.counterfactually_harms,
        "below_default" => v.below_default,
        "holds" => v.event_holds,
        _ => return None,
    };
    Some(b.to_string())
}

/// Evaluates the query and returns the actual value for every expected key.
fn actual_values(fx: &Fixture, exp: &Expectation) -> Result<Vec<(String, Option<String>)>, String> {
    let doc = &fx.document;
    let m = doc.model();
    let setting = Setting::new(m, &fx.context);
    let opts = SearchOptions::default();
    let keys = exp.expected.iter().map(|(k, _)| k.as_str());
    let by_key = |f: &dyn Fn(&str) -> Option<String>| keys.clone().map(|k| (k.to_string(), f(k))).collect();
    let event = |s: &str| parse_event(m, s).map_err(|d| format!("`{s}`: {d}"));
    let contrast = |e, s: &str| parse_contrast(m, e, s).map_err(|d| format!("`{s}`: {d}"));
    let formula = |s: &str| {
        parse_formula(s)
            .and_then(|f| f.resolve_body(m))
            .map_err(|d| format!("`{s}`: {d}"))
    };
    Ok(match &exp.query {
        Query::Solve => {
            let a = solve(m, &fx.context);
            by_key(&|k| m.var(k).map(|id| a.value(m, id).to_string()))
        }
        Query::Harm { event: e, default } => {
            let ev = event(e)?;
            let shifted = default.map(|d| m.with_default(d)).transpose().map_err(|e| e.to_string())?;
            let setting = match &shifted {
                Some(s) => Setting::new(s, &fx.context),
                None => setting,
            };
            let v = check_strict_harm(&setting, &ev, &opts).map_err(|e| e.to_string())?;
            by_key(&|k| harm_value(&v, k))
        }
        Query::Strict { event: e, contrast: c } => {
            let ev = event(e)?;
            let cv = contrast(&ev, c)?;
            let v = assess_with_contrasts(&setting, &ev, &[cv], &opts).map_err(|e| e.to_string())?;
            by_key(&|k| harm_value(&v, k))
        }
        Query::Alternative { event: e, contrast: c } => {
            let ev = event(e)?;
            let cv = contrast(&ev, c)?;
            let v = assess_alternative(&setting, &ev, &cv, &opts).map_err(|e| e.to_string())?;
            by_key(&|k| harm_value(&v, k))
        }
        Query::Cause {
            event: e,
            contrast: c,
            effect,
            contrast_effect,
            max_witness,
        } => {
            let ev = event(e)?;
            let q = CauseQuery {
                contrast: contrast(&ev, c)?,
                event: ev,
                effect: formula(effect)?,
                contrast_effect: formula(contrast_effect)?,
            };
            let opts = SearchOptions {
                max_witness: *max_witness,
                ..opts
            };
            let v = check_contrastive_cause(&setting, &q, &opts).map_err(|e| e.to_string())?;
            by_key(&|k| match k {
                "cause" => Some(v.is_cause.to_string()),
                "witness" => v.witness.as_ref().map(|w| {
                    if w.is_empty() {
                        "-".to_string()
                    } else {
                        w.vars.iter().map(|id| m.variable(*id).name.as_str()).collect::<Vec<_>>().join(",")
                    }
                }),
                _ => None,
            })
        }
        Query::Plain {
            event: e,
            effect,
            max_witness,
        } => {
            let ev = event(e)?;
            let f = formula(effect)?;
            let opts = SearchOptions {
                max_witness: *max_witness,
                ..opts
            };
            let v = check_plain_cause(&setting, &ev, &f, &opts).map_err(|e| e.to_string())?;
            by_key(&|k| (k == "cause").then(|| v.verdict.is_cause.to_string()))
        }
    })
}

/// Runs one expectation against a loaded fixture.
pub fn check_expectation(fx: &Fixture, exp: &Expectation) -> ExpectationResult {
    let mut result = ExpectationResult {
        text: exp.text.clone(),
        mismatches: Vec::new(),
        error: None,
    };
    match actual_values(fx, exp) {
        Err(e) => result.error = Some(e),
        Ok(actual) => {
            for ((key, want), (_, got)) in exp.expected.iter().zip(actual) {
                let got = got.unwrap_or_else(|| "<none>".to_string());
                if *want != got {
                    result.mismatches.push((key.clone(), want.clone(), got));
                }
            }
        }
    }
    result
}

/// Runs every expectation of an entry; narrative entries yield no results.
pub fn run_entry(entry: &CorpusEntry) -> Vec<ExpectationResult> {
    match &entry.model {
        None => Vec::new(),
        Some(fx) => entry.expectations.iter().map(|e| check_expectation(fx, e)).collect(),
    }
}
