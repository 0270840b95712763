use std::fmt::Write;
use std::path::Path;

use causal_harm::corpus::{load_corpus_dir, load_embedded, run_entry};
use glob::Pattern;
use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Mismatch {
    pub key: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Serialize)]
pub struct ExpectationRow {
    pub query: String,
    pub passed: bool,
    pub mismatches: Vec<Mismatch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
    Narrative,
}

#[derive(Debug, Serialize)]
pub struct EntryRow {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub expectations: Vec<ExpectationRow>,
}

#[derive(Debug, Serialize)]
pub struct CorpusSummary {
    pub entries: Vec<EntryRow>,
    pub passed: usize,
    pub total: usize,
}

impl CorpusSummary {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let width = self.entries.iter().map(|e| e.name.len()).max().unwrap_or(0);
        for e in &self.entries {
            let tag = match e.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
                Status::Narrative => "-",
            };
            let ok = e.expectations.iter().filter(|x| x.passed).count();
            match (&e.status, &e.error) {
                (Status::Narrative, _) => {
                    let _ = writeln!(out, "{tag:<5} {:<width$}  narrative only", e.name);
                }
                (_, Some(err)) => {
                    let _ = writeln!(out, "{tag:<5} {:<width$}  {err}", e.name);
                }
                _ => {
                    let _ = writeln!(out, "{tag:<5} {:<width$}  {ok}/{}", e.name, e.expectations.len());
                }
            }
            for x in e.expectations.iter().filter(|x| !x.passed) {
                let mut detail: Vec<String> = x
                    .mismatches
                    .iter()
                    .map(|m| format!("{} expected {} got {}", m.key, m.expected, m.actual))
                    .collect();
                detail.extend(x.error.clone());
                let _ = writeln!(out, "      {}: {}", x.query, detail.join(", "));
            }
        }
        let _ = writeln!(out, "{}/{} entries pass", self.passed, self.total);
        out
    }
}

/// Runs every entry whose name matches `filter`. Narrative entries are listed
/// but do not count towards the total.
pub fn run_corpus(filter: Option<&str>, dir: Option<&Path>) -> Result<CorpusSummary, CliError> {
    let pattern = filter.map(Pattern::new).transpose()?;
    let loaded = match dir {
        Some(d) => load_corpus_dir(d)?,
        None => load_embedded(),
    };
    let mut entries = Vec::new();
    for (i, entry) in loaded.into_iter().enumerate() {
        let row = match entry {
            Ok(e) => {
                if pattern.as_ref().is_some_and(|p| !p.matches(&e.name)) {
                    continue;
                }
                if e.is_narrative() {
                    EntryRow {
                        name: e.name,
                        status: Status::Narrative,
                        error: None,
                        expectations: Vec::new(),
                    }
                } else {
                    let expectations: Vec<ExpectationRow> = run_entry(&e)
                        .into_iter()
                        .map(|r| ExpectationRow {
                            passed: r.passed(),
                            query: r.text,
                            mismatches: r
                                .mismatches
                                .into_iter()
                                .map(|(key, expected, actual)| Mismatch { key, expected, actual })
                                .collect(),
                            error: r.error,
                        })
                        .collect();
                    let ok = expectations.iter().all(|x| x.passed);
                    EntryRow {
                        name: e.name,
                        status: if ok { Status::Pass } else { Status::Fail },
                        error: None,
                        expectations,
                    }
                }
            }
            Err(err) => {
                let name = entry_name(&err).unwrap_or_else(|| format!("#{}", i + 1));
                if pattern.as_ref().is_some_and(|p| !p.matches(&name)) {
                    continue;
                }
                EntryRow {
                    name,
                    status: Status::Error,
                    error: Some(err.to_string()),
                    expectations: Vec::new(),
                }
            }
        };
        entries.push(row);
    }
    let counted = entries.iter().filter(|e| !matches!(e.status, Status::Narrative));
    let total = counted.clone().count();
    let passed = counted.filter(|e| matches!(e.status, Status::Pass)).count();
    Ok(CorpusSummary { entries, passed, total })
}

fn entry_name(err: &causal_harm::corpus::CorpusError) -> Option<String> {
    use causal_harm::corpus::CorpusError;
    match err {
        CorpusError::Missing { entry, .. }
        | CorpusError::Fixture { entry, .. }
        | CorpusError::UnknownContext { entry, .. } => Some(entry.clone()),
        CorpusError::Manifest { .. } => None,
    }
}
