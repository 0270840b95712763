use num_rational::Rational64;

use super::CorpusError;
use crate::scm::Utility;

/// One record of the manifest, before its model is loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub name: String,
    pub model: Option<String>,
    pub context: Option<String>,
    pub summary: String,
    pub expectations: Vec<Expectation>,
}

/// A query with the outputs it is expected to produce, as `key=value` pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub text: String,
    pub query: Query,
    pub expected: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    /// All harm flags over every contrast; `default` overrides the model's default utility.
    Harm { event: String, default: Option<Utility> },
    /// Harm flags with the contrast fixed.
    Strict { event: String, contrast: String },
    /// Strict harm of the alternative `contrast` against `event`.
    Alternative { event: String, contrast: String },
    Cause {
        event: String,
        contrast: String,
        effect: String,
        contrast_effect: String,
        max_witness: Option<usize>,
    },
    Plain {
        event: String,
        effect: String,
        max_witness: Option<usize>,
    },
    Solve,
}

fn vs(s: &str) -> Result<(&str, &str), String> {
    split_pair(s, " vs ").ok_or_else(|| format!("expected `<event> vs <contrast>` in `{s}`"))
}

fn parse_rational(s: &str) -> Option<Utility> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse().ok()?, d.trim().parse().ok()?),
        None => (s.trim().parse().ok()?, 1),
    };
    (d > 0).then(|| Rational64::new(n, d))
}

fn split_pair<'a>(s: &'a str, sep: &str) -> Option<(&'a str, &'a str)> {
    let (a, b) = s.split_once(sep)?;
    let (a, b) = (a.trim(), b.trim());
    (!a.is_empty() && !b.is_empty()).then_some((a, b))
}

pub(crate) fn parse_expectation(line: &str) -> Result<Expectation, String> {
    let (lhs, rhs) = line.rsplit_once("=>").ok_or("missing `=>`")?;
    let expected = rhs
        .split_whitespace()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("expected `key=value`, found `{kv}`"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if expected.is_empty() {
        return Err("no expected values after `=>`".into());
    }

    let (body, opts) = match lhs.split_once('@') {
        Some((b, o)) => (b, format!("@{o}")),
        None => (lhs, String::new()),
    };
    let mut default = None;
    let mut max_witness = None;
    for opt in opts.split_whitespace() {
        let (k, v) = opt
            .strip_prefix('@')
            .and_then(|o| o.split_once('='))
            .ok_or_else(|| format!("malformed option `{opt}`"))?;
        match k {
            "default" => default = Some(parse_rational(v).ok_or_else(|| format!("bad rational `{v}`"))?),
            "max_witness" => max_witness = Some(v.parse().map_err(|_| format!("bad witness bound `{v}`"))?),
            _ => return Err(format!("unknown option `{k}`")),
        }
    }

    let body = body.trim();
    let (kind, rest) = body.split_once(char::is_whitespace).unwrap_or((body, ""));
    let rest = rest.trim();
    let query = match kind {
        "harm" => Query::Harm {
            event: rest.to_string(),
            default,
        },
        "strict" => {
            let (e, c) = vs(rest)?;
            Query::Strict {
                event: e.into(),
                contrast: c.into(),
            }
        }
        "alternative" => {
            let (e, c) = vs(rest)?;
            Query::Alternative {
                event: e.into(),
                contrast: c.into(),
            }
        }
        "cause" => {
            let (lhs, rhs) = split_pair(rest, ";").ok_or("expected `<cause> ; <effect>`")?;
            let (e, c) = vs(lhs)?;
            let (f, g) = vs(rhs)?;
            Query::Cause {
                event: e.into(),
                contrast: c.into(),
                effect: f.into(),
                contrast_effect: g.into(),
                max_witness,
            }
        }
        "plain" => {
            let (e, f) = split_pair(rest, ";").ok_or("expected `<event> ; <effect>`")?;
            Query::Plain {
                event: e.into(),
                effect: f.into(),
                max_witness,
            }
        }
        "solve" if rest.is_empty() => Query::Solve,
        _ => return Err(format!("unknown query `{body}`")),
    };
    if let Query::Harm { event, .. } = &query {
        if event.is_empty() {
            return Err("harm query needs an event".into());
        }
    }
    Ok(Expectation {
        text: line.trim().to_string(),
        query,
        expected,
    })
}

/// Splits manifest text into records. Lines starting with `#` are comments.
pub(crate) fn parse_manifest(text: &str) -> Result<Vec<Record>, CorpusError> {
    let mut records = Vec::new();
    let mut current: Option<Record> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let malformed = |message: String| CorpusError::Manifest { line: i + 1, message };
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            records.extend(current.take());
            continue;
        }
        let (key, value) = line
            .split_once(':')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| malformed(format!("expected `key: value`, found `{line}`")))?;
        if key == "name" {
            records.extend(current.take());
            current = Some(Record {
                name: value.to_string(),
                model: None,
                context: None,
                summary: String::new(),
                expectations: Vec::new(),
            });
            continue;
        }
        let rec = current
            .as_mut()
            .ok_or_else(|| malformed("record must start with `name:`".into()))?;
        match key {
            "model" => rec.model = Some(value.to_string()),
            "context" => rec.context = Some(value.to_string()),
            "summary" => rec.summary = value.to_string(),
            "expect" => rec
                .expectations
                .push(parse_expectation(value).map_err(|e| malformed(format!("in `{}`: {e}", rec.name)))?),
            _ => return Err(malformed(format!("unknown key `{key}`"))),
        }
    }
    records.extend(current);
    Ok(records)
}
