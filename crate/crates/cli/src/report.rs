use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::query::{Options, Query};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub var: String,
    pub value: String,
}

impl Binding {
    pub fn new(var: impl Into<String>, value: impl ToString) -> Self {
        Binding {
            var: var.into(),
            value: value.to_string(),
        }
    }
}

fn bindings(bs: &[Binding]) -> String {
    bs.iter().map(|b| format!("{}={}", b.var, b.value)).collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Utilities {
    pub o: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub o_prime: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub o_double_prime: Option<String>,
    pub default: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Certificate {
    pub witness_vars: Vec<String>,
    pub witness_values: Vec<String>,
    pub contrast: Vec<Binding>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contrast_effect: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub o: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub o_prime: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub o_double_prime: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Utilities>,
}

impl Certificate {
    fn witness(&self) -> String {
        let pairs: Vec<String> = self
            .witness_vars
            .iter()
            .zip(&self.witness_values)
            .map(|(v, x)| format!("{v}={x}"))
            .collect();
        format!("{{{}}}", pairs.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Timing {
    pub micros: u64,
}

/// Everything one query produced; `query` and `options` suffice to re-run it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub query: Query,
    pub options: Options,
    pub context: String,
    /// The property the exit code reports on.
    pub holds: bool,
    pub flags: BTreeMap<String, bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<Binding>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterfactual: Option<Certificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Vec<Vec<Binding>>>,
    pub failed: Vec<String>,
    pub engine_version: String,
    pub timing: Timing,
}

impl Report {
    /// Plain-text rendering: the verdict line first, then supporting detail.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let Some(a) = &self.assignment {
            for b in a {
                let _ = writeln!(out, "{}={}", b.var, b.value);
            }
            return out;
        }
        let order = ["holds", "isCause", "harms", "strictlyHarms", "counterfactuallyHarms", "belowDefault", "eventHolds"];
        let flags: Vec<String> = order
            .iter()
            .filter_map(|k| self.flags.get(*k).map(|v| format!("{k}={v}")))
            .collect();
        let _ = writeln!(out, "{}", flags.join(" "));
        if let Some(c) = &self.certificate {
            let mut line = format!("certificate: witness {}", c.witness());
            if !c.contrast.is_empty() {
                let _ = write!(line, " contrast {}", bindings(&c.contrast));
            }
            if let Some(e) = &c.contrast_effect {
                let _ = write!(line, " contrastEffect {e}");
            }
            for (k, v) in [("o", &c.o), ("o'", &c.o_prime), ("o''", &c.o_double_prime)] {
                if let Some(v) = v {
                    let _ = write!(line, " {k}={v}");
                }
            }
            let _ = writeln!(out, "{line}");
            if let Some(u) = &c.utilities {
                let mut line = format!("utilities: u(o)={}", u.o);
                if let Some(p) = &u.o_prime {
                    let _ = write!(line, " u(o')={p}");
                }
                if let Some(p) = &u.o_double_prime {
                    let _ = write!(line, " u(o'')={p}");
                }
                let _ = writeln!(out, "{line} d={}", u.default);
            }
        }
        if let Some(c) = &self.counterfactual {
            let _ = writeln!(
                out,
                "counterfactual: contrast {} o={} o'={}",
                bindings(&c.contrast),
                c.o.as_deref().unwrap_or("?"),
                c.o_prime.as_deref().unwrap_or("?")
            );
        }
        if let Some(ws) = &self.witnesses {
            for w in ws {
                let _ = writeln!(out, "witness: {{{}}}", bindings(w).replace(' ', ", "));
            }
        }
        if !self.failed.is_empty() {
            let _ = writeln!(out, "failed: {}", self.failed.join(" "));
        }
        out
    }
}
