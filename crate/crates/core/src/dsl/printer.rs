use std::fmt::Write;

use super::parser::ModelDocument;
use crate::scm::{format_rational, Body, Expr, Role, Value};

fn write_expr(out: &mut String, e: &Expr, nested: bool) {
    match e {
        Expr::Const(b) => out.push_str(if *b { "1" } else { "0" }),
        Expr::Truthy(v) => out.push_str(v),
        Expr::Is { var, value, negated } => {
            let op = if *negated { "!=" } else { "=" };
            let _ = write!(out, "{var}{op}{value}");
        }
        Expr::Not(inner) => {
            out.push('!');
            write_expr(out, inner, true);
        }
        Expr::And(es) | Expr::Or(es) => {
            let sep = if matches!(e, Expr::And(_)) { " & " } else { " | " };
            if nested {
                out.push('(');
            }
            for (i, sub) in es.iter().enumerate() {
                if i > 0 {
                    out.push_str(sep);
                }
                write_expr(out, sub, true);
            }
            if nested {
                out.push(')');
            }
        }
    }
}

/// Renders an expression in the surface syntax accepted by the parser.
pub fn format_expr(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, false);
    s
}

fn format_range(values: &[Value]) -> String {
    let items: Vec<String> = values.iter().map(Value::to_string).collect();
    format!("{{{}}}", items.join(", "))
}

fn write_body(out: &mut String, body: &Body) {
    match body {
        Body::Bool(e) => write_expr(out, e, false),
        Body::Case { arms, otherwise } => {
            out.push_str("case {\n");
            for arm in arms {
                let _ = writeln!(out, "    when {} -> {};", format_expr(&arm.guard), arm.value);
            }
            if let Some(v) = otherwise {
                let _ = writeln!(out, "    else -> {v};");
            }
            out.push_str("  }");
        }
    }
}

/// Canonical text of a document. Declarations keep their original order, so
/// parsing the output yields an equal document.
pub fn serialize_model(doc: &ModelDocument) -> String {
    let spec = doc.spec();
    let mut out = String::from("version 1\n\n");
    let _ = writeln!(out, "model {} {{", spec.name);
    for v in &spec.variables {
        let range = format_range(&v.range);
        match &v.role {
            Role::Exogenous => {
                let _ = writeln!(out, "  exo {} : {range};", v.name);
            }
            Role::Endogenous(body) | Role::Outcome(body) => {
                let kw = if matches!(v.role, Role::Outcome(_)) { "outcome" } else { "var" };
                let _ = write!(out, "  {kw} {} : {range} = ", v.name);
                write_body(&mut out, body);
                out.push_str(";\n");
            }
        }
    }
    if !spec.utility.is_empty() {
        let entries: Vec<String> = spec
            .utility
            .iter()
            .map(|(v, u)| format!("{v}: {}", format_rational(u)))
            .collect();
        let _ = writeln!(out, "  utility {{ {} }};", entries.join(", "));
    }
    if let Some(d) = &spec.default {
        let _ = writeln!(out, "  default {};", format_rational(d));
    }
    out.push_str("}\n");
    for c in doc.contexts() {
        let entries: Vec<String> = c.values.iter().map(|(n, v)| format!("{n} = {v}")).collect();
        let _ = writeln!(out, "\ncontext {} {{ {} }}", c.name, entries.join(", "));
    }
    out
}
