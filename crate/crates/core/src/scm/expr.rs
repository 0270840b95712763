//! Equation bodies as authored, before compilation to lookup tables.

use super::value::Value;

/// Boolean expression over variable values, referenced by name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    /// `0` or `1` in a Boolean position.
    Const(bool),
    /// A bare variable reference; shorthand for `X = 1`.
    Truthy(String),
    /// `X = v`, or `X != v` when `negated`.
    Is {
        var: String,
        value: Value,
        negated: bool,
    },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
}

impl Expr {
    pub fn is(var: impl Into<String>, value: impl Into<Value>) -> Self {
        Expr::Is {
            var: var.into(),
            value: value.into(),
            negated: false,
        }
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Truthy(name.into())
    }

    pub fn negate(e: Expr) -> Self {
        Expr::Not(Box::new(e))
    }

    /// Every variable name referenced, in first-occurrence order.
    pub fn referenced(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Truthy(v) | Expr::Is { var: v, .. } => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Not(e) => e.referenced(out),
            Expr::And(es) | Expr::Or(es) => es.iter().for_each(|e| e.referenced(out)),
        }
    }
}

/// One guarded arm of a case list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arm {
    pub guard: Expr,
    pub value: Value,
}

/// Right-hand side of a structural equation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    /// Boolean body; true yields `1`, false yields `0`.
    Bool(Expr),
    /// First arm whose guard holds; `otherwise` when none does.
    Case {
        arms: Vec<Arm>,
        otherwise: Option<Value>,
    },
}

impl Body {
    pub fn referenced(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Body::Bool(e) => e.referenced(&mut out),
            Body::Case { arms, .. } => arms.iter().for_each(|a| a.guard.referenced(&mut out)),
        }
        out
    }
}

/// Expression with names resolved to variable indices and values to range positions.
#[derive(Debug, Clone)]
pub(crate) enum Compiled {
    Const(bool),
    Is { var: usize, value: usize, negated: bool },
    Not(Box<Compiled>),
    And(Vec<Compiled>),
    Or(Vec<Compiled>),
}

impl Compiled {
    pub(crate) fn eval(&self, values: &[usize]) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Is { var, value, negated } => (values[*var] == *value) != *negated,
            Compiled::Not(e) => !e.eval(values),
            Compiled::And(es) => es.iter().all(|e| e.eval(values)),
            Compiled::Or(es) => es.iter().any(|e| e.eval(values)),
        }
    }
}
