use std::fmt;

use super::model::{Model, VarId};
use super::solve::{solve_with, Context, Intervention};

/// Boolean combination of primitive events `X = x` (values as range positions).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Const(bool),
    Is(VarId, usize),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn is(var: VarId, value: usize) -> Self {
        Formula::Is(var, value)
    }

    pub fn negate(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Evaluates against a full assignment given as range positions.
    pub fn holds(&self, values: &[usize]) -> bool {
        match self {
            Formula::Const(b) => *b,
            Formula::Is(v, x) => values[v.index()] == *x,
            Formula::Not(f) => !f.holds(values),
            Formula::And(fs) => fs.iter().all(|f| f.holds(values)),
            Formula::Or(fs) => fs.iter().any(|f| f.holds(values)),
        }
    }

    /// Mentioned variables, sorted and deduplicated.
    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out.sort_unstable();
        out.dedup();
        out
    }

    fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            Formula::Const(_) => {}
            Formula::Is(v, _) => out.push(*v),
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|f| f.collect_vars(out)),
        }
    }

    pub fn display<'a>(&'a self, m: &'a Model) -> impl fmt::Display + 'a {
        DisplayFormula { f: self, m }
    }
}

struct DisplayFormula<'a> {
    f: &'a Formula,
    m: &'a Model,
}

impl fmt::Display for DisplayFormula<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(f: &Formula, m: &Model, out: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
            match f {
                Formula::Const(b) => write!(out, "{}", u8::from(*b)),
                Formula::Is(v, x) => write!(out, "{}={}", m.variable(*v).name, m.value(*v, *x)),
                Formula::Not(inner) => {
                    out.write_str("!")?;
                    go(inner, m, out, true)
                }
                Formula::And(fs) | Formula::Or(fs) => {
                    let sep = if matches!(f, Formula::And(_)) { " & " } else { " | " };
                    if nested {
                        out.write_str("(")?;
                    }
                    for (i, g) in fs.iter().enumerate() {
                        if i > 0 {
                            out.write_str(sep)?;
                        }
                        go(g, m, out, true)?;
                    }
                    if nested {
                        out.write_str(")")?;
                    }
                    Ok(())
                }
            }
        }
        go(self.f, self.m, out, false)
    }
}

/// Conjunction of primitive events `X1 = x1 & ... & Xk = xk` over distinct variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Event {
    pairs: Vec<(VarId, usize)>,
}

impl Event {
    /// `None` if `pairs` is empty or names a variable twice.
    pub fn new(pairs: Vec<(VarId, usize)>) -> Option<Event> {
        if pairs.is_empty() {
            return None;
        }
        for (i, (v, _)) in pairs.iter().enumerate() {
            if pairs[..i].iter().any(|(w, _)| w == v) {
                return None;
            }
        }
        Some(Event { pairs })
    }

    pub fn single(var: VarId, value: usize) -> Event {
        Event {
            pairs: vec![(var, value)],
        }
    }

    pub fn pairs(&self) -> &[(VarId, usize)] {
        &self.pairs
    }

    pub fn vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.pairs.iter().map(|(v, _)| *v)
    }

    pub fn values(&self) -> Vec<usize> {
        self.pairs.iter().map(|(_, x)| *x).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Same variables with `values` in place of the current ones.
    pub fn with_values(&self, values: &[usize]) -> Event {
        Event {
            pairs: self.vars().zip(values.iter().copied()).collect(),
        }
    }

    pub fn holds(&self, values: &[usize]) -> bool {
        self.pairs.iter().all(|(v, x)| values[v.index()] == *x)
    }

    pub fn to_formula(&self) -> Formula {
        match self.pairs.as_slice() {
            [(v, x)] => Formula::Is(*v, *x),
            ps => Formula::And(ps.iter().map(|(v, x)| Formula::Is(*v, *x)).collect()),
        }
    }

    pub fn display<'a>(&'a self, m: &'a Model) -> impl fmt::Display + 'a {
        DisplayEvent { e: self, m }
    }
}

struct DisplayEvent<'a> {
    e: &'a Event,
    m: &'a Model,
}

impl fmt::Display for DisplayEvent<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (v, x)) in self.e.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(" & ")?;
            }
            write!(f, "{}={}", self.m.variable(*v).name, self.m.value(*v, *x))?;
        }
        Ok(())
    }
}

/// `[Y <- y] phi`, or plain `phi` when there is no prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalFormula {
    pub prefix: Option<Intervention>,
    pub body: Formula,
}

impl CausalFormula {
    pub fn plain(body: Formula) -> Self {
        CausalFormula { prefix: None, body }
    }
}

/// `(M, u) |= [Y <- y] phi`.
pub fn evaluate(m: &Model, ctx: &Context, f: &CausalFormula) -> bool {
    let overrides: Vec<(VarId, usize)> = f
        .prefix
        .as_ref()
        .map(|iv| iv.targets().collect())
        .unwrap_or_default();
    f.body.holds(&solve_with(m, ctx, &overrides))
}

/// Whether `f1 => !f2` is valid: no assignment of the endogenous variables to
/// range values makes both true. Only mentioned variables are enumerated; the
/// rest cannot affect either side.
pub fn implies_not(f1: &Formula, f2: &Formula, m: &Model) -> bool {
    let mut vars = f1.vars();
    vars.extend(f2.vars());
    vars.sort_unstable();
    vars.dedup();
    let mut values = vec![0usize; m.variables().len()];
    loop {
        if f1.holds(&values) && f2.holds(&values) {
            return false;
        }
        // odometer over the mentioned variables
        let mut k = 0;
        loop {
            if k == vars.len() {
                return true;
            }
            let i = vars[k].index();
            values[i] += 1;
            if values[i] < m.range_len(vars[k]) {
                break;
            }
            values[i] = 0;
            k += 1;
        }
    }
}
