//! Contrastive actual causation (modified Halpern–Pearl) by exhaustive search.
//!
//! `X = x` rather than `X = x'` is an actual cause of `phi` rather than `phi'` when
//!
//! - AC1: `X = x` and `phi` both hold in the actual setting;
//! - AC2: for some set `W` of endogenous variables outside `X`, frozen at their
//!   actual values, setting `X <- x'` makes `phi'` true (and `phi' => !phi` is valid);
//! - AC3: no strict subset of `X`, with `x` and `x'` restricted to it, satisfies AC1 and AC2.
//!
//! Because `W` is always frozen at its actual values, only the subsets `W` need
//! searching. They are visited by increasing size, then lexicographically in
//! declaration order, so the first witness found is also a smallest one.

use std::fmt;

use itertools::Itertools;
use thiserror::Error;

use crate::scm::{implies_not, solve_with, Context, Event, Formula, Model, VarId};

/// A model, a context, and the actual solution they determine.
#[derive(Debug, Clone)]
pub struct Setting<'a> {
    model: &'a Model,
    context: &'a Context,
    actual: Vec<usize>,
}

impl<'a> Setting<'a> {
    pub fn new(model: &'a Model, context: &'a Context) -> Self {
        let actual = solve_with(model, context, &[]);
        Setting { model, context, actual }
    }

    pub fn model(&self) -> &'a Model {
        self.model
    }

    pub fn context(&self) -> &'a Context {
        self.context
    }

    /// Actual value of every variable, as range positions.
    pub fn actual(&self) -> &[usize] {
        &self.actual
    }

    pub fn actual_value(&self, id: VarId) -> usize {
        self.actual[id.index()]
    }

    /// Solves with the given variables forced to the given values.
    pub fn solve_under(&self, overrides: &[(VarId, usize)]) -> Vec<usize> {
        solve_with(self.model, self.context, overrides)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchOptions {
    /// Largest witness set considered; `Some(0)` restricts to but-for causation.
    pub max_witness: Option<usize>,
    /// Largest conjunction [`parts_of_cause`] tries as a cause.
    pub max_cause_size: Option<usize>,
}

impl SearchOptions {
    pub fn but_for() -> Self {
        SearchOptions {
            max_witness: Some(0),
            ..Default::default()
        }
    }
}

/// Variables frozen at their actual values in AC2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Witness {
    pub vars: Vec<VarId>,
    pub values: Vec<usize>,
}

impl Witness {
    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.vars.iter().copied().zip(self.values.iter().copied())
    }

    pub fn display<'a>(&'a self, m: &'a Model) -> impl fmt::Display + 'a {
        DisplayWitness { w: self, m }
    }
}

struct DisplayWitness<'a> {
    w: &'a Witness,
    m: &'a Model,
}

impl fmt::Display for DisplayWitness<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, x)) in self.w.pairs().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}={}", self.m.variable(v).name, self.m.value(v, x))?;
        }
        f.write_str("}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CauseCondition {
    Ac1,
    Ac2,
    Ac3,
}

impl fmt::Display for CauseCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CauseCondition::Ac1 => "AC1",
            CauseCondition::Ac2 => "AC2",
            CauseCondition::Ac3 => "AC3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseVerdict {
    pub is_cause: bool,
    /// First witness in search order; present iff `is_cause`.
    pub witness: Option<Witness>,
    /// First condition that failed, when not a cause.
    pub failed: Option<CauseCondition>,
    /// When AC3 fails: the smallest sub-event that already satisfies AC1 and AC2.
    pub smaller_cause: Option<Vec<VarId>>,
}

impl CauseVerdict {
    fn fail(cond: CauseCondition) -> Self {
        CauseVerdict {
            is_cause: false,
            witness: None,
            failed: Some(cond),
            smaller_cause: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("contrast value for `{0}` equals the event's value")]
    InvalidContrast(String),
    #[error("contrast has {actual} values for an event over {expected} variables")]
    ContrastArity { expected: usize, actual: usize },
    #[error("contrast effect does not exclude the effect (phi' => !phi is not valid)")]
    EffectNotExclusive,
    #[error("`{0}` is not an endogenous variable")]
    NotEndogenous(String),
    #[error("the outcome variable `{0}` cannot be part of the event")]
    OutcomeInEvent(String),
}

/// `event` rather than `event` with `contrast` values causes `effect` rather than `contrast_effect`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CauseQuery {
    pub event: Event,
    pub contrast: Vec<usize>,
    pub effect: Formula,
    pub contrast_effect: Formula,
}

pub(crate) fn validate_event(m: &Model, event: &Event) -> Result<(), QueryError> {
    match event.vars().find(|v| !m.is_endogenous(*v)) {
        Some(v) => Err(QueryError::NotEndogenous(m.variable(v).name.clone())),
        None => Ok(()),
    }
}

pub(crate) fn validate_contrast(m: &Model, event: &Event, contrast: &[usize]) -> Result<(), QueryError> {
    if contrast.len() != event.len() {
        return Err(QueryError::ContrastArity {
            expected: event.len(),
            actual: contrast.len(),
        });
    }
    for ((v, x), x2) in event.pairs().iter().zip(contrast) {
        if x == x2 {
            return Err(QueryError::InvalidContrast(m.variable(*v).name.clone()));
        }
    }
    Ok(())
}

fn validate(setting: &Setting, q: &CauseQuery) -> Result<(), QueryError> {
    let m = setting.model;
    validate_event(m, &q.event)?;
    validate_contrast(m, &q.event, &q.contrast)?;
    if !implies_not(&q.contrast_effect, &q.effect, m) {
        return Err(QueryError::EffectNotExclusive);
    }
    Ok(())
}

/// Contrast vectors differing from the event in every component, in range order
/// with the first event variable most significant.
pub fn contrasts(m: &Model, event: &Event) -> Vec<Vec<usize>> {
    event
        .pairs()
        .iter()
        .map(|(v, x)| (0..m.range_len(*v)).filter(|y| y != x).collect::<Vec<_>>())
        .multi_cartesian_product()
        .collect()
}

/// Visits each witness set (up to the size cap) for which
/// `[X <- x', W <- w] phi'` holds; stops when `visit` returns true.
fn search_witnesses(
    setting: &Setting,
    vars: &[VarId],
    contrast: &[usize],
    contrast_effect: &Formula,
    opts: &SearchOptions,
    mut visit: impl FnMut(Witness) -> bool,
) {
    search_states(setting, vars, contrast, opts, |w, state| {
        contrast_effect.holds(state) && visit(w)
    });
}

/// Visits `(W, solution of [X <- x', W <- w])` for every witness set in search order.
fn search_states(
    setting: &Setting,
    vars: &[VarId],
    contrast: &[usize],
    opts: &SearchOptions,
    mut visit: impl FnMut(Witness, &[usize]) -> bool,
) {
    let m = setting.model;
    let pool: Vec<VarId> = m.endogenous().filter(|v| !vars.contains(v)).collect();
    let cap = opts.max_witness.unwrap_or(pool.len()).min(pool.len());
    let mut overrides: Vec<(VarId, usize)> = vars.iter().copied().zip(contrast.iter().copied()).collect();
    let base = overrides.len();
    for size in 0..=cap {
        for w in pool.iter().copied().combinations(size) {
            overrides.truncate(base);
            overrides.extend(w.iter().map(|v| (*v, setting.actual_value(*v))));
            let state = setting.solve_under(&overrides);
            let witness = Witness {
                values: w.iter().map(|v| setting.actual_value(*v)).collect(),
                vars: w,
            };
            if visit(witness, &state) {
                return;
            }
        }
    }
}

fn first_witness(
    setting: &Setting,
    vars: &[VarId],
    contrast: &[usize],
    contrast_effect: &Formula,
    opts: &SearchOptions,
) -> Option<Witness> {
    let mut found = None;
    search_witnesses(setting, vars, contrast, contrast_effect, opts, |w| {
        found = Some(w);
        true
    });
    found
}

fn decide(setting: &Setting, q: &CauseQuery, opts: &SearchOptions) -> CauseVerdict {
    if !(q.event.holds(&setting.actual) && q.effect.holds(&setting.actual)) {
        return CauseVerdict::fail(CauseCondition::Ac1);
    }
    let vars: Vec<VarId> = q.event.vars().collect();
    let Some(witness) = first_witness(setting, &vars, &q.contrast, &q.contrast_effect, opts) else {
        return CauseVerdict::fail(CauseCondition::Ac2);
    };
    for size in 1..vars.len() {
        for sub in (0..vars.len()).combinations(size) {
            let sub_vars: Vec<VarId> = sub.iter().map(|&i| vars[i]).collect();
            let sub_contrast: Vec<usize> = sub.iter().map(|&i| q.contrast[i]).collect();
            if first_witness(setting, &sub_vars, &sub_contrast, &q.contrast_effect, opts).is_some() {
                return CauseVerdict {
                    smaller_cause: Some(sub_vars),
                    ..CauseVerdict::fail(CauseCondition::Ac3)
                };
            }
        }
    }
    CauseVerdict {
        is_cause: true,
        witness: Some(witness),
        failed: None,
        smaller_cause: None,
    }
}

/// Decides AC1–AC3 for a contrastive query.
pub fn check_contrastive_cause(
    setting: &Setting,
    q: &CauseQuery,
    opts: &SearchOptions,
) -> Result<CauseVerdict, QueryError> {
    validate(setting, q)?;
    Ok(decide(setting, q, opts))
}

/// Every witness set satisfying AC2 (AC3 not required), in search order.
/// Empty when AC1 fails.
pub fn enumerate_witnesses(
    setting: &Setting,
    q: &CauseQuery,
    opts: &SearchOptions,
) -> Result<Vec<Witness>, QueryError> {
    validate(setting, q)?;
    if !(q.event.holds(&setting.actual) && q.effect.holds(&setting.actual)) {
        return Ok(Vec::new());
    }
    let vars: Vec<VarId> = q.event.vars().collect();
    let mut out = Vec::new();
    search_witnesses(setting, &vars, &q.contrast, &q.contrast_effect, opts, |w| {
        out.push(w);
        false
    });
    Ok(out)
}

/// Result of a non-contrastive cause check, with the certifying contrast when found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainCause {
    pub verdict: CauseVerdict,
    pub contrast: Option<Vec<usize>>,
    pub contrast_effect: Option<Formula>,
}

/// Candidate contrast effects: conjunctions `Y1 = y1 & ...` over nonempty subsets
/// of the effect's variables, restricted to those true in some reachable state
/// where the effect fails. Ordered by size, then variables, then values.
fn contrast_effect_candidates(phi_vars: &[VarId], states: &[Vec<usize>]) -> Vec<Vec<(VarId, usize)>> {
    let mut cands: Vec<Vec<(VarId, usize)>> = Vec::new();
    for state in states {
        for size in 1..=phi_vars.len() {
            for sub in phi_vars.iter().copied().combinations(size) {
                cands.push(sub.iter().map(|v| (*v, state[v.index()])).collect());
            }
        }
    }
    cands.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.iter().map(|p| p.0).cmp(b.iter().map(|p| p.0)))
            .then_with(|| a.iter().map(|p| p.1).cmp(b.iter().map(|p| p.1)))
    });
    cands.dedup();
    cands
}

fn conjunction(pairs: &[(VarId, usize)]) -> Formula {
    match pairs {
        [(v, x)] => Formula::Is(*v, *x),
        _ => Formula::And(pairs.iter().map(|(v, x)| Formula::Is(*v, *x)).collect()),
    }
}

/// Non-contrastive check: is `event` a cause of `effect` for some contrast `x'`
/// and some contrast effect `phi'`? Contrasts are tried in range order, contrast
/// effects smallest first; the first success is returned.
pub fn check_plain_cause(
    setting: &Setting,
    event: &Event,
    effect: &Formula,
    opts: &SearchOptions,
) -> Result<PlainCause, QueryError> {
    let m = setting.model;
    validate_event(m, event)?;
    let not_cause = |cond| PlainCause {
        verdict: CauseVerdict::fail(cond),
        contrast: None,
        contrast_effect: None,
    };
    if !(event.holds(&setting.actual) && effect.holds(&setting.actual)) {
        return Ok(not_cause(CauseCondition::Ac1));
    }
    let vars: Vec<VarId> = event.vars().collect();
    let phi_vars = effect.vars();
    let mut worst = CauseCondition::Ac2;
    let mut smaller = None;
    for contrast in contrasts(m, event) {
        let mut states = Vec::new();
        search_states(setting, &vars, &contrast, opts, |_, state| {
            if !effect.holds(state) {
                states.push(state.to_vec());
            }
            false
        });
        for cand in contrast_effect_candidates(&phi_vars, &states) {
            let contrast_effect = conjunction(&cand);
            if !implies_not(&contrast_effect, effect, m) {
                continue;
            }
            let q = CauseQuery {
                event: event.clone(),
                contrast: contrast.clone(),
                effect: effect.clone(),
                contrast_effect,
            };
            let verdict = decide(setting, &q, opts);
            if verdict.is_cause {
                return Ok(PlainCause {
                    verdict,
                    contrast: Some(contrast),
                    contrast_effect: Some(q.contrast_effect),
                });
            }
            if verdict.failed == Some(CauseCondition::Ac3) && worst == CauseCondition::Ac2 {
                worst = CauseCondition::Ac3;
                smaller = verdict.smaller_cause;
            }
        }
    }
    let mut out = not_cause(worst);
    out.verdict.smaller_cause = smaller;
    Ok(out)
}

/// A conjunct of a multi-conjunct actual cause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartOfCause {
    pub conjunct: (VarId, usize),
    pub cause: Event,
}

/// Every primitive event that is a conjunct of some actual cause of `effect`
/// with at least two conjuncts. Causes are listed by size, then declaration order.
pub fn parts_of_cause(setting: &Setting, effect: &Formula, opts: &SearchOptions) -> Vec<PartOfCause> {
    let m = setting.model;
    if !effect.holds(&setting.actual) {
        return Vec::new();
    }
    let endo: Vec<VarId> = m.endogenous().collect();
    let max = opts.max_cause_size.unwrap_or(endo.len()).min(endo.len());
    let mut out = Vec::new();
    for size in 2..=max {
        for vars in endo.iter().copied().combinations(size) {
            let pairs = vars.iter().map(|v| (*v, setting.actual_value(*v))).collect();
            let event = Event::new(pairs).expect("distinct variables");
            let found = check_plain_cause(setting, &event, effect, opts).expect("endogenous event");
            if found.verdict.is_cause {
                out.extend(event.pairs().iter().map(|&conjunct| PartOfCause {
                    conjunct,
                    cause: event.clone(),
                }));
            }
        }
    }
    out
}
