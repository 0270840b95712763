//! Harm, strict harm and counterfactual harm of an event against the model's
//! utility over outcome values and its default utility.
//!
//! For the actual outcome `o`, contrast `x'` and alternative outcome `o'`:
//!
//! - H1: `u(o) < d`;
//! - H2: `X = x` rather than `x'` causes `O = o` rather than `O = o'`, and `u(o) < u(o')`;
//! - H3: `u(o) <= u(o'')` where `o''` is the outcome under `[X <- x']` alone.
//!
//! Harm is H1 + H2 for some `(x', o')`; strict harm additionally needs H3 for the
//! same `x'`. Counterfactual harm drops the default and the witness sets:
//! the event holds (C1), `[X <- x']` yields `o'` (C2), and `u(o) < u(o')` (C3).

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;

use crate::causality::{
    check_contrastive_cause, contrasts, validate_contrast, validate_event, CauseQuery, QueryError, SearchOptions,
    Setting, Witness,
};
use crate::scm::{intervene, Event, Formula, Intervention, Model, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HarmCondition {
    H1,
    H2,
    H3,
    C1,
    C2,
    C3,
}

impl fmt::Display for HarmCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// The tuple certifying harm: outcome `o`, alternative `o'`, counterfactual
/// outcome `o''` (all as outcome range positions), contrast `x'` and the AC2 witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmCertificate {
    pub outcome: usize,
    pub alternative: usize,
    pub counterfactual: usize,
    pub contrast: Vec<usize>,
    pub witness: Witness,
}

/// Contrast `x'` with the actual outcome `o` and the outcome `o'` under `[X <- x']`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterfactualCertificate {
    pub contrast: Vec<usize>,
    pub outcome: usize,
    pub alternative: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmVerdict {
    /// Whether `X = x` holds in the actual setting.
    pub event_holds: bool,
    pub harms: bool,
    pub strictly_harms: bool,
    pub counterfactually_harms: bool,
    pub below_default: bool,
    /// Present iff `harms`. Which harm certificate is reported depends on the
    /// check that produced the verdict.
    pub certificate: Option<HarmCertificate>,
    pub counterfactual: Option<CounterfactualCertificate>,
    pub failed: BTreeSet<HarmCondition>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Focus {
    Harm,
    Strict,
    BelowDefault,
}

struct Analysis {
    outcome: usize,
    event_holds: bool,
    h1: bool,
    /// Every `(x', o')` passing H2, contrasts first, then `o'` in range order.
    causal: Vec<HarmCertificate>,
    counterfactual: Option<CounterfactualCertificate>,
}

fn validate(m: &Model, event: &Event) -> Result<(), QueryError> {
    validate_event(m, event)?;
    let o = m.outcome();
    if event.vars().any(|v| v == o) {
        return Err(QueryError::OutcomeInEvent(m.variable(o).name.clone()));
    }
    Ok(())
}

fn analyze(
    setting: &Setting,
    event: &Event,
    harm_contrasts: &[Vec<usize>],
    cf_contrasts: &[Vec<usize>],
    opts: &SearchOptions,
) -> Analysis {
    let m = setting.model();
    let out_var = m.outcome();
    let o = setting.actual_value(out_var);
    let u = |v: usize| m.utility(v);
    let event_holds = event.holds(setting.actual());
    let vars: Vec<VarId> = event.vars().collect();
    let counterfactual_outcome = |contrast: &[usize]| -> usize {
        let overrides: Vec<(VarId, usize)> = vars.iter().copied().zip(contrast.iter().copied()).collect();
        setting.solve_under(&overrides)[out_var.index()]
    };

    let mut causal = Vec::new();
    if event_holds {
        for contrast in harm_contrasts {
            let o2 = counterfactual_outcome(contrast);
            for alt in (0..m.range_len(out_var)).filter(|&a| u(a) > u(o)) {
                let q = CauseQuery {
                    event: event.clone(),
                    contrast: contrast.clone(),
                    effect: Formula::Is(out_var, o),
                    contrast_effect: Formula::Is(out_var, alt),
                };
                let verdict = check_contrastive_cause(setting, &q, opts).expect("validated harm query");
                if let Some(witness) = verdict.witness {
                    causal.push(HarmCertificate {
                        outcome: o,
                        alternative: alt,
                        counterfactual: o2,
                        contrast: contrast.clone(),
                        witness,
                    });
                }
            }
        }
    }

    let counterfactual = if event_holds {
        cf_contrasts.iter().find_map(|contrast| {
            let alt = counterfactual_outcome(contrast);
            (u(o) < u(alt)).then(|| CounterfactualCertificate {
                contrast: contrast.clone(),
                outcome: o,
                alternative: alt,
            })
        })
    } else {
        None
    };

    Analysis {
        outcome: o,
        event_holds,
        h1: u(o) < m.default_utility(),
        causal,
        counterfactual,
    }
}

fn verdict(m: &Model, a: Analysis, focus: Focus) -> HarmVerdict {
    let u = |v: usize| m.utility(v);
    let d = m.default_utility();
    let strict = |c: &&HarmCertificate| u(c.outcome) <= u(c.counterfactual);
    let below = |c: &&HarmCertificate| d <= u(c.alternative);

    let harms = a.h1 && !a.causal.is_empty();
    let strictly_harms = a.h1 && a.causal.iter().any(|c| strict(&c));
    let below_default = a.h1 && a.causal.iter().any(|c| below(&c));
    let certificate = if harms {
        let focused = match focus {
            Focus::Harm => None,
            Focus::Strict => a.causal.iter().find(strict),
            Focus::BelowDefault => a.causal.iter().find(below),
        };
        focused.or(a.causal.first()).cloned()
    } else {
        None
    };

    let mut failed = BTreeSet::new();
    if !a.h1 {
        failed.insert(HarmCondition::H1);
    }
    if a.causal.is_empty() {
        failed.insert(HarmCondition::H2);
    } else if !a.causal.iter().any(|c| strict(&c)) {
        failed.insert(HarmCondition::H3);
    }
    if !a.event_holds {
        failed.insert(HarmCondition::C1);
    } else if a.counterfactual.is_none() {
        failed.insert(HarmCondition::C3);
    }
    debug_assert!(a.causal.iter().all(|c| c.outcome == a.outcome));

    HarmVerdict {
        event_holds: a.event_holds,
        harms,
        strictly_harms,
        counterfactually_harms: a.counterfactual.is_some(),
        below_default,
        certificate,
        counterfactual: a.counterfactual,
        failed,
    }
}

/// Every contrast `x'` in `R(X)`, including ones that agree with `x` somewhere.
fn all_values(m: &Model, event: &Event) -> Vec<Vec<usize>> {
    event
        .vars()
        .map(|v| (0..m.range_len(v)).collect::<Vec<_>>())
        .multi_cartesian_product()
        .collect()
}

fn run(setting: &Setting, event: &Event, opts: &SearchOptions, focus: Focus) -> Result<HarmVerdict, QueryError> {
    let m = setting.model();
    validate(m, event)?;
    // A contrast agreeing with x on some variable always fails AC3, so H2 only
    // needs the contrasts that differ everywhere.
    let a = analyze(setting, event, &contrasts(m, event), &all_values(m, event), opts);
    Ok(verdict(m, a, focus))
}

/// H1 + H2. The certificate is the first `(x', o')` found.
pub fn check_harm(setting: &Setting, event: &Event, opts: &SearchOptions) -> Result<HarmVerdict, QueryError> {
    run(setting, event, opts, Focus::Harm)
}

/// H1 + H2 + H3 for a common contrast. The certificate is the first strict one
/// when strict harm holds.
pub fn check_strict_harm(setting: &Setting, event: &Event, opts: &SearchOptions) -> Result<HarmVerdict, QueryError> {
    run(setting, event, opts, Focus::Strict)
}

/// C1–C3; see [`HarmVerdict::counterfactual`] for the certificate.
pub fn check_counterfactual_harm(
    setting: &Setting,
    event: &Event,
    opts: &SearchOptions,
) -> Result<HarmVerdict, QueryError> {
    run(setting, event, opts, Focus::Harm)
}

/// Harm with a certificate where `u(o) < d <= u(o')`.
pub fn check_below_default(setting: &Setting, event: &Event, opts: &SearchOptions) -> Result<bool, QueryError> {
    Ok(run(setting, event, opts, Focus::BelowDefault)?.below_default)
}

/// Full verdict restricted to the given contrasts, each differing from the event everywhere.
pub fn assess_with_contrasts(
    setting: &Setting,
    event: &Event,
    contrasts: &[Vec<usize>],
    opts: &SearchOptions,
) -> Result<HarmVerdict, QueryError> {
    let m = setting.model();
    validate(m, event)?;
    for c in contrasts {
        validate_contrast(m, event, c)?;
    }
    let a = analyze(setting, event, contrasts, contrasts, opts);
    Ok(verdict(m, a, Focus::Strict))
}

/// Strict-harm verdict for `X = x'` rather than `X = x`, evaluated in
/// `M_{X <- x'}` under the same context so that the alternative event is actual.
pub fn assess_alternative(
    setting: &Setting,
    event: &Event,
    contrast: &[usize],
    opts: &SearchOptions,
) -> Result<HarmVerdict, QueryError> {
    let m = setting.model();
    validate(m, event)?;
    validate_contrast(m, event, contrast)?;
    let iv = Intervention::new(m, event.vars().zip(contrast.iter().copied()))
        .expect("validated endogenous targets");
    let alt_model = intervene(m, &iv);
    let alt_setting = Setting::new(&alt_model, setting.context());
    let alt_event = event.with_values(contrast);
    let a = analyze(&alt_setting, &alt_event, &[event.values()], &[event.values()], opts);
    Ok(verdict(&alt_model, a, Focus::Strict))
}

/// Whether the alternative `X = x'` would have strictly harmed; see [`assess_alternative`].
pub fn check_alternative_strictly_harms(
    setting: &Setting,
    event: &Event,
    contrast: &[usize],
    opts: &SearchOptions,
) -> Result<bool, QueryError> {
    Ok(assess_alternative(setting, event, contrast, opts)?.strictly_harms)
}
