//! Acceptance checks, each returning a one-line summary or the first failure.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use causal_harm::causality::{check_contrastive_cause, check_plain_cause, CauseQuery};
use causal_harm::corpus::{load_embedded, run_entry, CorpusEntry};
use causal_harm::dsl::{parse_model, serialize_model, ModelDocument};
use causal_harm::harm::{assess_with_contrasts, check_below_default, check_harm, check_strict_harm};
use causal_harm::scm::{solve, Context, Event, Formula, Model, Utility, VarId};
use causal_harm::{SearchOptions, Setting};
use itertools::Itertools;
use rand::Rng;

use super::{random_doc, random_monotone, rng, GenConfig, HarmFlags, Oracle};

pub type Outcome = Result<String, String>;

/// Engine-side handles for one oracle context.
pub struct Bridge<'a> {
    pub doc: &'a ModelDocument,
    pub oracle: Oracle,
}

impl<'a> Bridge<'a> {
    pub fn new(doc: &'a ModelDocument) -> Self {
        Bridge {
            doc,
            oracle: Oracle::new(doc.spec()),
        }
    }

    pub fn m(&self) -> &Model {
        self.doc.model()
    }

    pub fn id(&self, i: usize) -> VarId {
        self.m().var(self.oracle.name(i)).unwrap()
    }

    pub fn index(&self, id: VarId) -> usize {
        self.oracle.var(&self.m().variable(id).name)
    }

    pub fn context(&self, ctx: &[(usize, usize)]) -> Context {
        let map: BTreeMap<VarId, usize> = ctx.iter().map(|(i, v)| (self.id(*i), *v)).collect();
        Context::from_indices(self.m(), map).unwrap()
    }

    pub fn event(&self, pairs: &[(usize, usize)]) -> Event {
        Event::new(pairs.iter().map(|(i, v)| (self.id(*i), *v)).collect()).unwrap()
    }

    pub fn conj(&self, pairs: &[(usize, usize)]) -> Formula {
        match pairs {
            [(i, v)] => Formula::Is(self.id(*i), *v),
            _ => Formula::And(pairs.iter().map(|(i, v)| Formula::Is(self.id(*i), *v)).collect()),
        }
    }

    /// Candidate events: every singleton and pair over non-outcome endogenous
    /// variables at their actual values, plus each with its first value flipped.
    pub fn events(&self, actual: &[usize]) -> Vec<Vec<(usize, usize)>> {
        let vars: Vec<usize> = self
            .oracle
            .endogenous()
            .into_iter()
            .filter(|&v| v != self.oracle.outcome)
            .collect();
        let mut out = Vec::new();
        for k in 1..=2 {
            for sub in vars.iter().copied().combinations(k) {
                let ev: Vec<(usize, usize)> = sub.iter().map(|&v| (v, actual[v])).collect();
                let mut flipped = ev.clone();
                flipped[0].1 = (flipped[0].1 + 1) % self.oracle.range_len(flipped[0].0);
                out.push(ev);
                out.push(flipped);
            }
        }
        out
    }

    /// Contrasts differing from the event in every component.
    pub fn contrasts(&self, event: &[(usize, usize)]) -> Vec<Vec<usize>> {
        event
            .iter()
            .map(|&(i, x)| (0..self.oracle.range_len(i)).filter(move |&v| v != x))
            .multi_cartesian_product()
            .collect()
    }
}

fn flags(v: &causal_harm::HarmVerdict) -> HarmFlags {
    HarmFlags {
        harms: v.harms,
        strict: v.strictly_harms,
        counterfactual: v.counterfactually_harms,
        below_default: v.below_default,
    }
}

fn corpus_entries() -> Vec<CorpusEntry> {
    load_embedded()
        .into_iter()
        .map(|e| e.expect("embedded corpus loads"))
        .collect()
}

pub fn corpus_verdicts() -> Outcome {
    let entries = corpus_entries();
    let mut checked = 0;
    let mut models = 0;
    for e in &entries {
        if e.model.is_some() {
            models += 1;
        }
        for r in run_entry(e) {
            if !r.passed() {
                return Err(format!("{}: `{}`: {:?} {:?}", e.name, r.text, r.mismatches, r.error));
            }
            checked += 1;
        }
    }
    if models != 10 {
        return Err(format!("expected 10 model entries, found {models}"));
    }
    Ok(format!("{checked} expectations over {models} models"))
}

pub fn oracle_equivalence(models: u64, seed: u64) -> Outcome {
    let opts = SearchOptions::default();
    let mut causes = 0;
    let mut harms = 0;
    for s in seed..seed + models {
        let doc = random_doc(s, &GenConfig::BINARY);
        let b = Bridge::new(&doc);
        let o = &b.oracle;
        for ctx in o.contexts() {
            let context = b.context(&ctx);
            let setting = Setting::new(b.m(), &context);
            let actual = o.solve(&ctx, &[]);
            for ev in b.events(&actual) {
                let event = b.event(&ev);
                let vars: Vec<usize> = ev.iter().map(|p| p.0).collect();
                for y in o.endogenous().into_iter().filter(|y| !vars.contains(y)) {
                    for (yv, yv2) in (0..o.range_len(y)).tuple_combinations().flat_map(|(a, c)| [(a, c), (c, a)]) {
                        for c in b.contrasts(&ev) {
                            let q = CauseQuery {
                                event: event.clone(),
                                contrast: c.clone(),
                                effect: b.conj(&[(y, yv)]),
                                contrast_effect: b.conj(&[(y, yv2)]),
                            };
                            let got = check_contrastive_cause(&setting, &q, &opts).map_err(|e| e.to_string())?;
                            let want = o.cause(&ctx, &ev, &c, &|st| st[y] == yv, &|st| st[y] == yv2);
                            let got_w = got.witness.as_ref().map(|w| w.vars.iter().map(|v| b.index(*v)).collect_vec());
                            if got.is_cause != want.is_some() || got_w != want {
                                return Err(format!(
                                    "model {s} ctx {ctx:?} event {ev:?} vs {c:?}, {}={yv} vs {yv2}: engine {:?} oracle {want:?}",
                                    o.name(y),
                                    got_w
                                ));
                            }
                            causes += 1;
                        }
                    }
                }
                let want = o.harm(&ctx, &ev);
                let got = flags(&check_harm(&setting, &event, &opts).map_err(|e| e.to_string())?);
                let strict = flags(&check_strict_harm(&setting, &event, &opts).map_err(|e| e.to_string())?);
                let below = check_below_default(&setting, &event, &opts).map_err(|e| e.to_string())?;
                if got != want || strict != want || below != want.below_default {
                    return Err(format!(
                        "model {s} ctx {ctx:?} event {ev:?}: engine {got:?} / {strict:?} / below={below}, oracle {want:?}"
                    ));
                }
                harms += 1;
            }
        }
    }
    Ok(format!("{models} models: {causes} cause queries, {harms} harm queries agree"))
}

pub fn plain_equivalence(models: u64, seed: u64) -> Outcome {
    let opts = SearchOptions::default();
    let mut queries = 0;
    let mut positive = 0;
    for s in seed..seed + models {
        let doc = random_doc(s, &GenConfig::BINARY);
        let b = Bridge::new(&doc);
        let o = &b.oracle;
        for ctx in o.contexts() {
            let context = b.context(&ctx);
            let setting = Setting::new(b.m(), &context);
            let actual = o.solve(&ctx, &[]);
            for ev in b.events(&actual).into_iter().filter(|ev| ev.iter().all(|(i, v)| actual[*i] == *v)) {
                let event = b.event(&ev);
                let vars: Vec<usize> = ev.iter().map(|p| p.0).collect();
                let ys: Vec<usize> = o.endogenous().into_iter().filter(|y| !vars.contains(y)).collect();
                let mut effects: Vec<Vec<(usize, usize)>> = ys.iter().map(|&y| vec![(y, actual[y])]).collect();
                effects.extend(ys.iter().tuple_combinations().map(|(&a, &c)| vec![(a, actual[a]), (c, actual[c])]));
                for phi in effects {
                    let got = check_plain_cause(&setting, &event, &b.conj(&phi), &opts)
                        .map_err(|e| e.to_string())?
                        .verdict
                        .is_cause;
                    let want = o.contrastive_exists(&ctx, &ev, &phi);
                    if got != want {
                        return Err(format!("model {s} ctx {ctx:?} event {ev:?} effect {phi:?}: plain {got}, contrastive {want}"));
                    }
                    if let [x] = ev[..] {
                        let standard = o.standard_cause(&ctx, x, &|st| phi.iter().all(|(i, v)| st[*i] == *v));
                        if standard != got {
                            return Err(format!(
                                "model {s} ctx {ctx:?} event {ev:?} effect {phi:?}: plain {got}, non-contrastive {standard}"
                            ));
                        }
                    }
                    positive += usize::from(got);
                    queries += 1;
                }
            }
        }
    }
    Ok(format!("{models} models: {queries} queries ({positive} causes), zero counterexamples"))
}

pub fn containments(models: u64, seed: u64) -> Outcome {
    let opts = SearchOptions::default();
    let mut checked = 0;
    for s in seed..seed + models {
        let doc = random_doc(s, &GenConfig::BINARY);
        let b = Bridge::new(&doc);
        for ctx in b.oracle.contexts() {
            let context = b.context(&ctx);
            let setting = Setting::new(b.m(), &context);
            let actual = b.oracle.solve(&ctx, &[]);
            for ev in b.events(&actual) {
                let v = check_strict_harm(&setting, &b.event(&ev), &opts).map_err(|e| e.to_string())?;
                if (v.strictly_harms && !v.harms) || (v.below_default && !v.harms) || v.certificate.is_some() != v.harms {
                    return Err(format!("model {s} ctx {ctx:?} event {ev:?}: {v:?}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{models} models, {checked} verdicts, zero violations"))
}

fn all_flags(b: &Bridge, m: &Model) -> Result<Vec<HarmFlags>, String> {
    let opts = SearchOptions::default();
    let mut out = Vec::new();
    for ctx in b.oracle.contexts() {
        let context = b.context(&ctx);
        let setting = Setting::new(m, &context);
        let actual = b.oracle.solve(&ctx, &[]);
        for ev in b.events(&actual) {
            out.push(flags(&check_strict_harm(&setting, &b.event(&ev), &opts).map_err(|e| e.to_string())?));
        }
    }
    Ok(out)
}

pub fn monotone_invariance(models: u64, maps: usize, seed: u64) -> Outcome {
    let mut r = rng(seed ^ 0x5eed);
    let mut compared = 0;
    for s in seed..seed + models {
        let doc = random_doc(s, &GenConfig::BINARY);
        let b = Bridge::new(&doc);
        let m = b.m();
        let base = all_flags(&b, m)?;
        for k in 0..maps {
            let g = random_monotone(&mut r);
            let utilities: Vec<Utility> = m.utilities().iter().map(|u| g(*u)).collect();
            let moved = m.with_utilities(utilities, g(m.default_utility())).map_err(|e| e.to_string())?;
            if all_flags(&b, &moved)? != base {
                return Err(format!("model {s}, re-encoding {k}: flags changed"));
            }
            compared += base.len();
        }
    }
    Ok(format!("{models} models x {maps} re-encodings, {compared} verdicts unchanged"))
}

pub fn solver_soundness() -> Outcome {
    let mut contexts = 0;
    for e in corpus_entries() {
        let Some(fx) = e.model else { continue };
        let b = Bridge::new(&fx.document);
        for ctx in b.oracle.contexts() {
            let sols = b.oracle.all_solutions(&ctx);
            let got = solve(b.m(), &b.context(&ctx));
            if sols.len() != 1 || sols[0] != got.as_slice() {
                return Err(format!("{} ctx {ctx:?}: {} solutions, solve gave {:?}", e.name, sols.len(), got.as_slice()));
            }
            contexts += 1;
        }
    }
    Ok(format!("{contexts} contexts, one solution each, equal to solve"))
}

const FRAGMENTS: &[&str] = &[
    "{", "}", "(", ")", "[", "]", ",", ":", ";", "=", "!=", "->", "<-", "&", "|", "!", "/", "-", "<", "model", "var",
    "exo", "outcome", "case", "when", "else", "utility", "default", "context", "version", "1", "0", "-7",
    "99999999999999999999", "x", "é", "\n", " ", "//", "#", "\"", "\t", "1/0", "2/1",
];

/// A malformed variant of `src` produced by a random edit.
pub fn mutate(src: &str, r: &mut impl Rng) -> String {
    let chars: Vec<char> = src.chars().collect();
    let n = chars.len().max(1);
    let at = r.gen_range(0..n);
    let to = (at + r.gen_range(1..20)).min(chars.len());
    let head: String = chars[..at.min(chars.len())].iter().collect();
    let tail: String = chars[to.max(at).min(chars.len())..].iter().collect();
    let frag = FRAGMENTS[r.gen_range(0..FRAGMENTS.len())];
    match r.gen_range(0..5) {
        0 => head,
        1 => format!("{head}{tail}"),
        2 => format!("{head}{frag}{}", chars[at.min(chars.len())..].iter().collect::<String>()),
        3 => format!("{head}{frag}{tail}"),
        _ => {
            let mid: String = chars[at.min(chars.len())..to.max(at).min(chars.len())].iter().collect();
            format!("{head}{mid}{mid}{tail}")
        }
    }
}

pub fn dsl_round_trip(cases: usize, seed: u64) -> Outcome {
    let entries = corpus_entries();
    let sources: Vec<String> = entries.iter().filter_map(|e| e.model.as_ref().map(|f| f.source.clone())).collect();
    for (e, src) in entries.iter().filter(|e| e.model.is_some()).zip(&sources) {
        let first = parse_model(src).map_err(|d| format!("{}: {d}", e.name))?;
        let text = serialize_model(&first);
        let second = parse_model(&text).map_err(|d| format!("{} reparse: {d}", e.name))?;
        if second != first || serialize_model(&second) != text {
            return Err(format!("{}: round trip changed the document", e.name));
        }
    }
    let mut r = rng(seed);
    let mut rejected = 0;
    let mut attempts = 0;
    while rejected < cases {
        attempts += 1;
        let base = &sources[r.gen_range(0..sources.len())];
        let mut src = mutate(base, &mut r);
        for _ in 0..r.gen_range(0..3) {
            src = mutate(&src, &mut r);
        }
        let result = catch_unwind(AssertUnwindSafe(|| parse_model(&src)));
        match result {
            Err(_) => return Err(format!("parser panicked on {src:?}")),
            Ok(Err(d)) => {
                if !d.span.is_valid_for(&src) {
                    return Err(format!("span {:?} invalid for {src:?}: {d}", d.span));
                }
                rejected += 1;
            }
            Ok(Ok(_)) => {}
        }
    }
    Ok(format!(
        "{} sources round-trip; {rejected} malformed inputs of {attempts} mutations, all spanned",
        sources.len()
    ))
}

pub fn agreement(models: u64, seed: u64) -> Outcome {
    let opts = SearchOptions::default();
    let mut agreeing = 0;
    let mut ties = 0;
    for s in seed..seed + models {
        let doc = random_doc(s, &GenConfig::TERNARY);
        let b = Bridge::new(&doc);
        let o = &b.oracle;
        let u = &o.utility;
        for ctx in o.contexts() {
            let context = b.context(&ctx);
            let setting = Setting::new(b.m(), &context);
            let actual = o.solve(&ctx, &[]);
            let out = actual[o.outcome];
            if u[out] >= o.default {
                continue;
            }
            for x in o.endogenous().into_iter().filter(|&x| x != o.outcome) {
                let event = b.event(&[(x, actual[x])]);
                for c in (0..o.range_len(x)).filter(|&c| c != actual[x]) {
                    let o2 = o.solve(&ctx, &[(x, c)])[o.outcome];
                    let v = assess_with_contrasts(&setting, &event, &[vec![c]], &opts).map_err(|e| e.to_string())?;
                    let comparative = u[out] < u[o2];
                    if u[out] != u[o2] {
                        if v.strictly_harms != comparative {
                            return Err(format!(
                                "model {s} ctx {ctx:?} {}={} vs {c}: strict {} comparative {comparative}",
                                o.name(x),
                                actual[x],
                                v.strictly_harms
                            ));
                        }
                        agreeing += 1;
                    } else if v.strictly_harms {
                        ties += 1;
                    }
                }
            }
        }
    }
    let sophie = corpus_entries()
        .into_iter()
        .find(|e| e.name == "sophies_choice")
        .and_then(|e| e.model)
        .ok_or("sophies_choice missing")?;
    let m = sophie.document.model();
    let setting = Setting::new(m, &sophie.context);
    let x = m.var("X").ok_or("sophies_choice has no X")?;
    let event = Event::single(x, setting.actual_value(x));
    let v = check_strict_harm(&setting, &event, &opts).map_err(|e| e.to_string())?;
    let cert = v.certificate.as_ref().ok_or("sophies_choice: no certificate")?;
    if !(v.strictly_harms && !v.counterfactually_harms && m.utility(cert.outcome) == m.utility(cert.counterfactual)) {
        return Err(format!("sophies_choice does not diverge as expected: {v:?}"));
    }
    Ok(format!(
        "{agreeing} contrasts agree where u(o) != u(o''); {ties} random ties diverge; sophies_choice diverges at a tie"
    ))
}
