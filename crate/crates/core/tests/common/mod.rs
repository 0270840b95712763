//! Independent brute-force reference implementation and random model generation.
//!
//! The oracle works from the authored equation bodies, not the compiled model:
//! it interprets expressions directly, solves by fixpoint iteration, and checks
//! causation by enumerating witness sets and their settings literally.

#![allow(dead_code)]

use std::collections::HashMap;

use causal_harm::dsl::ModelDocument;
use causal_harm::scm::{Arm, Body, Expr, ModelSpec, Role, Utility, Value, VariableSpec};
use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod criteria;

pub type Assign = Vec<usize>;

pub struct Oracle {
    names: Vec<String>,
    index: HashMap<String, usize>,
    ranges: Vec<Vec<Value>>,
    bodies: Vec<Option<Body>>,
    pub outcome: usize,
    pub utility: Vec<Utility>,
    pub default: Utility,
}

/// Verdict flags computed straight from the definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HarmFlags {
    pub harms: bool,
    pub strict: bool,
    pub counterfactual: bool,
    pub below_default: bool,
}

impl Oracle {
    pub fn new(spec: &ModelSpec) -> Self {
        let names: Vec<String> = spec.variables.iter().map(|v| v.name.clone()).collect();
        let index = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let ranges: Vec<Vec<Value>> = spec.variables.iter().map(|v| v.range.clone()).collect();
        let mut outcome = usize::MAX;
        let bodies = spec
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| match &v.role {
                Role::Exogenous => None,
                Role::Endogenous(b) => Some(b.clone()),
                Role::Outcome(b) => {
                    outcome = i;
                    Some(b.clone())
                }
            })
            .collect();
        let utility = ranges[outcome]
            .iter()
            .map(|v| spec.utility.iter().find(|(w, _)| w == v).unwrap().1)
            .collect();
        Oracle {
            names,
            index,
            ranges,
            bodies,
            outcome,
            utility,
            default: spec.default.unwrap(),
        }
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn var(&self, name: &str) -> usize {
        self.index[name]
    }

    pub fn range_len(&self, i: usize) -> usize {
        self.ranges[i].len()
    }

    pub fn endogenous(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&i| self.bodies[i].is_some()).collect()
    }

    pub fn exogenous(&self) -> Vec<usize> {
        (0..self.names.len()).filter(|&i| self.bodies[i].is_none()).collect()
    }

    fn pos(&self, var: usize, v: &Value) -> usize {
        self.ranges[var].iter().position(|w| w == v).unwrap()
    }

    fn holds(&self, e: &Expr, vals: &[usize]) -> bool {
        match e {
            Expr::Const(b) => *b,
            Expr::Truthy(n) => {
                let i = self.index[n];
                self.ranges[i][vals[i]] == Value::Int(1)
            }
            Expr::Is { var, value, negated } => {
                let i = self.index[var];
                (self.ranges[i][vals[i]] == *value) != *negated
            }
            Expr::Not(e) => !self.holds(e, vals),
            Expr::And(es) => es.iter().all(|e| self.holds(e, vals)),
            Expr::Or(es) => es.iter().any(|e| self.holds(e, vals)),
        }
    }

    /// `F_i` applied to a full assignment.
    pub fn equation(&self, i: usize, vals: &[usize]) -> usize {
        match self.bodies[i].as_ref().unwrap() {
            Body::Bool(e) => {
                let v = Value::Int(i64::from(self.holds(e, vals)));
                self.pos(i, &v)
            }
            Body::Case { arms, otherwise } => {
                let v = arms
                    .iter()
                    .find(|a| self.holds(&a.guard, vals))
                    .map(|a| &a.value)
                    .or(otherwise.as_ref())
                    .unwrap();
                self.pos(i, v)
            }
        }
    }

    fn satisfies(&self, vals: &[usize], ctx: &[(usize, usize)], overrides: &[(usize, usize)]) -> bool {
        ctx.iter().all(|(i, v)| vals[*i] == *v)
            && (0..self.names.len()).all(|i| match overrides.iter().find(|(o, _)| *o == i) {
                Some((_, v)) => vals[i] == *v,
                None => self.bodies[i].is_none() || self.equation(i, vals) == vals[i],
            })
    }

    /// Solution by repeated substitution until nothing changes.
    pub fn solve(&self, ctx: &[(usize, usize)], overrides: &[(usize, usize)]) -> Assign {
        let n = self.names.len();
        let mut vals = vec![0; n];
        for (i, v) in ctx.iter().chain(overrides) {
            vals[*i] = *v;
        }
        for _ in 0..=n {
            let mut changed = false;
            for i in 0..n {
                if self.bodies[i].is_none() || overrides.iter().any(|(o, _)| *o == i) {
                    continue;
                }
                let v = self.equation(i, &vals);
                if v != vals[i] {
                    vals[i] = v;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        assert!(self.satisfies(&vals, ctx, overrides), "fixpoint iteration did not converge");
        vals
    }

    /// Every full assignment consistent with the context and all equations.
    pub fn all_solutions(&self, ctx: &[(usize, usize)]) -> Vec<Assign> {
        (0..self.names.len())
            .map(|i| 0..self.ranges[i].len())
            .multi_cartesian_product()
            .filter(|vals| self.satisfies(vals, ctx, &[]))
            .collect()
    }

    /// Every context, first exogenous variable most significant.
    pub fn contexts(&self) -> Vec<Vec<(usize, usize)>> {
        let exo = self.exogenous();
        exo.iter()
            .map(|&i| (0..self.ranges[i].len()).map(move |v| (i, v)))
            .multi_cartesian_product()
            .collect()
    }

    /// AC2: some `W` disjoint from the event, with a setting `w` that holds
    /// actually, makes `phi2` true under `[X <- x', W <- w]`. Returns every such
    /// `W` (as sorted variable lists).
    fn ac2_sets(
        &self,
        ctx: &[(usize, usize)],
        vars: &[usize],
        contrast: &[usize],
        phi2: &dyn Fn(&[usize]) -> bool,
    ) -> Vec<Vec<usize>> {
        let actual = self.solve(ctx, &[]);
        let pool: Vec<usize> = self.endogenous().into_iter().filter(|v| !vars.contains(v)).collect();
        let mut out = Vec::new();
        for w in pool.iter().copied().powerset() {
            let settings: Vec<Vec<usize>> = w
                .iter()
                .map(|&i| 0..self.ranges[i].len())
                .multi_cartesian_product()
                .collect();
            let ok = settings.iter().any(|setting| {
                if w.iter().zip(setting).any(|(i, v)| actual[*i] != *v) {
                    return false;
                }
                let mut ov: Vec<(usize, usize)> = vars.iter().copied().zip(contrast.iter().copied()).collect();
                ov.extend(w.iter().copied().zip(setting.iter().copied()));
                phi2(&self.solve(ctx, &ov))
            });
            if ok {
                out.push(w);
            }
        }
        out
    }

    /// Contrastive cause; returns the first witness in (size, lexicographic)
    /// order when all three conditions hold.
    pub fn cause(
        &self,
        ctx: &[(usize, usize)],
        event: &[(usize, usize)],
        contrast: &[usize],
        phi: &dyn Fn(&[usize]) -> bool,
        phi2: &dyn Fn(&[usize]) -> bool,
    ) -> Option<Vec<usize>> {
        let actual = self.solve(ctx, &[]);
        if !(event.iter().all(|(i, v)| actual[*i] == *v) && phi(&actual)) {
            return None;
        }
        let vars: Vec<usize> = event.iter().map(|p| p.0).collect();
        let mut sets = self.ac2_sets(ctx, &vars, contrast, phi2);
        if sets.is_empty() {
            return None;
        }
        for k in 0..vars.len() {
            for sub in (0..vars.len()).combinations(k) {
                if sub.is_empty() {
                    continue;
                }
                let sv: Vec<usize> = sub.iter().map(|&j| vars[j]).collect();
                let sc: Vec<usize> = sub.iter().map(|&j| contrast[j]).collect();
                if !self.ac2_sets(ctx, &sv, &sc, phi2).is_empty() {
                    return None;
                }
            }
        }
        sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Some(sets.swap_remove(0))
    }

    fn outcome_is(&self, o: usize) -> impl Fn(&[usize]) -> bool {
        let out = self.outcome;
        move |s: &[usize]| s[out] == o
    }

    /// Every contrast for the event's variables other than the event itself.
    fn other_values(&self, event: &[(usize, usize)]) -> Vec<Vec<usize>> {
        event
            .iter()
            .map(|(i, _)| 0..self.ranges[*i].len())
            .multi_cartesian_product()
            .filter(|c| c.iter().zip(event).any(|(a, (_, b))| a != b))
            .collect()
    }

    pub fn harm(&self, ctx: &[(usize, usize)], event: &[(usize, usize)]) -> HarmFlags {
        let actual = self.solve(ctx, &[]);
        let o = actual[self.outcome];
        let u = &self.utility;
        let holds = event.iter().all(|(i, v)| actual[*i] == *v);
        let h1 = u[o] < self.default;
        let vars: Vec<usize> = event.iter().map(|p| p.0).collect();
        let counterfactual_outcome = |c: &[usize]| {
            let ov: Vec<(usize, usize)> = vars.iter().copied().zip(c.iter().copied()).collect();
            self.solve(ctx, &ov)[self.outcome]
        };
        let mut harms = false;
        let mut strict = false;
        let mut below = false;
        for c in self.other_values(event) {
            let o2 = counterfactual_outcome(&c);
            for alt in 0..u.len() {
                if u[alt] <= u[o] {
                    continue;
                }
                if self
                    .cause(ctx, event, &c, &self.outcome_is(o), &self.outcome_is(alt))
                    .is_some()
                {
                    harms = true;
                    strict |= u[o] <= u[o2];
                    below |= self.default <= u[alt];
                }
            }
        }
        let counterfactual = holds
            && event
                .iter()
                .map(|(i, _)| 0..self.ranges[*i].len())
                .multi_cartesian_product()
                .any(|c| u[o] < u[counterfactual_outcome(&c)]);
        HarmFlags {
            harms: h1 && harms,
            strict: h1 && strict,
            counterfactual,
            below_default: h1 && below,
        }
    }

    /// Non-contrastive cause of a singleton event: AC1 plus some `x'` and
    /// witness under which `phi` fails. Minimality is automatic for one conjunct.
    pub fn standard_cause(&self, ctx: &[(usize, usize)], x: (usize, usize), phi: &dyn Fn(&[usize]) -> bool) -> bool {
        let actual = self.solve(ctx, &[]);
        if actual[x.0] != x.1 || !phi(&actual) {
            return false;
        }
        (0..self.ranges[x.0].len())
            .filter(|&v| v != x.1)
            .any(|v| !self.ac2_sets(ctx, &[x.0], &[v], &|s| !phi(s)).is_empty())
    }

    /// Whether some contrast and some conjunction `phi'` over the variables of
    /// the conjunctive effect `phi`, exclusive with it, yields a contrastive cause.
    pub fn contrastive_exists(
        &self,
        ctx: &[(usize, usize)],
        event: &[(usize, usize)],
        phi: &[(usize, usize)],
    ) -> bool {
        let phi_vars: Vec<usize> = phi.iter().map(|p| p.0).sorted().dedup().collect();
        let holds = |conj: &[(usize, usize)], s: &[usize]| conj.iter().all(|(i, v)| s[*i] == *v);
        let mut candidates = Vec::new();
        for sub in phi_vars.iter().copied().powerset().filter(|s| !s.is_empty()) {
            for vals in sub.iter().map(|&i| 0..self.ranges[i].len()).multi_cartesian_product() {
                let conj: Vec<(usize, usize)> = sub.iter().copied().zip(vals).collect();
                // exclusive: no assignment of the mentioned variables satisfies both
                let exclusive = phi_vars
                    .iter()
                    .map(|&i| 0..self.ranges[i].len())
                    .multi_cartesian_product()
                    .all(|vs| {
                        let mut s = vec![0; self.names.len()];
                        for (i, v) in phi_vars.iter().zip(vs) {
                            s[*i] = v;
                        }
                        !(holds(&conj, &s) && holds(phi, &s))
                    });
                if exclusive {
                    candidates.push(conj);
                }
            }
        }
        self.other_values(event).iter().any(|c| {
            candidates.iter().any(|conj| {
                self.cause(ctx, event, c, &|s| holds(phi, s), &|s| holds(conj, s))
                    .is_some()
            })
        })
    }
}

/// Shape of randomly generated models.
#[derive(Debug, Clone, Copy)]
pub struct GenConfig {
    pub max_exogenous: usize,
    /// Endogenous variables including the outcome.
    pub max_endogenous: usize,
    pub max_range: usize,
    pub max_parents: usize,
}

impl GenConfig {
    pub const BINARY: GenConfig = GenConfig {
        max_exogenous: 2,
        max_endogenous: 4,
        max_range: 2,
        max_parents: 3,
    };

    pub const TERNARY: GenConfig = GenConfig {
        max_exogenous: 2,
        max_endogenous: 4,
        max_range: 3,
        max_parents: 2,
    };
}

const UTILITY_GRID: [(i64, i64); 5] = [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)];

fn grid_value(rng: &mut ChaCha8Rng) -> Utility {
    let (n, d) = UTILITY_GRID[rng.gen_range(0..UTILITY_GRID.len())];
    Utility::new(n, d)
}

/// A random acyclic model whose equations are truth tables over earlier variables.
pub fn random_spec(seed: u64, cfg: &GenConfig) -> ModelSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_exo = rng.gen_range(1..=cfg.max_exogenous);
    let n_endo = rng.gen_range(2..=cfg.max_endogenous);
    let range = |rng: &mut ChaCha8Rng| -> Vec<Value> {
        let k = rng.gen_range(2..=cfg.max_range);
        (0..k as i64).map(Value::Int).collect()
    };
    let mut vars: Vec<VariableSpec> = Vec::new();
    for i in 0..n_exo {
        let r = range(&mut rng);
        vars.push(VariableSpec::exogenous(format!("U{i}"), r));
    }
    for j in 0..n_endo {
        let is_outcome = j == n_endo - 1;
        let name = if is_outcome { "O".to_string() } else { format!("V{j}") };
        let r = range(&mut rng);
        let mut earlier: Vec<usize> = (0..vars.len()).collect();
        earlier.shuffle(&mut rng);
        let k = rng.gen_range(1..=cfg.max_parents.min(earlier.len()));
        let mut parents: Vec<usize> = earlier[..k].to_vec();
        parents.sort_unstable();
        let rows: Vec<Vec<usize>> = parents
            .iter()
            .map(|&p| 0..vars[p].range.len())
            .multi_cartesian_product()
            .collect();
        let mut arms: Vec<Arm> = rows
            .iter()
            .map(|row| {
                let mut conj: Vec<Expr> = parents
                    .iter()
                    .zip(row)
                    .map(|(&p, &v)| Expr::is(vars[p].name.clone(), vars[p].range[v].clone()))
                    .collect();
                let guard = if conj.len() == 1 { conj.pop().unwrap() } else { Expr::And(conj) };
                Arm {
                    guard,
                    value: r[rng.gen_range(0..r.len())].clone(),
                }
            })
            .collect();
        let last = arms.pop().unwrap();
        let body = Body::Case {
            arms,
            otherwise: Some(last.value),
        };
        vars.push(if is_outcome {
            VariableSpec::outcome(name, r, body)
        } else {
            VariableSpec::endogenous(name, r, body)
        });
    }
    let out_range = vars.last().unwrap().range.clone();
    let utility = out_range.into_iter().map(|v| (v, grid_value(&mut rng))).collect();
    let default = grid_value(&mut rng);
    ModelSpec {
        name: format!("random_{seed}"),
        variables: vars,
        utility,
        default: Some(default),
    }
}

pub fn random_doc(seed: u64, cfg: &GenConfig) -> ModelDocument {
    ModelDocument::new(random_spec(seed, cfg), Vec::new()).expect("generated models are valid")
}

/// A strictly increasing map on `[0, 1]` rationals, as a sorted table of
/// images for the utility grid.
pub fn random_monotone(rng: &mut ChaCha8Rng) -> impl Fn(Utility) -> Utility {
    let mut points: Vec<Utility> = Vec::new();
    while points.len() < UTILITY_GRID.len() {
        let d = rng.gen_range(2..=60);
        let p = Utility::new(rng.gen_range(0..=d), d);
        if !points.contains(&p) {
            points.push(p);
        }
    }
    points.sort();
    let grid: Vec<Utility> = UTILITY_GRID.iter().map(|&(n, d)| Utility::new(n, d)).collect();
    move |u: Utility| points[grid.iter().position(|g| *g == u).expect("utility from the grid")]
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
