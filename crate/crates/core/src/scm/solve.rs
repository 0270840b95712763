use std::collections::BTreeMap;
use std::fmt;

use super::model::{Mechanism, Model, ModelError, VarId, VarKind};
use super::value::Value;

/// Full assignment to the exogenous variables of one model.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Context {
    values: BTreeMap<VarId, usize>,
}

impl Context {
    /// Builds a context from `(name, value)` pairs; every exogenous variable must appear once.
    pub fn from_pairs<'a, I>(m: &Model, pairs: I) -> Result<Context, ModelError>
    where
        I: IntoIterator<Item = (&'a str, Value)>,
    {
        let mut values = BTreeMap::new();
        for (name, value) in pairs {
            let id = m.var(name).ok_or_else(|| ModelError::UndefinedVariable {
                name: name.to_string(),
                site: "the context".into(),
            })?;
            if m.variable(id).kind != VarKind::Exogenous {
                return Err(ModelError::NotExogenous(name.to_string()));
            }
            let idx = m.value_index(id, &value).ok_or_else(|| ModelError::ValueOutOfRange {
                variable: name.to_string(),
                value: value.to_string(),
            })?;
            if values.insert(id, idx).is_some() {
                return Err(ModelError::DuplicateAssignment(name.to_string()));
            }
        }
        Self::from_indices(m, values)
    }

    pub fn from_indices(m: &Model, values: BTreeMap<VarId, usize>) -> Result<Context, ModelError> {
        for (id, idx) in &values {
            if m.variable(*id).kind != VarKind::Exogenous {
                return Err(ModelError::NotExogenous(m.variable(*id).name.clone()));
            }
            if *idx >= m.range_len(*id) {
                return Err(ModelError::ValueOutOfRange {
                    variable: m.variable(*id).name.clone(),
                    value: format!("#{idx}"),
                });
            }
        }
        if let Some(missing) = m.exogenous().find(|id| !values.contains_key(id)) {
            return Err(ModelError::MissingContextValue(m.variable(missing).name.clone()));
        }
        Ok(Context { values })
    }

    /// Every context of `m`, exogenous variables varying in declaration order
    /// with the last one fastest.
    pub fn all(m: &Model) -> Vec<Context> {
        let exo: Vec<VarId> = m.exogenous().collect();
        let mut out = vec![BTreeMap::new()];
        for id in exo {
            out = out
                .into_iter()
                .flat_map(|partial| {
                    (0..m.range_len(id)).map(move |v| {
                        let mut next = partial.clone();
                        next.insert(id, v);
                        next
                    })
                })
                .collect();
        }
        out.into_iter().map(|values| Context { values }).collect()
    }

    pub fn get(&self, id: VarId) -> Option<usize> {
        self.values.get(&id).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.values.iter().map(|(k, v)| (*k, *v))
    }
}

/// Values of every variable, indexed by [`VarId`], as range positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Assignment {
    values: Vec<usize>,
}

impl Assignment {
    pub fn get(&self, id: VarId) -> usize {
        self.values[id.index()]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.values
    }

    pub fn value<'m>(&self, m: &'m Model, id: VarId) -> &'m Value {
        m.value(id, self.get(id))
    }

    /// `NAME=value` pairs for the endogenous variables in topological order.
    pub fn display<'a>(&'a self, m: &'a Model) -> impl fmt::Display + 'a {
        DisplayAssignment { a: self, m }
    }
}

struct DisplayAssignment<'a> {
    a: &'a Assignment,
    m: &'a Model,
}

impl fmt::Display for DisplayAssignment<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for &id in self.m.topological_order() {
            if !self.m.is_endogenous(id) {
                continue;
            }
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}={}", self.m.variable(id).name, self.a.value(self.m, id))?;
        }
        Ok(())
    }
}

/// `[X1 <- x1, ..., Xk <- xk]` over endogenous variables; at least one target.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Intervention {
    targets: BTreeMap<VarId, usize>,
}

impl Intervention {
    pub fn new(m: &Model, targets: impl IntoIterator<Item = (VarId, usize)>) -> Result<Self, ModelError> {
        let mut map = BTreeMap::new();
        for (id, v) in targets {
            let var = m.variable(id);
            if var.kind != VarKind::Endogenous {
                return Err(ModelError::NotEndogenous(var.name.clone()));
            }
            if v >= var.range.len() {
                return Err(ModelError::ValueOutOfRange {
                    variable: var.name.clone(),
                    value: format!("#{v}"),
                });
            }
            if map.insert(id, v).is_some() {
                return Err(ModelError::DuplicateAssignment(var.name.clone()));
            }
        }
        if map.is_empty() {
            return Err(ModelError::EmptyIntervention);
        }
        Ok(Intervention { targets: map })
    }

    pub fn targets(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.targets.iter().map(|(k, v)| (*k, *v))
    }

    pub fn get(&self, id: VarId) -> Option<usize> {
        self.targets.get(&id).copied()
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Union with `other`; `other` wins on shared targets.
    pub fn merged(&self, other: &Intervention) -> Intervention {
        let mut targets = self.targets.clone();
        targets.extend(other.targets.iter().map(|(k, v)| (*k, *v)));
        Intervention { targets }
    }
}

/// The unique solution of `m` under `ctx`.
pub fn solve(m: &Model, ctx: &Context) -> Assignment {
    Assignment {
        values: solve_with(m, ctx, &[]),
    }
}

/// Solves with `overrides` standing in for the listed variables' equations.
pub(crate) fn solve_with(m: &Model, ctx: &Context, overrides: &[(VarId, usize)]) -> Vec<usize> {
    let mut values = vec![0usize; m.variables().len()];
    for &id in m.topological_order() {
        let i = id.index();
        if let Some((_, v)) = overrides.iter().find(|(o, _)| *o == id) {
            values[i] = *v;
            continue;
        }
        values[i] = match &m.mechanisms[i] {
            Mechanism::Exogenous => ctx.get(id).expect("context covers every exogenous variable"),
            Mechanism::Table { table, .. } => table.lookup(&values),
            Mechanism::Constant(v) => *v,
        };
    }
    values
}

/// `M_{X <- x}`: the targets' equations replaced by constants.
pub fn intervene(m: &Model, iv: &Intervention) -> Model {
    let mut out = m.clone();
    for (id, v) in iv.targets() {
        out.mechanisms[id.index()] = Mechanism::Constant(v);
    }
    out
}

/// Solves `m` under `ctx` with `iv` applied, without materialising `M_{X <- x}`.
pub fn solve_intervened(m: &Model, ctx: &Context, iv: &Intervention) -> Assignment {
    let overrides: Vec<(VarId, usize)> = iv.targets().collect();
    Assignment {
        values: solve_with(m, ctx, &overrides),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixture;
    use crate::dsl::parse_model;

    fn named(m: &Model, a: &Assignment) -> String {
        a.display(m).to_string()
    }

    fn iv(m: &Model, targets: &[(&str, i64)]) -> Intervention {
        Intervention::new(
            m,
            targets.iter().map(|(n, v)| {
                let id = m.var(n).unwrap();
                (id, m.value_index(id, &Value::Int(*v)).unwrap())
            }),
        )
        .unwrap()
    }

    #[test]
    fn late_preemption_solution() {
        let doc = fixture("late_preemption");
        let m = doc.model();
        let a = solve(m, &doc.context("main").unwrap());
        assert_eq!(named(m, &a), "H=1 C=1 S=1 K=0 D=1 O=dead");
    }

    #[test]
    fn autonomous_car_solution() {
        let doc = fixture("autonomous_car_2");
        let m = doc.model();
        let a = solve(m, &doc.context("main").unwrap());
        assert_eq!(named(m, &a), "F=1 FH=1 CH=0 O=half");
    }

    #[test]
    fn identity_equation() {
        let doc = parse_model(
            "model m { exo U : {0, 1}; outcome X : {0, 1} = U; utility { 0: 0, 1: 1 }; default 0; } context z { U = 0 }",
        )
        .unwrap();
        let m = doc.model();
        let a = solve(m, &doc.context("z").unwrap());
        assert_eq!(a.as_slice(), &[0, 0]);
    }

    #[test]
    fn interventions_on_late_preemption() {
        let doc = fixture("late_preemption");
        let m = doc.model();
        let ctx = doc.context("main").unwrap();
        let a = solve(&intervene(m, &iv(m, &[("H", 0)])), &ctx);
        assert_eq!(named(m, &a), "H=0 C=1 S=0 K=1 D=1 O=dead");
        let b = solve_intervened(m, &ctx, &iv(m, &[("H", 0), ("K", 0)]));
        assert_eq!(b.value(m, m.var("D").unwrap()), &Value::Int(0));
    }

    #[test]
    fn no_op_intervention() {
        let doc = fixture("late_preemption");
        let m = doc.model();
        let ctx = doc.context("main").unwrap();
        assert_eq!(solve_intervened(m, &ctx, &iv(m, &[("S", 1)])), solve(m, &ctx));
    }

    #[test]
    fn intervened_model_keeps_utilities() {
        let doc = fixture("late_preemption");
        let m = doc.model();
        let n = intervene(m, &iv(m, &[("H", 0)]));
        assert_eq!(n.utilities(), m.utilities());
        assert_eq!(n.default_utility(), m.default_utility());
        assert_eq!(n.outcome(), m.outcome());
        assert!(n.parents(m.var("H").unwrap()).is_empty());
    }

    #[test]
    fn composition_of_disjoint_interventions() {
        let doc = fixture("late_preemption");
        let m = doc.model();
        let a = iv(m, &[("H", 0)]);
        let b = iv(m, &[("K", 0)]);
        let twice = intervene(&intervene(m, &a), &b);
        let once = intervene(m, &a.merged(&b));
        for ctx in Context::all(m) {
            assert_eq!(solve(&twice, &ctx), solve(&once, &ctx));
        }
    }

    #[test]
    fn context_validation() {
        let doc = fixture("late_preemption");
        let m = doc.model();
        let one = || Value::Int(1);
        assert_eq!(
            Context::from_pairs(m, [("UH", one())]).unwrap_err(),
            ModelError::MissingContextValue("UC".into())
        );
        assert_eq!(
            Context::from_pairs(m, [("UH", one()), ("UC", one()), ("UH", one())]).unwrap_err(),
            ModelError::DuplicateAssignment("UH".into())
        );
        assert_eq!(
            Context::from_pairs(m, [("H", one())]).unwrap_err(),
            ModelError::NotExogenous("H".into())
        );
        assert!(matches!(
            Context::from_pairs(m, [("UH", Value::Int(5)), ("UC", one())]),
            Err(ModelError::ValueOutOfRange { .. })
        ));
        assert_eq!(Context::all(m).len(), 4);
    }

    #[test]
    fn intervention_validation() {
        let doc = fixture("late_preemption");
        let m = doc.model();
        let uh = m.var("UH").unwrap();
        let h = m.var("H").unwrap();
        assert_eq!(Intervention::new(m, [(uh, 0)]).unwrap_err(), ModelError::NotEndogenous("UH".into()));
        assert_eq!(Intervention::new(m, []).unwrap_err(), ModelError::EmptyIntervention);
        assert!(Intervention::new(m, [(h, 2)]).is_err());
        assert_eq!(
            Intervention::new(m, [(h, 0), (h, 1)]).unwrap_err(),
            ModelError::DuplicateAssignment("H".into())
        );
    }
}
