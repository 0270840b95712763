use std::collections::{BinaryHeap, HashMap};
use std::cmp::Reverse;

use num_traits::{One, Zero};
use thiserror::Error;

use super::expr::{Arm, Body, Compiled, Expr};
use super::value::{format_rational, Utility, Value};

/// Index of a variable within its model, in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarKind {
    Exogenous,
    Endogenous,
}

/// Ordered, duplicate-free, nonempty list of values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Range(Vec<Value>);

impl Range {
    pub fn values(&self) -> &[Value] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn position(&self, v: &Value) -> Option<usize> {
        self.0.iter().position(|x| x == v)
    }

    pub fn get(&self, idx: usize) -> &Value {
        &self.0[idx]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub range: Range,
}

/// How a declared variable gets its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Role {
    Exogenous,
    Endogenous(Body),
    /// The designated outcome variable; endogenous.
    Outcome(Body),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSpec {
    pub name: String,
    pub range: Vec<Value>,
    pub role: Role,
}

impl VariableSpec {
    pub fn exogenous(name: impl Into<String>, range: Vec<Value>) -> Self {
        VariableSpec {
            name: name.into(),
            range,
            role: Role::Exogenous,
        }
    }

    pub fn endogenous(name: impl Into<String>, range: Vec<Value>, body: Body) -> Self {
        VariableSpec {
            name: name.into(),
            range,
            role: Role::Endogenous(body),
        }
    }

    pub fn outcome(name: impl Into<String>, range: Vec<Value>, body: Body) -> Self {
        VariableSpec {
            name: name.into(),
            range,
            role: Role::Outcome(body),
        }
    }
}

/// Raw declarations a [`Model`] is built from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ModelSpec {
    pub name: String,
    pub variables: Vec<VariableSpec>,
    pub utility: Vec<(Value, Utility)>,
    pub default: Option<Utility>,
}

/// Size limits enforced by [`build_model_with_limits`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_endogenous: usize,
    pub max_range: usize,
    /// Largest lookup table a single equation may compile to.
    pub max_table: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_endogenous: 16,
            max_range: 8,
            max_table: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("variable `{0}` is declared more than once")]
    DuplicateVariable(String),
    #[error("`{name}` is not a declared variable (referenced by {site})")]
    UndefinedVariable { name: String, site: String },
    #[error("equation for `{0}` does not cover every assignment of its inputs")]
    EquationNotTotal(String),
    #[error("value `{value}` is not in the range of `{variable}`")]
    ValueOutOfRange { variable: String, value: String },
    #[error("dependency cycle: {}", .0.join(" -> "))]
    CyclicModel(Vec<String>),
    #[error("utility table has no entry for outcome value `{0}`")]
    UtilityIncomplete(String),
    #[error("utility table lists outcome value `{0}` twice")]
    DuplicateUtility(String),
    #[error("utility of `{value}` is {utility}, outside [0, 1]")]
    UtilityOutOfRange { value: String, utility: String },
    #[error("default utility {0} is outside [0, 1]")]
    DefaultOutOfRange(String),
    #[error("model has no default utility")]
    MissingDefault,
    #[error("model has no outcome variable")]
    MissingOutcome,
    #[error("`{0}` is a second outcome variable; exactly one is allowed")]
    DuplicateOutcome(String),
    #[error("range of `{0}` is empty")]
    EmptyRange(String),
    #[error("range of `{variable}` lists `{value}` twice")]
    DuplicateValue { variable: String, value: String },
    #[error("{what} is {actual}, limit is {limit}")]
    LimitExceeded {
        what: String,
        limit: usize,
        actual: usize,
    },
    #[error("`{0}` is not an exogenous variable")]
    NotExogenous(String),
    #[error("`{0}` is not an endogenous variable")]
    NotEndogenous(String),
    #[error("context gives no value for `{0}`")]
    MissingContextValue(String),
    #[error("`{0}` is assigned more than once")]
    DuplicateAssignment(String),
    #[error("an intervention needs at least one target")]
    EmptyIntervention,
}

/// Dense lookup table over the variables an equation actually depends on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Table {
    pub(crate) parents: Vec<usize>,
    /// Range size of each parent; the first parent is the most significant digit.
    radices: Vec<usize>,
    entries: Vec<u8>,
}

impl Table {
    #[inline]
    pub(crate) fn lookup(&self, values: &[usize]) -> usize {
        let mut idx = 0;
        for (p, r) in self.parents.iter().zip(&self.radices) {
            idx = idx * r + values[*p];
        }
        self.entries[idx] as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Mechanism {
    Exogenous,
    Table { table: Table, source: Body },
    /// Equation replaced by an intervention.
    Constant(usize),
}

/// A validated, acyclic causal utility model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    name: String,
    vars: Vec<Variable>,
    pub(crate) mechanisms: Vec<Mechanism>,
    outcome: VarId,
    utility: Vec<Utility>,
    default: Utility,
    /// Every variable, parents before children, ties broken by declaration order.
    topo: Vec<VarId>,
    index: HashMap<String, VarId>,
    warnings: Vec<String>,
}

pub fn build_model(spec: &ModelSpec) -> Result<Model, ModelError> {
    build_model_with_limits(spec, &Limits::default())
}

pub fn build_model_with_limits(spec: &ModelSpec, limits: &Limits) -> Result<Model, ModelError> {
    let mut index = HashMap::new();
    let mut vars = Vec::with_capacity(spec.variables.len());
    let mut outcome = None;
    for (i, decl) in spec.variables.iter().enumerate() {
        if index.insert(decl.name.clone(), VarId(i)).is_some() {
            return Err(ModelError::DuplicateVariable(decl.name.clone()));
        }
        if decl.range.is_empty() {
            return Err(ModelError::EmptyRange(decl.name.clone()));
        }
        for (j, v) in decl.range.iter().enumerate() {
            if decl.range[..j].contains(v) {
                return Err(ModelError::DuplicateValue {
                    variable: decl.name.clone(),
                    value: v.to_string(),
                });
            }
        }
        // table entries are stored as bytes
        let max_range = limits.max_range.min(256);
        if decl.range.len() > max_range {
            return Err(ModelError::LimitExceeded {
                what: format!("range size of `{}`", decl.name),
                limit: max_range,
                actual: decl.range.len(),
            });
        }
        let kind = match decl.role {
            Role::Exogenous => VarKind::Exogenous,
            Role::Endogenous(_) => VarKind::Endogenous,
            Role::Outcome(_) => {
                if outcome.is_some() {
                    return Err(ModelError::DuplicateOutcome(decl.name.clone()));
                }
                outcome = Some(VarId(i));
                VarKind::Endogenous
            }
        };
        vars.push(Variable {
            name: decl.name.clone(),
            kind,
            range: Range(decl.range.clone()),
        });
    }
    let outcome = outcome.ok_or(ModelError::MissingOutcome)?;
    let endogenous = vars.iter().filter(|v| v.kind == VarKind::Endogenous).count();
    if endogenous > limits.max_endogenous {
        return Err(ModelError::LimitExceeded {
            what: "number of endogenous variables".into(),
            limit: limits.max_endogenous,
            actual: endogenous,
        });
    }

    let mut mechanisms = Vec::with_capacity(vars.len());
    for (i, decl) in spec.variables.iter().enumerate() {
        let mech = match &decl.role {
            Role::Exogenous => Mechanism::Exogenous,
            Role::Endogenous(body) | Role::Outcome(body) => Mechanism::Table {
                table: compile_equation(i, body, &vars, &index, limits)?,
                source: body.clone(),
            },
        };
        mechanisms.push(mech);
    }

    let topo = topological_order(&vars, &mechanisms)?;

    let outcome_range = &vars[outcome.0].range;
    let mut utility: Vec<Option<Utility>> = vec![None; outcome_range.len()];
    for (value, u) in &spec.utility {
        let pos = outcome_range
            .position(value)
            .ok_or_else(|| ModelError::ValueOutOfRange {
                variable: vars[outcome.0].name.clone(),
                value: value.to_string(),
            })?;
        if utility[pos].is_some() {
            return Err(ModelError::DuplicateUtility(value.to_string()));
        }
        if !in_unit_interval(u) {
            return Err(ModelError::UtilityOutOfRange {
                value: value.to_string(),
                utility: format_rational(u),
            });
        }
        utility[pos] = Some(*u);
    }
    let utility = utility
        .into_iter()
        .enumerate()
        .map(|(i, u)| u.ok_or_else(|| ModelError::UtilityIncomplete(outcome_range.get(i).to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let default = spec.default.ok_or(ModelError::MissingDefault)?;
    if !in_unit_interval(&default) {
        return Err(ModelError::DefaultOutOfRange(format_rational(&default)));
    }

    let mut read = vec![false; vars.len()];
    for m in &mechanisms {
        if let Mechanism::Table { table, .. } = m {
            table.parents.iter().for_each(|p| read[*p] = true);
        }
    }
    let warnings = vars
        .iter()
        .enumerate()
        .filter(|(i, v)| v.kind == VarKind::Exogenous && !read[*i])
        .map(|(_, v)| format!("exogenous variable `{}` is not read by any equation", v.name))
        .collect();

    Ok(Model {
        name: spec.name.clone(),
        vars,
        mechanisms,
        outcome,
        utility,
        default,
        topo,
        index,
        warnings,
    })
}

fn in_unit_interval(r: &Utility) -> bool {
    *r >= Utility::zero() && *r <= Utility::one()
}

fn compile_expr(
    e: &Expr,
    target: usize,
    vars: &[Variable],
    index: &HashMap<String, VarId>,
) -> Result<Compiled, ModelError> {
    let resolve = |name: &str| -> Result<usize, ModelError> {
        let id = index.get(name).ok_or_else(|| ModelError::UndefinedVariable {
            name: name.to_string(),
            site: format!("the equation for `{}`", vars[target].name),
        })?;
        if id.0 == target {
            return Err(ModelError::CyclicModel(vec![
                vars[target].name.clone(),
                vars[target].name.clone(),
            ]));
        }
        Ok(id.0)
    };
    let value_of = |var: usize, value: &Value| -> Result<usize, ModelError> {
        vars[var]
            .range
            .position(value)
            .ok_or_else(|| ModelError::ValueOutOfRange {
                variable: vars[var].name.clone(),
                value: value.to_string(),
            })
    };
    Ok(match e {
        Expr::Const(b) => Compiled::Const(*b),
        Expr::Truthy(name) => {
            let var = resolve(name)?;
            Compiled::Is {
                var,
                value: value_of(var, &Value::Int(1))?,
                negated: false,
            }
        }
        Expr::Is { var, value, negated } => {
            let var = resolve(var)?;
            Compiled::Is {
                var,
                value: value_of(var, value)?,
                negated: *negated,
            }
        }
        Expr::Not(inner) => Compiled::Not(Box::new(compile_expr(inner, target, vars, index)?)),
        Expr::And(es) => Compiled::And(
            es.iter()
                .map(|e| compile_expr(e, target, vars, index))
                .collect::<Result<_, _>>()?,
        ),
        Expr::Or(es) => Compiled::Or(
            es.iter()
                .map(|e| compile_expr(e, target, vars, index))
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn compile_equation(
    target: usize,
    body: &Body,
    vars: &[Variable],
    index: &HashMap<String, VarId>,
    limits: &Limits,
) -> Result<Table, ModelError> {
    let target_range = &vars[target].range;
    let out_of_range = |v: &Value| ModelError::ValueOutOfRange {
        variable: vars[target].name.clone(),
        value: v.to_string(),
    };
    enum Eval {
        Bool(Compiled, usize, usize),
        Case(Vec<(Compiled, usize)>, Option<usize>),
    }
    let eval = match body {
        Body::Bool(e) => {
            let c = compile_expr(e, target, vars, index)?;
            let one = Value::Int(1);
            let zero = Value::Int(0);
            // Only demand 0/1 in range when the body can actually produce them.
            let t = target_range.position(&one);
            let f = target_range.position(&zero);
            Eval::Bool(c, t.unwrap_or(usize::MAX), f.unwrap_or(usize::MAX))
        }
        Body::Case { arms, otherwise } => {
            let mut compiled = Vec::with_capacity(arms.len());
            for Arm { guard, value } in arms {
                let c = compile_expr(guard, target, vars, index)?;
                let v = target_range.position(value).ok_or_else(|| out_of_range(value))?;
                compiled.push((c, v));
            }
            let other = match otherwise {
                Some(v) => Some(target_range.position(v).ok_or_else(|| out_of_range(v))?),
                None => None,
            };
            Eval::Case(compiled, other)
        }
    };

    let mut refs: Vec<usize> = body
        .referenced()
        .iter()
        .map(|n| index[n].0)
        .collect();
    refs.sort_unstable();
    let radices: Vec<usize> = refs.iter().map(|r| vars[*r].range.len()).collect();
    let size = radices
        .iter()
        .try_fold(1usize, |acc, r| acc.checked_mul(*r).filter(|n| *n <= limits.max_table))
        .ok_or_else(|| ModelError::LimitExceeded {
            what: format!("lookup table size for `{}`", vars[target].name),
            limit: limits.max_table,
            actual: radices.iter().fold(1usize, |a, r| a.saturating_mul(*r)),
        })?;

    let mut values = vec![0usize; vars.len()];
    let mut full = Vec::with_capacity(size);
    for flat in 0..size {
        let mut rest = flat;
        for (k, r) in refs.iter().zip(&radices).rev() {
            values[*k] = rest % r;
            rest /= r;
        }
        let out = match &eval {
            Eval::Bool(c, t, f) => {
                let (pos, v) = if c.eval(&values) { (*t, 1) } else { (*f, 0) };
                if pos == usize::MAX {
                    return Err(out_of_range(&Value::Int(v)));
                }
                pos
            }
            Eval::Case(arms, other) => arms
                .iter()
                .find(|(g, _)| g.eval(&values))
                .map(|(_, v)| *v)
                .or(*other)
                .ok_or_else(|| ModelError::EquationNotTotal(vars[target].name.clone()))?,
        };
        full.push(out as u8);
    }

    // Keep only inputs that can change the output for some setting of the others.
    let strides: Vec<usize> = (0..refs.len())
        .map(|k| radices[k + 1..].iter().product())
        .collect();
    let relevant: Vec<usize> = (0..refs.len())
        .filter(|&k| {
            (0..size).any(|flat| {
                let digit = (flat / strides[k]) % radices[k];
                digit == 0
                    && (1..radices[k]).any(|d| full[flat + d * strides[k]] != full[flat])
            })
        })
        .collect();
    let parents: Vec<usize> = relevant.iter().map(|&k| refs[k]).collect();
    let p_radices: Vec<usize> = relevant.iter().map(|&k| radices[k]).collect();
    let p_size: usize = p_radices.iter().product();
    let mut entries = Vec::with_capacity(p_size);
    for flat in 0..p_size {
        let mut rest = flat;
        let mut src = 0;
        for (k, r) in relevant.iter().zip(&p_radices).rev() {
            src += (rest % r) * strides[*k];
            rest /= r;
        }
        entries.push(full[src]);
    }
    Ok(Table {
        parents,
        radices: p_radices,
        entries,
    })
}

fn topological_order(vars: &[Variable], mechanisms: &[Mechanism]) -> Result<Vec<VarId>, ModelError> {
    let n = vars.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for (child, m) in mechanisms.iter().enumerate() {
        if let Mechanism::Table { table, .. } = m {
            for &p in &table.parents {
                children[p].push(child);
                indegree[child] += 1;
            }
        }
    }
    let mut ready: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&i| indegree[i] == 0).map(Reverse).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse(v)) = ready.pop() {
        order.push(VarId(v));
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(Reverse(c));
            }
        }
    }
    if order.len() < n {
        return Err(ModelError::CyclicModel(find_cycle(vars, mechanisms, &indegree)));
    }
    Ok(order)
}

/// Walks parent links among the variables left over by Kahn's algorithm.
fn find_cycle(vars: &[Variable], mechanisms: &[Mechanism], indegree: &[usize]) -> Vec<String> {
    let stuck = |i: usize| indegree[i] > 0;
    let parent_in_cycle = |i: usize| -> usize {
        match &mechanisms[i] {
            Mechanism::Table { table, .. } => *table.parents.iter().find(|&&p| stuck(p)).unwrap(),
            _ => unreachable!("only equations can sit on a cycle"),
        }
    };
    let start = (0..vars.len()).find(|&i| stuck(i)).unwrap();
    let mut seen = Vec::new();
    let mut cur = start;
    while !seen.contains(&cur) {
        seen.push(cur);
        cur = parent_in_cycle(cur);
    }
    let from = seen.iter().position(|&v| v == cur).unwrap();
    let mut cycle: Vec<usize> = seen[from..].to_vec();
    // parent links run against the edges
    cycle.reverse();
    cycle.push(cycle[0]);
    cycle.into_iter().map(|i| vars[i].name.clone()).collect()
}

impl Model {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = VarId> + '_ {
        (0..self.vars.len()).map(VarId)
    }

    pub fn endogenous(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|id| self.vars[id.0].kind == VarKind::Endogenous)
    }

    pub fn exogenous(&self) -> impl Iterator<Item = VarId> + '_ {
        self.ids().filter(|id| self.vars[id.0].kind == VarKind::Exogenous)
    }

    pub fn is_endogenous(&self, id: VarId) -> bool {
        self.vars[id.0].kind == VarKind::Endogenous
    }

    pub fn outcome(&self) -> VarId {
        self.outcome
    }

    /// Utility of the outcome value at position `value`.
    pub fn utility(&self, value: usize) -> Utility {
        self.utility[value]
    }

    pub fn utilities(&self) -> &[Utility] {
        &self.utility
    }

    pub fn default_utility(&self) -> Utility {
        self.default
    }

    pub fn topological_order(&self) -> &[VarId] {
        &self.topo
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn value_index(&self, id: VarId, value: &Value) -> Option<usize> {
        self.vars[id.0].range.position(value)
    }

    pub fn value(&self, id: VarId, idx: usize) -> &Value {
        self.vars[id.0].range.get(idx)
    }

    pub fn range_len(&self, id: VarId) -> usize {
        self.vars[id.0].range.len()
    }

    /// The authored equation for `id`; `None` for exogenous or intervened variables.
    pub fn equation_source(&self, id: VarId) -> Option<&Body> {
        match &self.mechanisms[id.0] {
            Mechanism::Table { source, .. } => Some(source),
            _ => None,
        }
    }

    /// Value `F_id` produces from a full assignment (indices per variable).
    /// `None` for exogenous variables.
    pub fn evaluate_equation(&self, id: VarId, values: &[usize]) -> Option<usize> {
        match &self.mechanisms[id.0] {
            Mechanism::Exogenous => None,
            Mechanism::Table { table, .. } => Some(table.lookup(values)),
            Mechanism::Constant(v) => Some(*v),
        }
    }

    /// Variables the equation for `id` depends on, in declaration order.
    pub fn parents(&self, id: VarId) -> Vec<VarId> {
        match &self.mechanisms[id.0] {
            Mechanism::Table { table, .. } => table.parents.iter().map(|&p| VarId(p)).collect(),
            _ => Vec::new(),
        }
    }

    /// Same model with a different default utility.
    pub fn with_default(&self, default: Utility) -> Result<Model, ModelError> {
        self.with_utilities(self.utility.clone(), default)
    }

    /// Same model with a new utility table (indexed by outcome value) and default.
    pub fn with_utilities(&self, utility: Vec<Utility>, default: Utility) -> Result<Model, ModelError> {
        let range = &self.vars[self.outcome.0].range;
        if utility.len() != range.len() {
            let missing = range.get(utility.len().min(range.len() - 1));
            return Err(ModelError::UtilityIncomplete(missing.to_string()));
        }
        if let Some((i, u)) = utility.iter().enumerate().find(|(_, u)| !in_unit_interval(u)) {
            return Err(ModelError::UtilityOutOfRange {
                value: range.get(i).to_string(),
                utility: format_rational(u),
            });
        }
        if !in_unit_interval(&default) {
            return Err(ModelError::DefaultOutOfRange(format_rational(&default)));
        }
        Ok(Model {
            utility,
            default,
            ..self.clone()
        })
    }
}
