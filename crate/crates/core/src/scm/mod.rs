//! Finite acyclic structural causal models with a designated outcome variable,
//! a utility over its values, and a default utility.
//!
//! Equations are authored as [`Body`] expressions and compiled to dense lookup
//! tables over the variables they actually depend on. The dependency graph uses
//! that semantic notion of dependence, so a variable that is mentioned but
//! cannot change the result is not a parent.

mod expr;
mod formula;
mod graph;
mod model;
mod solve;
mod value;

pub use expr::{Arm, Body, Expr};
pub use formula::{evaluate, implies_not, CausalFormula, Event, Formula};
pub use graph::{dependency_graph, DependencyGraph};
pub use model::{
    build_model, build_model_with_limits, Limits, Model, ModelError, ModelSpec, Range, Role, VarId, VarKind,
    Variable, VariableSpec,
};
pub(crate) use solve::solve_with;
pub use solve::{intervene, solve, solve_intervened, Assignment, Context, Intervention};
pub use value::{format_rational, Utility, Value};
