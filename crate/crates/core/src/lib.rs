//! Deterministic engine for contrastive actual causation and qualitative harm
//! over finite acyclic causal utility models.
//!
//! - [`scm`]: models, contexts, interventions, formula evaluation.
//! - [`causality`]: actual-cause checks by exhaustive witness search.
//! - [`harm`]: harm, strict harm, counterfactual harm and the below-default case.
//! - [`dsl`]: the `.hcm` model format and query expressions.
//! - [`corpus`]: worked examples with their expected verdicts.

pub mod causality;
pub mod corpus;
pub mod dsl;
pub mod harm;
pub mod scm;

pub use causality::{CauseQuery, CauseVerdict, SearchOptions, Setting, Witness};
pub use harm::{HarmCertificate, HarmCondition, HarmVerdict};
pub use scm::{Context, Event, Formula, Model, Value, VarId};
