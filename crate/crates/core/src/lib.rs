//! Identification of nested and conditional counterfactual probabilities
//! from a causal diagram and a collection of available observational and
//! interventional distributions.

pub mod ctf;
pub mod engine;
pub mod error;
pub mod expr;
pub mod fixtures;
pub mod graph;
pub mod identify;
pub mod oracle;
pub mod query;
pub mod value;

pub use ctf::{
    ancestral_factorize, check_consistency, ctf_ancestors, factor_decompose, factor_from_joint,
    minimize, simplify_events, unnest, Consistency, CtfEvent, CtfFactor, CtfTerm, CtfVariable,
    Inconsistency, MarginalRatio, NestedEvent, Simplified, Subscript, Unnested,
};
pub use engine::{
    cond_ctf_id, ctf_id, FactorDiagnostic, IdentificationResult, Query, Status, Verdict,
};
pub use error::{Error, Result};
pub use expr::{evaluate, render, simplify, Atom, Estimand, Format, TableSet};
pub use graph::{var_set, CausalDiagram, VarSet, Variable};
pub use identify::{
    c_factor_from_distribution, identify, identify_ctf_factor, AvailableSpec, FactorOutcome,
};
pub use oracle::{random_scm, DiscreteSCM, Exogenous, Mechanism};
pub use query::parse_query;
pub use value::{Binder, Namer, SymbolGen, Value};
