//! Lexicase and ε-lexicase parent selection for symbolic regression, with
//! exact and sampled selection-probability analysis, Pareto-boundary
//! predicates and a tree-based GP engine to drive them.
//!
//! Data-parallel loops (selection events, Monte-Carlo trials, case-order
//! enumeration, population evaluation) run on rayon when the default
//! `parallel` feature is enabled and fall back to plain iterators otherwise.
//! Results are identical either way; see [`exec`].

pub mod error;
pub mod error_model;
pub mod exec;
pub mod fixtures;
pub mod gp;
pub mod pareto;
pub mod probability;
pub mod selection;

pub use error::{Error, Result};
pub use error_model::{EpsilonVector, ErrorMatrix, FitnessMetric, FitnessVector};
pub use exec::Exec;
pub use probability::ProbabilityVector;
pub use selection::{LexicaseVariant, Method, SelectionConfig, SelectionEvent};
