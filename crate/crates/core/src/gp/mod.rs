//! Tree-based symbolic regression.

pub mod canonical;
pub mod engine;
pub mod eval;
pub mod tree;
pub mod variation;

pub use canonical::{canonical_form, edit_distance};
pub use engine::{mse_on, Engine, EngineConfig, Individual, RunMetrics, Strategy, TrainingData};
pub use eval::{evaluate, SampleMatrix};
pub use tree::{Node, ProgramTree};
