//! Library side of the `eplex` command-line tool: dataset handling,
//! experiment batches, matrix analysis and runtime sweeps.

pub mod analyze;
pub mod config;
pub mod dataset;
pub mod experiment;
pub mod sweep;
