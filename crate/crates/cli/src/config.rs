//! Experiment specification, read from a flat TOML file.
//!
//! ```toml
//! dataset = "uball5d"      # or a path to a headed CSV
//! target = "y"             # CSV target column
//! samples = 200            # generator sample count
//! split = 0.7
//! trials = 10
//! seed = 1
//! methods = ["tourn", "lex", "ep-lex-sd"]
//! population_size = 100
//! generation_limit = 100
//! ```

use std::path::{Path, PathBuf};

use eplex::gp::{EngineConfig, Strategy};
use eplex::{Error, Exec, Result};
use serde::{Deserialize, Serialize};

pub const UBALL5D: &str = "uball5d";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    /// `"uball5d"` or a CSV path, relative paths resolved against the spec file.
    pub dataset: String,
    pub target: String,
    pub samples: usize,
    /// Training fraction of each random split.
    pub split: f64,
    pub trials: usize,
    /// Base seed; trial `k` uses `seed + k` unless `seeds` is given.
    pub seed: u64,
    pub seeds: Option<Vec<u64>>,
    pub methods: Vec<Strategy>,
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub generation_limit: usize,
    pub tournament_size: usize,
    pub elitism: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        let e = EngineConfig::default();
        Self {
            dataset: UBALL5D.into(),
            target: "y".into(),
            samples: 1024,
            split: 0.7,
            trials: 1,
            seed: 0,
            seeds: None,
            methods: Strategy::ALL.to_vec(),
            population_size: e.population_size,
            crossover_rate: e.crossover_rate,
            mutation_rate: e.mutation_rate,
            generation_limit: e.generation_limit,
            tournament_size: e.tournament_size,
            elitism: e.elitism,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::InvalidInput(format!("experiment spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Reads a spec file and resolves a relative dataset path against it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
        let mut spec = Self::from_toml(&text)?;
        if spec.dataset != UBALL5D {
            let p = PathBuf::from(&spec.dataset);
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    spec.dataset = dir.join(p).to_string_lossy().into_owned();
                }
            }
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(Error::InvalidInput(format!("split {} must lie in (0, 1)", self.split)));
        }
        if self.trial_seeds().is_empty() {
            return Err(Error::InvalidInput("at least one trial is required".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidInput("methods list is empty".into()));
        }
        if self.dataset == UBALL5D && self.samples < 2 {
            return Err(Error::InvalidInput("generator needs at least two samples".into()));
        }
        self.engine_config(self.methods[0], 0).validate()
    }

    pub fn trial_seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.trials as u64).map(|k| self.seed.wrapping_add(k)).collect(),
        }
    }

    pub fn engine_config(&self, strategy: Strategy, seed: u64) -> EngineConfig {
        EngineConfig {
            population_size: self.population_size,
            crossover_rate: self.crossover_rate,
            mutation_rate: self.mutation_rate,
            generation_limit: self.generation_limit,
            strategy,
            tournament_size: self.tournament_size,
            seed,
            elitism: self.elitism,
            exec: Exec::default(),
            record_timing: false,
        }
    }
}
