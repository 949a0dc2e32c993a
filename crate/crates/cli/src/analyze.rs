//! Probability analysis of a user-supplied error matrix.

use std::collections::BTreeMap;

use clap::ValueEnum;
use eplex::error_model::{aggregate_fitness, epsilon_static};
use eplex::pareto::{dominance_report, DominanceReport};
use eplex::probability::{
    elite_case_sets, p_lex_enumerate_with, p_lex_exact, p_lex_monte_carlo_with, p_tournament, EliteCaseSets, Elitism,
};
use eplex::selection::build_pass_matrix;
use eplex::{Error, ErrorMatrix, Exec, FitnessMetric, LexicaseVariant, Method, Result};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum ProbabilityMethod {
    Exact,
    Enumerate,
    MonteCarlo,
    Tournament,
}

impl ProbabilityMethod {
    fn key(self) -> &'static str {
        match self {
            ProbabilityMethod::Exact => "exact",
            ProbabilityMethod::Enumerate => "enumerate",
            ProbabilityMethod::MonteCarlo => "monte-carlo",
            ProbabilityMethod::Tournament => "tournament",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum EpsMode {
    None,
    Static,
    Semidynamic,
    Dynamic,
}

impl EpsMode {
    pub fn variant(self) -> LexicaseVariant {
        match self {
            EpsMode::None => LexicaseVariant::Lexicase,
            EpsMode::Static => LexicaseVariant::EpsStatic,
            EpsMode::Semidynamic => LexicaseVariant::EpsSemiDynamic,
            EpsMode::Dynamic => LexicaseVariant::EpsDynamic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fitness {
    /// Row mean of the matrix entries.
    Mean,
    /// Row mean of the square roots of the entries.
    MeanRoot,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeOptions {
    pub methods: Vec<ProbabilityMethod>,
    pub eps: Vec<EpsMode>,
    pub trials: usize,
    pub seed: u64,
    pub tournament_size: usize,
    pub fitness: Fitness,
    pub exec: Exec,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            methods: vec![ProbabilityMethod::Exact, ProbabilityMethod::Enumerate, ProbabilityMethod::Tournament],
            eps: vec![EpsMode::None, EpsMode::Static, EpsMode::Semidynamic, EpsMode::Dynamic],
            trials: 100_000,
            seed: 0,
            tournament_size: 2,
            fitness: Fitness::Mean,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub individuals: usize,
    pub cases: usize,
    /// Per-case MAD over the whole population.
    pub epsilon: Vec<f64>,
    /// Static ε-lexicase pass matrix: 0 pass, 1 fail.
    pub pass_matrix: Vec<Vec<u8>>,
    /// Cases on which each individual attains the population minimum.
    pub elite_cases: EliteCaseSets,
    pub dominance: DominanceReport,
    /// method → selection scheme → probability per individual.
    pub probabilities: BTreeMap<String, BTreeMap<String, Vec<f64>>>,
    /// Standard errors of Monte-Carlo entries, keyed like `probabilities`.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub monte_carlo_stderr: BTreeMap<String, Vec<f64>>,
    pub warnings: Vec<String>,
}

fn guidance(method: ProbabilityMethod) -> &'static str {
    match method {
        ProbabilityMethod::Exact | ProbabilityMethod::Enumerate => "try --method monte-carlo",
        _ => "reduce the matrix size",
    }
}

pub fn analyze(errors: &ErrorMatrix, opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    if opts.trials == 0 {
        return Err(Error::InvalidInput("--trials must be at least 1".into()));
    }
    let eps = epsilon_static(errors);
    let pass = build_pass_matrix(errors, &eps)?;
    let mut report = AnalysisReport {
        individuals: errors.rows(),
        cases: errors.cols(),
        epsilon: eps.as_slice().to_vec(),
        pass_matrix: (0..pass.rows()).map(|i| pass.row(i).to_vec()).collect(),
        elite_cases: elite_case_sets(errors, None)?,
        dominance: dominance_report(errors, Some(&eps))?,
        probabilities: BTreeMap::new(),
        monte_carlo_stderr: BTreeMap::new(),
        warnings: Vec::new(),
    };

    let mut methods = opts.methods.clone();
    methods.sort();
    methods.dedup();
    let mut modes = opts.eps.clone();
    modes.sort();
    modes.dedup();

    for method in methods {
        let mut table = BTreeMap::new();
        let mut record = |name: &str, r: Result<Vec<f64>>, warnings: &mut Vec<String>| -> Result<()> {
            match r {
                Ok(p) => {
                    table.insert(name.to_string(), p);
                    Ok(())
                }
                Err(e @ Error::Capacity { .. }) => {
                    warnings.push(format!("{} {name}: {e}; {}", method.key(), guidance(method)));
                    Ok(())
                }
                Err(e) => Err(e),
            }
        };
        match method {
            ProbabilityMethod::Tournament => {
                let metric = match opts.fitness {
                    Fitness::Mean => FitnessMetric::MeanOfValues,
                    Fitness::MeanRoot => FitnessMetric::MeanOfAbsoluteRoots,
                };
                let p = p_tournament(&aggregate_fitness(errors, metric), opts.tournament_size).map(|p| p.into_vec());
                record(Method::Tournament.name(), p, &mut report.warnings)?;
            }
            ProbabilityMethod::Exact => {
                for &mode in &modes {
                    let elitism = match mode {
                        EpsMode::None => Elitism::Exact,
                        EpsMode::Static => Elitism::PassMatrix(Some(eps.clone())),
                        _ => {
                            report.warnings.push(format!(
                                "exact: no recursion for {}; use --method enumerate or monte-carlo",
                                mode.variant()
                            ));
                            continue;
                        }
                    };
                    let p = p_lex_exact(errors, elitism).map(|p| p.into_vec());
                    record(mode.variant().method().name(), p, &mut report.warnings)?;
                }
            }
            ProbabilityMethod::Enumerate => {
                for &mode in &modes {
                    let p = p_lex_enumerate_with(errors, mode.variant(), Some(&eps), opts.exec).map(|p| p.into_vec());
                    record(mode.variant().method().name(), p, &mut report.warnings)?;
                }
            }
            ProbabilityMethod::MonteCarlo => {
                for &mode in &modes {
                    let est =
                        p_lex_monte_carlo_with(errors, mode.variant(), Some(&eps), opts.trials, opts.seed, opts.exec)?;
                    let name = mode.variant().method().name();
                    report.monte_carlo_stderr.insert(name.to_string(), est.stderr);
                    record(name, Ok(est.probabilities.into_vec()), &mut report.warnings)?;
                }
            }
        }
        report.probabilities.insert(method.key().to_string(), table);
    }
    Ok(report)
}
