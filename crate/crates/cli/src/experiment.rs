//! Batch experiments: trials × methods, each on its own seeded split.

use std::fs;
use std::path::Path;

use eplex::gp::{mse_on, Engine, RunMetrics, Strategy};
use eplex::{Exec, Result};
use serde::Serialize;

use crate::config::{ExperimentSpec, UBALL5D};
use crate::dataset::{gen_uball5d, load_csv, split_indices, Dataset, DatasetInfo, UBALL5D_RANGE};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub method: Strategy,
    pub train_mse: Option<f64>,
    pub test_mse: Option<f64>,
    pub program: Option<String>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsRow {
    pub trial: usize,
    pub seed: u64,
    pub method: Strategy,
    pub generation: usize,
    pub best_mse: f64,
    pub norm_mse: f64,
    pub diversity: f64,
    pub median_case_depth: f64,
    pub sel_time_ms: f64,
}

impl MetricsRow {
    fn new(trial: usize, seed: u64, method: Strategy, m: &RunMetrics) -> Self {
        Self {
            trial,
            seed,
            method,
            generation: m.generation,
            best_mse: m.best_mse,
            norm_mse: m.norm_mse,
            diversity: m.diversity,
            median_case_depth: m.median_case_depth,
            sel_time_ms: m.sel_time_ms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Strategy,
    /// Test MSE per successful trial, in trial order.
    pub test_mse: Vec<f64>,
    pub median_test_mse: Option<f64>,
    /// Mean over trials of the per-trial rank by test MSE (1 = best).
    pub mean_rank: Option<f64>,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub dataset: DatasetInfo,
    pub seeds: Vec<u64>,
    pub methods: Vec<MethodSummary>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub summary: ExperimentSummary,
    pub results: Vec<TrialResult>,
    pub metrics: Vec<MetricsRow>,
}

/// Ranks (1 = smallest) with ties sharing the mean of their positions.
pub fn average_ranks(scores: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut ranks = vec![0.0; scores.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    Some(eplex::error_model::median_in_place(&mut v))
}

pub fn load_dataset(spec: &ExperimentSpec) -> Result<(Dataset, DatasetInfo)> {
    if spec.dataset == UBALL5D {
        let d = gen_uball5d(spec.samples, spec.seed)?;
        let info = DatasetInfo {
            source: UBALL5D.into(),
            samples: d.samples(),
            features: 5,
            input_range: Some(UBALL5D_RANGE),
            rejected_rows: 0,
        };
        Ok((d, info))
    } else {
        let (d, rejected) = load_csv(&spec.dataset, &spec.target)?;
        let info = DatasetInfo {
            source: spec.dataset.clone(),
            samples: d.samples(),
            features: d.features.features(),
            input_range: None,
            rejected_rows: rejected,
        };
        Ok((d, info))
    }
}

fn run_one(
    spec: &ExperimentSpec,
    data: &Dataset,
    method: Strategy,
    seed: u64,
    timing: bool,
) -> Result<(f64, f64, String, Vec<RunMetrics>)> {
    let (train_idx, test_idx) = split_indices(data.samples(), spec.split, seed)?;
    let train = data.subset(&train_idx)?;
    let test = data.subset(&test_idx)?;
    let mut config = spec.engine_config(method, seed);
    config.exec = Exec::Sequential;
    config.record_timing = timing;
    let mut engine = Engine::new(config, train)?;
    engine.run()?;
    let best = engine.best();
    Ok((best.fitness, mse_on(&best.tree, &test)?, best.tree.to_string(), engine.metrics().to_vec()))
}

/// Runs every (trial, method) pair. Engine errors are recorded per pair and do
/// not stop the batch; only dataset problems abort.
pub fn run_experiment(spec: &ExperimentSpec, timing: bool) -> Result<ExperimentOutput> {
    spec.validate()?;
    let (data, info) = load_dataset(spec)?;
    let seeds = spec.trial_seeds();
    let jobs: Vec<(usize, Strategy)> =
        (0..seeds.len()).flat_map(|t| spec.methods.iter().map(move |&m| (t, m))).collect();
    let outcomes =
        Exec::Parallel.map_slice(&jobs, |&(trial, method)| run_one(spec, &data, method, seeds[trial], timing));

    let mut results = Vec::with_capacity(jobs.len());
    let mut metrics = Vec::new();
    for (&(trial, method), outcome) in jobs.iter().zip(outcomes) {
        let seed = seeds[trial];
        match outcome {
            Ok((train, test, program, m)) => {
                metrics.extend(m.iter().map(|r| MetricsRow::new(trial, seed, method, r)));
                results.push(TrialResult {
                    trial,
                    seed,
                    method,
                    train_mse: Some(train),
                    test_mse: Some(test),
                    program: Some(program),
                    error: None,
                });
            }
            Err(e) => results.push(TrialResult {
                trial,
                seed,
                method,
                train_mse: None,
                test_mse: None,
                program: None,
                error: Some(e.to_string()),
            }),
        }
    }

    let k = spec.methods.len();
    let mut rank_sums = vec![(0.0, 0usize); k];
    for trial in 0..seeds.len() {
        let row = &results[trial * k..(trial + 1) * k];
        let ok: Vec<(usize, f64)> = row.iter().enumerate().filter_map(|(i, r)| r.test_mse.map(|v| (i, v))).collect();
        let ranks = average_ranks(&ok.iter().map(|p| p.1).collect::<Vec<_>>());
        for ((i, _), r) in ok.iter().zip(ranks) {
            rank_sums[*i].0 += r;
            rank_sums[*i].1 += 1;
        }
    }
    let methods = spec
        .methods
        .iter()
        .enumerate()
        .map(|(i, &method)| {
            let test_mse: Vec<f64> = results.iter().filter(|r| r.method == method).filter_map(|r| r.test_mse).collect();
            let failures = results.iter().filter(|r| r.method == method && r.error.is_some()).count();
            let (sum, n) = rank_sums[i];
            MethodSummary {
                method,
                median_test_mse: median(&test_mse),
                test_mse,
                mean_rank: (n > 0).then(|| sum / n as f64),
                failures,
            }
        })
        .collect();
    Ok(ExperimentOutput { summary: ExperimentSummary { dataset: info, seeds, methods }, results, metrics })
}

/// Writes `results.csv`, `metrics.csv` and `summary.json` into `dir`.
pub fn write_outputs(out: &ExperimentOutput, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("results.csv"))?;
    for r in &out.results {
        w.serialize(r)?;
    }
    w.flush()?;
    let mut w = csv::Writer::from_path(dir.join("metrics.csv"))?;
    for r in &out.metrics {
        w.serialize(r)?;
    }
    w.flush()?;
    let json = serde_json::to_string_pretty(&out.summary).map_err(std::io::Error::from)?;
    fs::write(dir.join("summary.json"), json + "\n")?;
    Ok(())
}
