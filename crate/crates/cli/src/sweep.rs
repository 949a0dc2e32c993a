//! Runtime scaling with population size on a fixed training set.

use std::time::Instant;

use eplex::gp::{Engine, EngineConfig, Strategy};
use eplex::{Error, Exec, Method, Result};
use serde::Serialize;

use crate::dataset::gen_uball5d;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    pub pop_sizes: Vec<usize>,
    pub samples: usize,
    pub trials: usize,
    pub generations: usize,
    pub seed: u64,
    pub methods: Vec<Strategy>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            pop_sizes: vec![50, 200, 800],
            samples: 100,
            trials: 3,
            generations: 10,
            seed: 0,
            methods: [
                Method::Tournament,
                Method::Lexicase,
                Method::EpsStatic,
                Method::EpsSemiDynamic,
                Method::EpsDynamic,
            ]
            .into_iter()
            .map(Strategy::Select)
            .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub method: Strategy,
    pub pop_size: usize,
    pub seconds: Vec<f64>,
    pub median_seconds: f64,
}

/// `log(runtime) = a + b·log(N)` fitted to the median timings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fit {
    pub method: Strategy,
    pub a: f64,
    pub b: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub samples: usize,
    pub generations: usize,
    pub timings: Vec<Timing>,
    pub fits: Vec<Fit>,
}

/// Ordinary least squares of `ln y` on `ln x`; returns (intercept, slope).
pub fn fit_power_law(x: &[f64], y: &[f64]) -> (f64, f64) {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    eplex::error_model::median_in_place(&mut s)
}

/// Times full engine runs single-threaded for each (method, size, trial).
pub fn sweep(opts: &SweepOptions) -> Result<SweepReport> {
    let mut sizes = opts.pop_sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::InvalidInput("a sweep needs at least three distinct population sizes".into()));
    }
    if opts.trials == 0 || opts.generations == 0 || opts.methods.is_empty() {
        return Err(Error::InvalidInput("trials, generations and methods must be non-empty".into()));
    }
    let data = gen_uball5d(opts.samples, opts.seed)?;
    let train = data.subset(&(0..data.samples()).collect::<Vec<_>>())?;

    let mut timings = Vec::new();
    let mut fits = Vec::new();
    for &method in &opts.methods {
        let mut medians = Vec::new();
        for &n in &sizes {
            let mut seconds = Vec::with_capacity(opts.trials);
            for trial in 0..opts.trials {
                let config = EngineConfig {
                    population_size: n,
                    generation_limit: opts.generations,
                    strategy: method,
                    seed: opts.seed.wrapping_add(trial as u64),
                    exec: Exec::Sequential,
                    ..Default::default()
                };
                let started = Instant::now();
                let mut engine = Engine::new(config, train.clone())?;
                engine.run()?;
                seconds.push(started.elapsed().as_secs_f64());
            }
            let m = median(&seconds);
            medians.push(m);
            timings.push(Timing { method, pop_size: n, seconds, median_seconds: m });
        }
        let x: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
        let (a, b) = fit_power_law(&x, &medians);
        fits.push(Fit { method, a, b });
    }
    Ok(SweepReport { samples: opts.samples, generations: opts.generations, timings, fits })
}
