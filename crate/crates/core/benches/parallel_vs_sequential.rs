//! Sequential versus rayon execution for the data-parallel kernels.
//!
//! Build with `--no-default-features` to confirm the fallback path compiles;
//! in that configuration both arms run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eplex::error_model::epsilon_static;
use eplex::gp::{Engine, EngineConfig, SampleMatrix, Strategy, TrainingData};
use eplex::probability::{p_lex_enumerate_with, p_lex_monte_carlo_with};
use eplex::selection::select_parents_with;
use eplex::{ErrorMatrix, Exec, LexicaseVariant, Method, SelectionConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn random_errors(n: usize, t: usize, seed: u64) -> ErrorMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n * t).map(|_| rng.gen_range(0.0..10.0)).collect();
    ErrorMatrix::new(n, t, values).unwrap()
}

fn selection(c: &mut Criterion) {
    let mut group = c.benchmark_group("select_parents");
    group.sample_size(10);
    let errors = random_errors(1000, 200, 1);
    for method in [Method::Lexicase, Method::EpsSemiDynamic, Method::EpsDynamic] {
        let config = SelectionConfig::new(method, 1000);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(method.name(), name), &exec, |b, &exec| {
                b.iter(|| select_parents_with(black_box(&errors), &config, 7, exec).unwrap())
            });
        }
    }
    group.finish();
}

fn probabilities(c: &mut Criterion) {
    let mut group = c.benchmark_group("probabilities");
    group.sample_size(10);
    let small = random_errors(12, 8, 2);
    let eps = epsilon_static(&small);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("enumerate_8_cases", name), &exec, |b, &exec| {
            b.iter(|| p_lex_enumerate_with(&small, LexicaseVariant::EpsDynamic, Some(&eps), exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("monte_carlo_1e5", name), &exec, |b, &exec| {
            b.iter(|| {
                p_lex_monte_carlo_with(&small, LexicaseVariant::EpsSemiDynamic, Some(&eps), 100_000, 3, exec).unwrap()
            })
        });
    }
    group.finish();
}

fn engine(c: &mut Criterion) {
    let mut group = c.benchmark_group("engine_generation");
    group.sample_size(10);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<[f64; 5]> = (0..200).map(|_| std::array::from_fn(|_| rng.gen_range(0.05..6.05))).collect();
    let y = rows.iter().map(|x| 10.0 / (5.0 + x.iter().map(|v| (v - 3.0).powi(2)).sum::<f64>())).collect();
    let data = TrainingData::new(SampleMatrix::from_rows(&rows).unwrap(), y).unwrap();
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new("ep-lex-sd_pop500", name), &exec, |b, &exec| {
            b.iter_with_setup(
                || {
                    let config = EngineConfig {
                        population_size: 500,
                        generation_limit: 1,
                        strategy: Strategy::Select(Method::EpsSemiDynamic),
                        exec,
                        ..Default::default()
                    };
                    Engine::new(config, data.clone()).unwrap()
                },
                |mut e| {
                    e.step().unwrap();
                    e
                },
            )
        });
    }
    group.finish();
}

criterion_group!(benches, selection, probabilities, engine);
criterion_main!(benches);
