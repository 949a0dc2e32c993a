mod common;

use common::{contains, random_matrix};
use eplex::error_model::epsilon_static;
use eplex::pareto::boundary_set;
use eplex::probability::{p_lex_enumerate_with, p_lex_exact, p_lex_monte_carlo_with, Elitism};
use eplex::{ErrorMatrix, Exec, LexicaseVariant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn exact_recursion_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for k in 0..120 {
        let m = random_matrix(&mut rng, 8, 6, k % 2 == 0);
        let exact = p_lex_exact(&m, Elitism::Exact).unwrap();
        let enumerated = p_lex_enumerate_with(&m, LexicaseVariant::Lexicase, None, Exec::Sequential).unwrap();
        assert!(exact.max_abs_diff(enumerated.as_slice()) < 1e-9, "matrix {k}");

        let eps = epsilon_static(&m);
        let exact_s = p_lex_exact(&m, Elitism::PassMatrix(Some(eps.clone()))).unwrap();
        let enum_s = p_lex_enumerate_with(&m, LexicaseVariant::EpsStatic, Some(&eps), Exec::Sequential).unwrap();
        assert!(exact_s.max_abs_diff(enum_s.as_slice()) < 1e-9, "static, matrix {k}");
    }
}

#[test]
fn zero_probability_outside_the_boundary() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for k in 0..200 {
        let m = random_matrix(&mut rng, 10, 5, k % 2 == 1);
        let p = p_lex_exact(&m, Elitism::Exact).unwrap();
        let b = boundary_set(&m);
        for i in 0..m.rows() {
            if !contains(&b, i) {
                assert_eq!(p[i], 0.0, "matrix {k}, individual {i}");
            }
        }
    }
}

#[test]
fn lexicase_ignores_monotone_transforms_and_case_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for k in 0..50 {
        let m = random_matrix(&mut rng, 8, 5, k % 2 == 0);
        let p = p_lex_exact(&m, Elitism::Exact).unwrap();
        let cubed: Vec<f64> = m.values().iter().map(|e| e * e * e + 2.0).collect();
        let t = ErrorMatrix::new(m.rows(), m.cols(), cubed).unwrap();
        assert!(p.max_abs_diff(p_lex_exact(&t, Elitism::Exact).unwrap().as_slice()) < 1e-12);
        let perm: Vec<usize> = (0..m.cols()).rev().collect();
        let r = m.permute_columns(&perm).unwrap();
        assert!(p.max_abs_diff(p_lex_exact(&r, Elitism::Exact).unwrap().as_slice()) < 1e-12);
    }
}

#[test]
fn monte_carlo_tracks_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for k in 0..12 {
        let m = random_matrix(&mut rng, 6, 4, k % 2 == 0);
        let eps = epsilon_static(&m);
        for v in LexicaseVariant::ALL {
            let e = p_lex_enumerate_with(&m, v, Some(&eps), Exec::Sequential).unwrap();
            let mc = p_lex_monte_carlo_with(&m, v, Some(&eps), 20_000, k, Exec::Parallel).unwrap();
            for i in 0..m.rows() {
                let sigma = (e[i] * (1.0 - e[i]) / 20_000.0).sqrt();
                assert!((mc.probabilities[i] - e[i]).abs() <= 5.0 * sigma + 1e-12, "{v} matrix {k} entry {i}");
            }
        }
    }
}

#[test]
fn parallel_and_sequential_agree_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let m = random_matrix(&mut rng, 8, 6, false);
    for v in LexicaseVariant::ALL {
        let a = p_lex_enumerate_with(&m, v, None, Exec::Sequential).unwrap();
        let b = p_lex_enumerate_with(&m, v, None, Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let a = p_lex_monte_carlo_with(&m, v, None, 10_000, 3, Exec::Sequential).unwrap();
        let b = p_lex_monte_carlo_with(&m, v, None, 10_000, 3, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
