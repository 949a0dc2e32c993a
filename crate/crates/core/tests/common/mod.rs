#![allow(dead_code)]

use eplex::ErrorMatrix;
use rand::Rng;

/// Random error matrix with 1..=n_max rows and 1..=t_max columns. Discrete
/// matrices use small integers so that ties are common.
pub fn random_matrix<R: Rng>(rng: &mut R, n_max: usize, t_max: usize, discrete: bool) -> ErrorMatrix {
    let n = rng.gen_range(1..=n_max);
    let t = rng.gen_range(1..=t_max);
    let values =
        (0..n * t).map(|_| if discrete { rng.gen_range(0..5) as f64 } else { rng.gen_range(0.0..3.0) }).collect();
    ErrorMatrix::new(n, t, values).unwrap()
}

pub fn contains(set: &[usize], i: usize) -> bool {
    set.binary_search(&i).is_ok()
}
