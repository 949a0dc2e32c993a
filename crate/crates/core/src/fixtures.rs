//! Small worked populations used by tests, benches and the CLI golden checks.

use crate::error_model::ErrorMatrix;

/// Five individuals, four cases, discrete absolute errors.
pub const DISCRETE: [[f64; 4]; 5] =
    [[2.0, 2.0, 4.0, 2.0], [1.0, 2.0, 4.0, 3.0], [2.0, 2.0, 3.0, 4.0], [0.0, 2.0, 5.0, 5.0], [0.0, 3.0, 5.0, 2.0]];

/// Nine individuals, five cases, continuous errors with identical row means.
pub const CONTINUOUS: [[f64; 5]; 9] = [
    [0.0, 1.1, 2.2, 3.0, 5.0],
    [0.1, 1.2, 2.0, 2.0, 6.0],
    [0.2, 1.0, 2.1, 1.0, 7.0],
    [1.0, 2.1, 0.2, 0.0, 8.0],
    [1.1, 2.2, 0.0, 4.0, 4.0],
    [1.2, 2.0, 0.1, 5.0, 3.0],
    [2.0, 0.1, 1.2, 6.0, 2.0],
    [2.1, 0.2, 1.0, 7.0, 1.0],
    [2.2, 0.0, 1.1, 8.0, 0.0],
];

pub fn discrete_population() -> ErrorMatrix {
    ErrorMatrix::from_rows(&DISCRETE).expect("valid fixture")
}

pub fn continuous_population() -> ErrorMatrix {
    ErrorMatrix::from_rows(&CONTINUOUS).expect("valid fixture")
}
