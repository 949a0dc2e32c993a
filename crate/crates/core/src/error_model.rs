//! Error matrices, aggregate fitness, ε thresholds and population-semantics
//! statistics.
//!
//! An [`ErrorMatrix`] holds one row per individual and one column per training
//! case. Entries are finite and non-negative; program outputs that blow up are
//! mapped to [`PENALTY`] before a matrix is built (see [`sanitize_error`]).

use std::collections::HashSet;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Finite stand-in for non-finite or absurdly large program errors.
pub const PENALTY: f64 = 1e30;

/// Relative slack on ε in the within-ε pass test.
///
/// ε is computed from data that is usually decimal (e.g. `2.1 - 2.0`), so an
/// error sitting exactly on `elite + ε` in decimal arithmetic can land one ulp
/// outside it in binary. The slack is proportional to ε and vanishes at ε = 0,
/// so exact elitism is untouched.
pub const EPS_SLACK: f64 = 1e-9;

/// Within-ε pass condition: `value ≤ reference + ε`, inclusive.
#[inline]
pub fn within_eps(value: f64, reference: f64, eps: f64) -> bool {
    value <= reference + eps * (1.0 + EPS_SLACK)
}

/// Maps a raw error to a finite, non-negative value.
#[inline]
pub fn sanitize_error(e: f64) -> f64 {
    if e.is_finite() && e >= 0.0 {
        e.min(PENALTY)
    } else if e.is_finite() {
        // negative errors only arise from callers passing signed residuals
        (-e).min(PENALTY)
    } else {
        PENALTY
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl ErrorMatrix {
    /// Builds a matrix from row-major values.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "error matrix needs at least one row and one column, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "expected {} values for a {rows}x{cols} matrix, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid(format!(
                "entry ({}, {}) = {} is not a finite non-negative error",
                pos / cols,
                pos % cols,
                values[pos]
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::invalid(format!("row {i} has {} cases, expected {cols}", r.len())));
            }
            values.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, values)
    }

    /// Number of individuals N.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of cases T.
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, individual: usize, case: usize) -> f64 {
        self.values[individual * self.cols + case]
    }

    pub fn row(&self, individual: usize) -> &[f64] {
        &self.values[individual * self.cols..(individual + 1) * self.cols]
    }

    pub fn column(&self, case: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, case)).collect()
    }

    /// e*_t, the lowest error on `case` over the whole population.
    pub fn column_min(&self, case: usize) -> f64 {
        (0..self.rows).map(|i| self.get(i, case)).fold(f64::INFINITY, f64::min)
    }

    pub fn column_mins(&self) -> Vec<f64> {
        (0..self.cols).map(|t| self.column_min(t)).collect()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Matrix with columns reordered so that new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.cols];
        if perm.len() != self.cols || perm.iter().any(|&p| p >= self.cols || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::invalid("column permutation is not a permutation of the cases"));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.rows {
            values.extend(perm.iter().map(|&p| self.get(i, p)));
        }
        Self::new(self.rows, self.cols, values)
    }

    /// Reads a header-less CSV (rows = individuals, columns = cases).
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|field| {
                    field
                        .parse::<f64>()
                        .map_err(|_| Error::invalid(format!("row {i}: cannot parse {field:?} as a number")))
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path.as_ref())
            .map_err(|e| Error::invalid(format!("cannot open {}: {e}", path.as_ref().display())))?;
        Self::read_csv(file)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
        for i in 0..self.rows {
            wtr.write_record(self.row(i).iter().map(|v| v.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

/// Per-case ε thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpsilonVector(Vec<f64>);

impl EpsilonVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("epsilon {v} is not finite and non-negative")));
        }
        Ok(Self(values))
    }

    /// All-zero thresholds of length `cols`.
    pub fn zeros(cols: usize) -> Self {
        Self(vec![0.0; cols])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub(crate) fn check_cols(&self, errors: &ErrorMatrix) -> Result<()> {
        if self.len() != errors.cols() {
            return Err(Error::invalid(format!(
                "epsilon vector has {} entries but the matrix has {} cases",
                self.len(),
                errors.cols()
            )));
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for EpsilonVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Per-individual aggregate fitness (lower is better).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FitnessVector(Vec<f64>);

impl FitnessVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("fitness vector is empty"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::invalid(format!("fitness {v} is not finite and non-negative")));
        }
        Ok(Self(values))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::Index<usize> for FitnessVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// How a matrix row is collapsed into one fitness value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitnessMetric {
    /// Row mean of the stored values: MSE for squared errors, MAE for absolute ones.
    MeanOfValues,
    /// Row mean of the square roots: MAE when the matrix stores squared errors.
    MeanOfAbsoluteRoots,
}

/// Median with the even-length convention of averaging the two central order
/// statistics. Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> f64 {
    debug_assert!(!values.is_empty());
    let n = values.len();
    let mid = n / 2;
    let (_, upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lower + upper) / 2.0
    }
}

/// Median absolute deviation, `median(|v - median(v)|)`.
pub fn mad(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::invalid("median absolute deviation of an empty vector"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("median absolute deviation of non-finite values"));
    }
    let mut buf = values.to_vec();
    Ok(mad_in_place(&mut buf))
}

/// [`mad`] without validation, reusing `buf` as scratch.
pub(crate) fn mad_in_place(buf: &mut [f64]) -> f64 {
    let med = median_in_place(buf);
    for v in buf.iter_mut() {
        *v = (*v - med).abs();
    }
    median_in_place(buf)
}

/// ε_t = MAD of each column over the whole population.
pub fn epsilon_static(errors: &ErrorMatrix) -> EpsilonVector {
    let mut buf = Vec::with_capacity(errors.rows());
    let eps = (0..errors.cols())
        .map(|t| {
            buf.clear();
            buf.extend((0..errors.rows()).map(|i| errors.get(i, t)));
            mad_in_place(&mut buf)
        })
        .collect();
    EpsilonVector(eps)
}

/// MAD of column `case` restricted to the individuals in `pool`.
pub fn epsilon_pool(errors: &ErrorMatrix, pool: &[usize], case: usize) -> Result<f64> {
    if pool.is_empty() {
        return Err(Error::invalid("epsilon of an empty pool"));
    }
    if case >= errors.cols() {
        return Err(Error::invalid(format!("case {case} out of range")));
    }
    if let Some(&i) = pool.iter().find(|&&i| i >= errors.rows()) {
        return Err(Error::invalid(format!("individual {i} out of range")));
    }
    let mut buf: Vec<f64> = pool.iter().map(|&i| errors.get(i, case)).collect();
    Ok(mad_in_place(&mut buf))
}

pub fn aggregate_fitness(errors: &ErrorMatrix, metric: FitnessMetric) -> FitnessVector {
    let t = errors.cols() as f64;
    let values = (0..errors.rows())
        .map(|i| {
            let row = errors.row(i);
            let sum: f64 = match metric {
                FitnessMetric::MeanOfValues => row.iter().sum(),
                FitnessMetric::MeanOfAbsoluteRoots => row.iter().map(|e| e.sqrt()).sum(),
            };
            (sum / t).min(PENALTY)
        })
        .collect();
    FitnessVector(values)
}

/// Fraction of distinct error rows, compared bitwise.
pub fn semantic_diversity(errors: &ErrorMatrix) -> f64 {
    let distinct: HashSet<Vec<u64>> =
        (0..errors.rows()).map(|i| errors.row(i).iter().map(|v| v.to_bits()).collect()).collect();
    distinct.len() as f64 / errors.rows() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{continuous_population, discrete_population};

    fn brute_median(v: &[f64]) -> f64 {
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        let n = s.len();
        if n % 2 == 1 {
            s[n / 2]
        } else {
            (s[n / 2 - 1] + s[n / 2]) / 2.0
        }
    }

    fn brute_mad(v: &[f64]) -> f64 {
        let m = brute_median(v);
        let d: Vec<f64> = v.iter().map(|x| (x - m).abs()).collect();
        brute_median(&d)
    }

    #[test]
    fn mad_matches_worked_example_columns() {
        let e1 = [0.0, 0.1, 0.2, 1.0, 1.1, 1.2, 2.0, 2.1, 2.2];
        assert!((mad(&e1).unwrap() - 0.9).abs() < 1e-12);
        let e4 = [3.0, 2.0, 1.0, 0.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        assert_eq!(mad(&e4).unwrap(), 2.0);
        assert_eq!(mad(&[4.2; 4]).unwrap(), 0.0);
    }

    #[test]
    fn mad_rejects_empty_and_non_finite() {
        assert!(matches!(mad(&[]), Err(Error::InvalidInput(_))));
        assert!(mad(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn even_length_median_averages_central_pair() {
        let mut v = [4.0, 1.0, 3.0, 2.0];
        assert_eq!(median_in_place(&mut v), 2.5);
    }

    #[test]
    fn static_epsilon_for_worked_population() {
        let eps = epsilon_static(&continuous_population());
        let expected = [0.9, 0.9, 0.9, 2.0, 2.0];
        for (e, x) in eps.as_slice().iter().zip(expected) {
            assert!((e - x).abs() < 1e-12, "{e} vs {x}");
        }
    }

    #[test]
    fn static_epsilon_of_identical_rows_is_zero() {
        let m = ErrorMatrix::from_rows(&[[1.0, 2.0, 3.0]; 5]).unwrap();
        assert!(epsilon_static(&m).as_slice().iter().all(|&e| e == 0.0));
    }

    #[test]
    fn static_epsilon_matches_sort_based_oracle() {
        let m = ErrorMatrix::from_rows(&[
            [0.31, 2.5, 0.0, 7.1],
            [1.7, 0.2, 4.4, 3.3],
            [0.9, 9.1, 1.2, 0.05],
            [5.5, 0.7, 2.2, 6.6],
            [2.8, 3.9, 0.8, 1.1],
            [0.4, 1.6, 3.0, 2.9],
        ])
        .unwrap();
        let eps = epsilon_static(&m);
        for t in 0..4 {
            assert_eq!(eps[t], brute_mad(&m.column(t)));
        }
    }

    #[test]
    fn pool_epsilon() {
        let m = continuous_population();
        let all: Vec<usize> = (0..9).collect();
        assert!((epsilon_pool(&m, &all, 0).unwrap() - 0.9).abs() < 1e-12);
        assert_eq!(epsilon_pool(&m, &[4], 2).unwrap(), 0.0);
        assert!((epsilon_pool(&m, &[6, 7, 8], 0).unwrap() - 0.1).abs() < 1e-12);
        assert!(epsilon_pool(&m, &[], 0).is_err());
    }

    #[test]
    fn aggregate_fitness_examples() {
        let mae = aggregate_fitness(&discrete_population(), FitnessMetric::MeanOfValues);
        assert_eq!(mae[0], 2.5);
        let mean = aggregate_fitness(&continuous_population(), FitnessMetric::MeanOfValues);
        for &f in mean.as_slice() {
            assert!((f - 2.26).abs() < 1e-12);
        }
        let z = ErrorMatrix::from_rows(&[[0.0, 0.0]]).unwrap();
        assert_eq!(aggregate_fitness(&z, FitnessMetric::MeanOfValues)[0], 0.0);
        let sq = ErrorMatrix::from_rows(&[[4.0, 9.0]]).unwrap();
        assert_eq!(aggregate_fitness(&sq, FitnessMetric::MeanOfAbsoluteRoots)[0], 2.5);
    }

    #[test]
    fn diversity_examples() {
        assert_eq!(semantic_diversity(&continuous_population()), 1.0);
        assert_eq!(semantic_diversity(&discrete_population()), 1.0);
        let m = ErrorMatrix::from_rows(&[[1.0, 2.0]; 4]).unwrap();
        assert_eq!(semantic_diversity(&m), 0.25);
    }

    #[test]
    fn matrix_validation() {
        assert!(ErrorMatrix::new(0, 1, vec![]).is_err());
        assert!(ErrorMatrix::new(1, 2, vec![1.0]).is_err());
        assert!(ErrorMatrix::new(1, 1, vec![f64::INFINITY]).is_err());
        assert!(ErrorMatrix::new(1, 1, vec![-1.0]).is_err());
        assert!(ErrorMatrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let m = continuous_population();
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(ErrorMatrix::read_csv(buf.as_slice()).unwrap(), m);
        assert!(ErrorMatrix::read_csv("1,2\n3,x\n".as_bytes()).is_err());
    }

    #[test]
    fn sanitize_maps_non_finite_to_penalty() {
        assert_eq!(sanitize_error(f64::NAN), PENALTY);
        assert_eq!(sanitize_error(f64::INFINITY), PENALTY);
        assert_eq!(sanitize_error(1e200), PENALTY);
        assert_eq!(sanitize_error(0.5), 0.5);
    }

    #[test]
    fn within_eps_is_exact_at_zero() {
        assert!(within_eps(1.0, 1.0, 0.0));
        assert!(!within_eps(1.0 + f64::EPSILON, 1.0, 0.0));
        // decimal boundary: 1.1 is within 0.1 of 1.0 even though 1.2 - 1.1 rounds low
        assert!(within_eps(1.1, 1.0, 1.2 - 1.1));
    }
}
