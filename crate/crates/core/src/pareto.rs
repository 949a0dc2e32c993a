//! Dominance and ε-dominance over case errors, Pareto sets and their
//! boundaries.
//!
//! All scans are pairwise, O(N²T).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_model::{within_eps, EpsilonVector, ErrorMatrix};

fn check_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!("error rows have different lengths ({} vs {})", a.len(), b.len())));
    }
    Ok(())
}

/// `a` dominates `b`: no worse on every case, strictly better on one.
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    check_len(a, b)?;
    Ok(dominates_unchecked(a, b))
}

fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// `a` ε-dominates `b`: `a_j + ε_j ≤ b_j` on every case and `b_j` lies
/// outside the ε band above `a_j` on at least one.
///
/// ε_j = 0 is evaluated literally, which reduces to [`dominates`].
pub fn eps_dominates(a: &[f64], b: &[f64], eps: &EpsilonVector) -> Result<bool> {
    check_len(a, b)?;
    if eps.len() != a.len() {
        return Err(Error::invalid("epsilon vector length does not match the rows"));
    }
    Ok(eps_dominates_unchecked(a, b, eps.as_slice()))
}

fn eps_dominates_unchecked(a: &[f64], b: &[f64], eps: &[f64]) -> bool {
    let mut strict = false;
    for ((x, y), e) in a.iter().zip(b).zip(eps) {
        if x + e > *y {
            return false;
        }
        strict |= !within_eps(*y, *x, *e);
    }
    strict
}

/// Individuals not dominated by any other.
pub fn pareto_set(errors: &ErrorMatrix) -> Vec<usize> {
    let n = errors.rows();
    (0..n).filter(|&i| !(0..n).any(|j| j != i && dominates_unchecked(errors.row(j), errors.row(i)))).collect()
}

/// Pareto-set members that attain the population minimum on at least one case.
pub fn boundary_set(errors: &ErrorMatrix) -> Vec<usize> {
    let mins = errors.column_mins();
    pareto_set(errors).into_iter().filter(|&i| errors.row(i).iter().zip(&mins).any(|(e, m)| e == m)).collect()
}

/// Individuals not ε-dominated by any other.
pub fn eps_pareto_set(errors: &ErrorMatrix, eps: &EpsilonVector) -> Result<Vec<usize>> {
    eps.check_cols(errors)?;
    let n = errors.rows();
    let e = eps.as_slice();
    Ok((0..n)
        .filter(|&i| !(0..n).any(|j| j != i && eps_dominates_unchecked(errors.row(j), errors.row(i), e)))
        .collect())
}

/// ε-Pareto-set members within ε of the population minimum on at least one case.
pub fn eps_boundary_set(errors: &ErrorMatrix, eps: &EpsilonVector) -> Result<Vec<usize>> {
    let mins = errors.column_mins();
    Ok(eps_pareto_set(errors, eps)?
        .into_iter()
        .filter(|&i| (0..errors.cols()).any(|t| within_eps(errors.get(i, t), mins[t], eps[t])))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DominanceReport {
    pub pareto_set: Vec<usize>,
    pub boundary_set: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_pareto_set: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_boundary_set: Option<Vec<usize>>,
}

pub fn dominance_report(errors: &ErrorMatrix, eps: Option<&EpsilonVector>) -> Result<DominanceReport> {
    let (eps_pareto_set, eps_boundary_set) = match eps {
        Some(e) => (Some(eps_pareto_set(errors, e)?), Some(eps_boundary_set(errors, e)?)),
        None => (None, None),
    };
    Ok(DominanceReport {
        pareto_set: pareto_set(errors),
        boundary_set: boundary_set(errors),
        eps_pareto_set,
        eps_boundary_set,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_model::epsilon_static;
    use crate::fixtures::{continuous_population, discrete_population};

    fn brute_eps_dominates(a: &[f64], b: &[f64], e: &[f64]) -> bool {
        (0..a.len()).all(|j| a[j] + e[j] <= b[j]) && (0..a.len()).any(|j| a[j] + e[j] < b[j])
    }

    #[test]
    fn dominance_examples() {
        assert!(!dominates(&[0.0, 2.0, 5.0, 5.0], &[1.0, 2.0, 4.0, 3.0]).unwrap());
        assert!(!dominates(&[1.0, 2.0], &[1.0, 2.0]).unwrap());
        assert!(dominates(&[0.0, 0.0], &[0.0, 1.0]).unwrap());
        assert!(dominates(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn eps_dominance_examples() {
        let half = EpsilonVector::new(vec![0.5, 0.5]).unwrap();
        assert!(eps_dominates(&[0.0, 0.0], &[1.0, 1.0], &half).unwrap());
        assert!(!eps_dominates(&[0.0, 0.0], &[0.5, 0.5], &half).unwrap());
        let m = continuous_population();
        let eps = epsilon_static(&m);
        for a in 0..9 {
            for b in 0..9 {
                assert_eq!(
                    eps_dominates(m.row(a), m.row(b), &eps).unwrap(),
                    brute_eps_dominates(m.row(a), m.row(b), eps.as_slice()),
                    "{a} vs {b}"
                );
            }
        }
    }

    #[test]
    fn pareto_sets_of_worked_populations() {
        assert_eq!(pareto_set(&discrete_population()), vec![0, 1, 2, 3, 4]);
        assert_eq!(pareto_set(&continuous_population()), (0..9).collect::<Vec<_>>());
        let single = ErrorMatrix::from_rows(&[[3.0, 1.0]]).unwrap();
        assert_eq!(pareto_set(&single), vec![0]);
    }

    #[test]
    fn boundary_sets() {
        assert_eq!(boundary_set(&continuous_population()), vec![0, 3, 4, 8]);
        // n2 is never selected by lexicase yet still ties the best error on t2
        assert_eq!(boundary_set(&discrete_population()), vec![0, 1, 2, 3, 4]);
        let u = ErrorMatrix::from_rows(&[[1.0, 1.0]; 4]).unwrap();
        assert_eq!(boundary_set(&u), vec![0, 1, 2, 3]);
    }

    #[test]
    fn eps_sets() {
        let m = continuous_population();
        let eps = epsilon_static(&m);
        let brute: Vec<usize> =
            (0..9).filter(|&i| !(0..9).any(|j| brute_eps_dominates(m.row(j), m.row(i), eps.as_slice()))).collect();
        assert_eq!(eps_pareto_set(&m, &eps).unwrap(), brute);

        let huge = EpsilonVector::new(vec![1e6; 5]).unwrap();
        assert_eq!(eps_pareto_set(&m, &huge).unwrap().len(), 9);

        let zeros = EpsilonVector::zeros(5);
        assert_eq!(eps_boundary_set(&m, &zeros).unwrap(), boundary_set(&m));
        assert_eq!(
            eps_boundary_set(&discrete_population(), &EpsilonVector::zeros(4)).unwrap(),
            boundary_set(&discrete_population())
        );
    }

    #[test]
    fn tiny_eps_matches_shifted_rows() {
        let m = continuous_population();
        let tiny = EpsilonVector::new(vec![1e-6; 5]).unwrap();
        // distinct rows: non-ε-dominated iff non-dominated for ε below the row gaps
        assert_eq!(eps_pareto_set(&m, &tiny).unwrap(), pareto_set(&m));
    }

    #[test]
    fn eps_boundary_contains_selectable_individuals() {
        let m = continuous_population();
        let eps = epsilon_static(&m);
        let b = eps_boundary_set(&m, &eps).unwrap();
        // every individual with nonzero static or semi-dynamic probability
        for i in 0..9 {
            assert!(b.contains(&i), "{i}");
        }
    }

    #[test]
    fn report_subsets() {
        let m = discrete_population();
        let eps = epsilon_static(&m);
        let r = dominance_report(&m, Some(&eps)).unwrap();
        assert!(r.boundary_set.iter().all(|i| r.pareto_set.contains(i)));
        let ep = r.eps_pareto_set.unwrap();
        assert!(r.eps_boundary_set.unwrap().iter().all(|i| ep.contains(i)));
    }
}
