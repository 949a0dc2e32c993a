//! Expected selection probabilities.
//!
//! Three routes are provided for the lexicase family:
//!
//! * [`p_lex_exact`]: the recursion over (pool, remaining cases), memoized on
//!   bitmask pairs. Exact elitism or a static pass matrix.
//! * [`p_lex_enumerate`]: walks every case ordering (as a prefix tree, pruning
//!   once the pool is a singleton) with the same filters the selection module
//!   uses. This is the exact method for the pool-relative variants.
//! * [`p_lex_monte_carlo`]: empirical frequencies of real selection events.
//!
//! Tournament probabilities use the rank-class closed form.

use std::collections::HashMap;
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_model::{epsilon_static, within_eps, EpsilonVector, ErrorMatrix, FitnessVector};
use crate::exec::{domain, stream, Exec};
use crate::selection::{build_pass_matrix, run_event, CaseFilter, LexicaseVariant, Prepared};

/// Selection probability per individual.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    /// Tolerance on the unit-sum invariant.
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(values: Vec<f64>) -> Result<Self> {
        let p = Self(values);
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::invalid("empty probability vector"));
        }
        if let Some(v) = self.0.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::invalid(format!("probability {v} is negative or not finite")));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(())
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

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn max_abs_diff(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Index<usize> for ProbabilityVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Elitism rule for the exact recursion.
#[derive(Clone, Debug, PartialEq)]
pub enum Elitism {
    /// Elite means exactly equal to the pool minimum.
    Exact,
    /// Elite means passing the static pass matrix built from these thresholds
    /// (`None` computes them from the matrix).
    PassMatrix(Option<EpsilonVector>),
}

/// Size guard for the memoized recursion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExactLimits {
    pub max_individuals: usize,
    pub max_cases: usize,
    /// Upper bound on memoized (pool, cases) states before giving up.
    pub max_states: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self { max_individuals: 64, max_cases: 20, max_states: 2_000_000 }
    }
}

pub fn p_lex_exact(errors: &ErrorMatrix, elitism: Elitism) -> Result<ProbabilityVector> {
    p_lex_exact_with_limits(errors, elitism, ExactLimits::default())
}

pub fn p_lex_exact_with_limits(
    errors: &ErrorMatrix,
    elitism: Elitism,
    limits: ExactLimits,
) -> Result<ProbabilityVector> {
    let (n, t) = (errors.rows(), errors.cols());
    if n > limits.max_individuals.min(64) {
        return Err(Error::Capacity {
            what: format!("population of {n}"),
            limit: format!("at most {} individuals", limits.max_individuals.min(64)),
        });
    }
    if t > limits.max_cases.min(32) {
        return Err(Error::Capacity {
            what: format!("{t} cases"),
            limit: format!("at most {} cases", limits.max_cases.min(32)),
        });
    }
    let binary;
    let matrix = match elitism {
        Elitism::Exact => errors,
        Elitism::PassMatrix(eps) => {
            let eps = eps.unwrap_or_else(|| epsilon_static(errors));
            binary = build_pass_matrix(errors, &eps)?.to_error_matrix();
            &binary
        }
    };
    let mut rec = Recursion { errors: matrix, memo: HashMap::new(), max_states: limits.max_states };
    let full_pool = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let full_cases = if t == 32 { u32::MAX } else { (1u32 << t) - 1 };
    let p = rec.solve(full_pool, full_cases)?;
    ProbabilityVector::new(p.to_vec())
}

struct Recursion<'a> {
    errors: &'a ErrorMatrix,
    memo: HashMap<(u64, u32), Rc<Vec<f64>>>,
    max_states: usize,
}

impl Recursion<'_> {
    /// Survivors of `pool` on `case`: members attaining the pool minimum.
    fn elite_on(&self, pool: u64, case: usize) -> u64 {
        let mut min = f64::INFINITY;
        for i in bits(pool) {
            min = min.min(self.errors.get(i, case));
        }
        let mut out = 0u64;
        for i in bits(pool) {
            if self.errors.get(i, case) == min {
                out |= 1 << i;
            }
        }
        out
    }

    /// Probability vector (indexed by individual) for `pool` and `cases`.
    fn solve(&mut self, pool: u64, cases: u32) -> Result<Rc<Vec<f64>>> {
        if let Some(p) = self.memo.get(&(pool, cases)) {
            return Ok(Rc::clone(p));
        }
        let n = self.errors.rows();
        let mut p = vec![0.0; n];
        let size = pool.count_ones();
        if size == 1 {
            p[pool.trailing_zeros() as usize] = 1.0;
        } else if cases == 0 {
            let share = 1.0 / size as f64;
            for i in bits(pool) {
                p[i] = share;
            }
        } else {
            let weight = 1.0 / cases.count_ones() as f64;
            for k in bits(cases as u64) {
                let survivors = self.elite_on(pool, k);
                let sub = self.solve(survivors, cases & !(1 << k))?;
                for i in bits(survivors) {
                    p[i] += weight * sub[i];
                }
            }
        }
        if self.memo.len() >= self.max_states {
            return Err(Error::Capacity {
                what: "exact recursion state space".into(),
                limit: format!("at most {} memoized states", self.max_states),
            });
        }
        let p = Rc::new(p);
        self.memo.insert((pool, cases), Rc::clone(&p));
        Ok(p)
    }
}

fn bits(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(i)
        }
    })
}

/// Largest case count accepted by [`p_lex_enumerate`].
pub const MAX_ENUMERATION_CASES: usize = 8;

/// Exact probabilities by walking all T! case orderings with the variant's
/// deterministic filtering; each ordering's weight is split evenly over its
/// final pool.
pub fn p_lex_enumerate(
    errors: &ErrorMatrix,
    variant: LexicaseVariant,
    eps: Option<&EpsilonVector>,
) -> Result<ProbabilityVector> {
    p_lex_enumerate_with(errors, variant, eps, Exec::default())
}

pub fn p_lex_enumerate_with(
    errors: &ErrorMatrix,
    variant: LexicaseVariant,
    eps: Option<&EpsilonVector>,
    exec: Exec,
) -> Result<ProbabilityVector> {
    let t = errors.cols();
    if t > MAX_ENUMERATION_CASES {
        return Err(Error::Capacity {
            what: format!("enumerating {t}! case orderings"),
            limit: format!("at most {MAX_ENUMERATION_CASES} cases"),
        });
    }
    let prepared = Prepared::with_eps(errors, variant, eps)?;
    let filter = prepared.filter().expect("lexicase variant");
    let n = errors.rows();

    // one subtree per first case; partial sums combined in case order
    let partials = exec.map(t, |first| {
        let mut acc = vec![0.0; n];
        let mut pool: Vec<usize> = (0..n).collect();
        let mut scratch = Vec::new();
        if n > 1 {
            filter.apply(&mut pool, first, &mut scratch);
        }
        let remaining: Vec<usize> = (0..t).filter(|&c| c != first).collect();
        walk(&filter, &pool, &remaining, factorial(t - 1), &mut acc, &mut scratch);
        acc
    });
    let total = factorial(t);
    let mut p = vec![0.0; n];
    for part in partials {
        for (a, b) in p.iter_mut().zip(part) {
            *a += b;
        }
    }
    for v in &mut p {
        *v /= total;
    }
    ProbabilityVector::new(p)
}

/// Accumulates `weight` (the number of orderings sharing this prefix) over the
/// final pools reachable from `pool` with `remaining` cases.
fn walk(
    filter: &CaseFilter<'_>,
    pool: &[usize],
    remaining: &[usize],
    weight: f64,
    acc: &mut [f64],
    scratch: &mut Vec<f64>,
) {
    if pool.len() == 1 || remaining.is_empty() {
        let share = weight / pool.len() as f64;
        for &i in pool {
            acc[i] += share;
        }
        return;
    }
    let child_weight = weight / remaining.len() as f64;
    for (j, &case) in remaining.iter().enumerate() {
        let mut next = pool.to_vec();
        filter.apply(&mut next, case, scratch);
        let rest: Vec<usize> = remaining[..j].iter().chain(&remaining[j + 1..]).copied().collect();
        walk(filter, &next, &rest, child_weight, acc, scratch);
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Monte-Carlo estimate and per-entry standard error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub probabilities: ProbabilityVector,
    pub stderr: Vec<f64>,
    pub trials: usize,
}

/// Trials per random stream in [`p_lex_monte_carlo`].
const MC_CHUNK: usize = 4096;

/// Empirical selection frequencies over `trials` events.
///
/// Trials are grouped into fixed chunks of 4096, each drawing from a stream
/// keyed by `(seed, chunk)`, so the estimate is independent of `exec`.
pub fn p_lex_monte_carlo(
    errors: &ErrorMatrix,
    variant: LexicaseVariant,
    eps: Option<&EpsilonVector>,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloEstimate> {
    p_lex_monte_carlo_with(errors, variant, eps, trials, seed, Exec::default())
}

pub fn p_lex_monte_carlo_with(
    errors: &ErrorMatrix,
    variant: LexicaseVariant,
    eps: Option<&EpsilonVector>,
    trials: usize,
    seed: u64,
    exec: Exec,
) -> Result<MonteCarloEstimate> {
    if trials == 0 {
        return Err(Error::invalid("Monte-Carlo estimate needs at least one trial"));
    }
    let prepared = Prepared::with_eps(errors, variant, eps)?;
    let filter = prepared.filter().expect("lexicase variant");
    let n = errors.rows();
    let chunks = trials.div_ceil(MC_CHUNK);
    let counts = exec.map(chunks, |c| {
        let mut rng = stream(seed, domain::MONTE_CARLO, c as u64);
        let mut counts = vec![0u64; n];
        let len = MC_CHUNK.min(trials - c * MC_CHUNK);
        for _ in 0..len {
            counts[run_event(filter, &mut rng).selected] += 1;
        }
        counts
    });
    let mut total = vec![0u64; n];
    for c in counts {
        for (a, b) in total.iter_mut().zip(c) {
            *a += b;
        }
    }
    let tf = trials as f64;
    let p: Vec<f64> = total.iter().map(|&c| c as f64 / tf).collect();
    let stderr = p.iter().map(|&q| (q * (1.0 - q) / tf).sqrt()).collect();
    Ok(MonteCarloEstimate { probabilities: ProbabilityVector(p), stderr, trials })
}

/// Tournament selection probabilities for size-`r` tournaments drawn with
/// replacement. Individuals with equal fitness share a rank class.
pub fn p_tournament(fitness: &FitnessVector, r: usize) -> Result<ProbabilityVector> {
    if r == 0 {
        return Err(Error::invalid("tournament size must be at least 1"));
    }
    let n = fitness.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]));
    // rank classes, best first
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        match classes.last_mut() {
            Some(c) if fitness[c[0]] == fitness[i] => c.push(i),
            _ => classes.push(vec![i]),
        }
    }
    let nf = n as f64;
    let mut p = vec![0.0; n];
    // at_or_worse = Σ_{i≥j} |S_i|
    let mut at_or_worse = n;
    for class in &classes {
        let worse = at_or_worse - class.len();
        let mass = (at_or_worse as f64 / nf).powi(r as i32) - (worse as f64 / nf).powi(r as i32);
        let each = mass / class.len() as f64;
        for &i in class {
            p[i] = each;
        }
        at_or_worse = worse;
    }
    ProbabilityVector::new(p)
}

/// Probability that a given case comes first in at least one of `n_events`
/// selection events when there are `t_count` cases.
pub fn p_first(t_count: usize, n_events: usize) -> Result<f64> {
    if t_count == 0 || n_events == 0 {
        return Err(Error::invalid("p_first needs at least one case and one event"));
    }
    let t = t_count as f64;
    Ok(1.0 - ((t - 1.0) / t).powf(n_events as f64))
}

/// K_n for every individual: the cases on which it is elite.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EliteCaseSets(Vec<Vec<usize>>);

impl EliteCaseSets {
    pub fn of(&self, individual: usize) -> &[usize] {
        &self.0[individual]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &[usize]> {
        self.0.iter().map(Vec::as_slice)
    }
}

/// Elite cases per individual over the whole population: exact column minima,
/// or within ε of the minimum when `eps` is given.
pub fn elite_case_sets(errors: &ErrorMatrix, eps: Option<&EpsilonVector>) -> Result<EliteCaseSets> {
    if let Some(e) = eps {
        e.check_cols(errors)?;
    }
    let mins = errors.column_mins();
    let sets = (0..errors.rows())
        .map(|i| {
            (0..errors.cols())
                .filter(|&t| {
                    let e = errors.get(i, t);
                    match eps {
                        Some(eps) => within_eps(e, mins[t], eps[t]),
                        None => e == mins[t],
                    }
                })
                .collect()
        })
        .collect();
    Ok(EliteCaseSets(sets))
}
