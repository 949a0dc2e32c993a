//! Parent selection: random, tournament, lexicase and the three ε-lexicase
//! variants, each reporting how many cases it consumed.
//!
//! All lexicase-style methods share one filtering loop ([`run_event`]); they
//! differ only in the per-case [`CaseFilter`]. The enumeration oracle in
//! [`crate::probability`] drives the same filters with fixed case orders.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_model::{
    aggregate_fitness, epsilon_static, mad_in_place, within_eps, EpsilonVector, ErrorMatrix, FitnessMetric,
    FitnessVector,
};
use crate::exec::{domain, stream, Exec};

/// Outcome of one selection event.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionEvent {
    pub selected: usize,
    /// Cases in the order they were consumed.
    pub case_order: Vec<usize>,
    pub case_depth: usize,
    pub final_pool_size: usize,
}

impl SelectionEvent {
    fn direct(selected: usize, pool: usize) -> Self {
        Self { selected, case_order: Vec::new(), case_depth: 0, final_pool_size: pool }
    }
}

/// Selection methods in the experimental roster that act through parent selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "rand")]
    Random,
    #[serde(rename = "tourn")]
    Tournament,
    #[serde(rename = "lex")]
    Lexicase,
    #[serde(rename = "ep-lex-s")]
    EpsStatic,
    #[serde(rename = "ep-lex-sd")]
    EpsSemiDynamic,
    #[serde(rename = "ep-lex-d")]
    EpsDynamic,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Random,
        Method::Tournament,
        Method::Lexicase,
        Method::EpsStatic,
        Method::EpsSemiDynamic,
        Method::EpsDynamic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Random => "rand",
            Method::Tournament => "tourn",
            Method::Lexicase => "lex",
            Method::EpsStatic => "ep-lex-s",
            Method::EpsSemiDynamic => "ep-lex-sd",
            Method::EpsDynamic => "ep-lex-d",
        }
    }

    pub fn lexicase_variant(self) -> Option<LexicaseVariant> {
        match self {
            Method::Lexicase => Some(LexicaseVariant::Lexicase),
            Method::EpsStatic => Some(LexicaseVariant::EpsStatic),
            Method::EpsSemiDynamic => Some(LexicaseVariant::EpsSemiDynamic),
            Method::EpsDynamic => Some(LexicaseVariant::EpsDynamic),
            Method::Random | Method::Tournament => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown selection method {s:?}")))
    }
}

/// The four case-filtering variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LexicaseVariant {
    Lexicase,
    EpsStatic,
    EpsSemiDynamic,
    EpsDynamic,
}

impl LexicaseVariant {
    pub const ALL: [LexicaseVariant; 4] = [
        LexicaseVariant::Lexicase,
        LexicaseVariant::EpsStatic,
        LexicaseVariant::EpsSemiDynamic,
        LexicaseVariant::EpsDynamic,
    ];

    pub fn method(self) -> Method {
        match self {
            LexicaseVariant::Lexicase => Method::Lexicase,
            LexicaseVariant::EpsStatic => Method::EpsStatic,
            LexicaseVariant::EpsSemiDynamic => Method::EpsSemiDynamic,
            LexicaseVariant::EpsDynamic => Method::EpsDynamic,
        }
    }
}

impl fmt::Display for LexicaseVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.method().name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionConfig {
    pub method: Method,
    pub tournament_size: usize,
    /// Selection events per generation.
    pub ns: usize,
}

impl SelectionConfig {
    pub fn new(method: Method, ns: usize) -> Self {
        Self { method, tournament_size: 2, ns }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tournament_size == 0 {
            return Err(Error::invalid("tournament size must be at least 1"));
        }
        if self.ns == 0 {
            return Err(Error::invalid("number of selection events must be at least 1"));
        }
        Ok(())
    }
}

/// Binary pass/fail matrix for static ε-lexicase: 0 = within ε of the
/// population-wide best error on the case, 1 = not.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PassMatrix {
    rows: usize,
    cols: usize,
    fail: Vec<u8>,
}

impl PassMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// f_t(n): 0 if `individual` passes `case`, 1 otherwise.
    #[inline]
    pub fn get(&self, individual: usize, case: usize) -> u8 {
        self.fail[individual * self.cols + case]
    }

    pub fn row(&self, individual: usize) -> &[u8] {
        &self.fail[individual * self.cols..(individual + 1) * self.cols]
    }

    /// The binary matrix viewed as an error matrix of 0/1 values.
    pub fn to_error_matrix(&self) -> ErrorMatrix {
        ErrorMatrix::new(self.rows, self.cols, self.fail.iter().map(|&f| f as f64).collect())
            .expect("0/1 values always form a valid matrix")
    }
}

pub fn build_pass_matrix(errors: &ErrorMatrix, eps: &EpsilonVector) -> Result<PassMatrix> {
    eps.check_cols(errors)?;
    let mins = errors.column_mins();
    let (rows, cols) = (errors.rows(), errors.cols());
    let mut fail = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for t in 0..cols {
            fail.push(u8::from(!within_eps(errors.get(i, t), mins[t], eps[t])));
        }
    }
    Ok(PassMatrix { rows, cols, fail })
}

/// Per-case pool reduction used by the lexicase family.
#[derive(Clone, Copy, Debug)]
pub enum CaseFilter<'a> {
    /// Keep members whose error equals the pool minimum exactly.
    Exact(&'a ErrorMatrix),
    /// Keep members whose pass value equals the pool minimum.
    Pass(&'a PassMatrix),
    /// Keep members within the fixed ε_t of the pool minimum.
    SemiDynamic(&'a ErrorMatrix, &'a EpsilonVector),
    /// Keep members within the pool's own MAD of the pool minimum.
    Dynamic(&'a ErrorMatrix),
}

impl CaseFilter<'_> {
    pub fn rows(&self) -> usize {
        match self {
            CaseFilter::Exact(e) | CaseFilter::SemiDynamic(e, _) | CaseFilter::Dynamic(e) => e.rows(),
            CaseFilter::Pass(p) => p.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            CaseFilter::Exact(e) | CaseFilter::SemiDynamic(e, _) | CaseFilter::Dynamic(e) => e.cols(),
            CaseFilter::Pass(p) => p.cols(),
        }
    }

    /// Reduces `pool` on `case`. `scratch` is reused between calls.
    pub fn apply(&self, pool: &mut Vec<usize>, case: usize, scratch: &mut Vec<f64>) {
        match *self {
            CaseFilter::Exact(e) => {
                let elite = pool.iter().map(|&i| e.get(i, case)).fold(f64::INFINITY, f64::min);
                pool.retain(|&i| e.get(i, case) == elite);
            }
            CaseFilter::Pass(p) => {
                let elite = pool.iter().map(|&i| p.get(i, case)).min().unwrap_or(0);
                pool.retain(|&i| p.get(i, case) == elite);
            }
            CaseFilter::SemiDynamic(e, eps) => {
                let elite = pool.iter().map(|&i| e.get(i, case)).fold(f64::INFINITY, f64::min);
                let eps = eps[case];
                pool.retain(|&i| within_eps(e.get(i, case), elite, eps));
            }
            CaseFilter::Dynamic(e) => {
                scratch.clear();
                scratch.extend(pool.iter().map(|&i| e.get(i, case)));
                let elite = scratch.iter().copied().fold(f64::INFINITY, f64::min);
                let eps = mad_in_place(scratch);
                pool.retain(|&i| within_eps(e.get(i, case), elite, eps));
            }
        }
    }

    /// Pool left after consuming `order` (stopping early once one member remains).
    pub fn pool_after(&self, order: &[usize]) -> Vec<usize> {
        let mut pool: Vec<usize> = (0..self.rows()).collect();
        let mut scratch = Vec::new();
        for &case in order {
            if pool.len() <= 1 {
                break;
            }
            self.apply(&mut pool, case, &mut scratch);
        }
        pool
    }
}

/// One lexicase-style selection event: cases are drawn by an incremental
/// Fisher–Yates shuffle until the pool has one member or cases run out, then a
/// survivor is drawn uniformly.
pub fn run_event<R: Rng + ?Sized>(filter: CaseFilter<'_>, rng: &mut R) -> SelectionEvent {
    let (n, t) = (filter.rows(), filter.cols());
    let mut pool: Vec<usize> = (0..n).collect();
    let mut cases: Vec<usize> = (0..t).collect();
    let mut scratch = Vec::new();
    let mut depth = 0;
    while depth < t && pool.len() > 1 {
        let j = rng.gen_range(depth..t);
        cases.swap(depth, j);
        filter.apply(&mut pool, cases[depth], &mut scratch);
        depth += 1;
    }
    cases.truncate(depth);
    let selected = if pool.len() == 1 { pool[0] } else { pool[rng.gen_range(0..pool.len())] };
    SelectionEvent { selected, case_order: cases, case_depth: depth, final_pool_size: pool.len() }
}

pub fn lexicase_select_one<R: Rng + ?Sized>(errors: &ErrorMatrix, rng: &mut R) -> SelectionEvent {
    run_event(CaseFilter::Exact(errors), rng)
}

pub fn eps_lexicase_static_select_one<R: Rng + ?Sized>(pass: &PassMatrix, rng: &mut R) -> SelectionEvent {
    run_event(CaseFilter::Pass(pass), rng)
}

pub fn eps_lexicase_semidynamic_select_one<R: Rng + ?Sized>(
    errors: &ErrorMatrix,
    eps: &EpsilonVector,
    rng: &mut R,
) -> Result<SelectionEvent> {
    eps.check_cols(errors)?;
    Ok(run_event(CaseFilter::SemiDynamic(errors, eps), rng))
}

pub fn eps_lexicase_dynamic_select_one<R: Rng + ?Sized>(errors: &ErrorMatrix, rng: &mut R) -> SelectionEvent {
    run_event(CaseFilter::Dynamic(errors), rng)
}

/// Size-`r` tournament, competitors drawn with replacement; ties among the
/// drawn competitors are broken uniformly.
pub fn tournament_select_one<R: Rng + ?Sized>(
    fitness: &FitnessVector,
    r: usize,
    rng: &mut R,
) -> Result<SelectionEvent> {
    if r == 0 {
        return Err(Error::invalid("tournament size must be at least 1"));
    }
    let n = fitness.len();
    let mut best = Vec::with_capacity(r);
    let mut best_fit = f64::INFINITY;
    for _ in 0..r {
        let c = rng.gen_range(0..n);
        let f = fitness[c];
        if f < best_fit {
            best_fit = f;
            best.clear();
            best.push(c);
        } else if f == best_fit {
            best.push(c);
        }
    }
    let winner = if best.len() == 1 { best[0] } else { best[rng.gen_range(0..best.len())] };
    Ok(SelectionEvent::direct(winner, 1))
}

pub fn random_select_one<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<SelectionEvent> {
    if n == 0 {
        return Err(Error::invalid("cannot select from an empty population"));
    }
    Ok(SelectionEvent::direct(rng.gen_range(0..n), 1))
}

/// Generation-level state shared by all events: the pass matrix or ε vector is
/// derived once from this generation's errors.
pub(crate) enum Prepared<'a> {
    Random(usize),
    Tournament(FitnessVector, usize),
    Lexicase(&'a ErrorMatrix),
    Static(PassMatrix),
    SemiDynamic(&'a ErrorMatrix, EpsilonVector),
    Dynamic(&'a ErrorMatrix),
}

impl<'a> Prepared<'a> {
    pub(crate) fn new(errors: &'a ErrorMatrix, method: Method, tournament_size: usize) -> Self {
        match method {
            Method::Random => Prepared::Random(errors.rows()),
            Method::Tournament => {
                Prepared::Tournament(aggregate_fitness(errors, FitnessMetric::MeanOfValues), tournament_size)
            }
            Method::Lexicase => Prepared::Lexicase(errors),
            Method::EpsStatic => {
                Prepared::Static(build_pass_matrix(errors, &epsilon_static(errors)).expect("epsilon matches matrix"))
            }
            Method::EpsSemiDynamic => Prepared::SemiDynamic(errors, epsilon_static(errors)),
            Method::EpsDynamic => Prepared::Dynamic(errors),
        }
    }

    pub(crate) fn with_eps(
        errors: &'a ErrorMatrix,
        variant: LexicaseVariant,
        eps: Option<&EpsilonVector>,
    ) -> Result<Self> {
        let eps = match eps {
            Some(e) => {
                e.check_cols(errors)?;
                e.clone()
            }
            None => epsilon_static(errors),
        };
        Ok(match variant {
            LexicaseVariant::Lexicase => Prepared::Lexicase(errors),
            LexicaseVariant::EpsStatic => Prepared::Static(build_pass_matrix(errors, &eps)?),
            LexicaseVariant::EpsSemiDynamic => Prepared::SemiDynamic(errors, eps),
            LexicaseVariant::EpsDynamic => Prepared::Dynamic(errors),
        })
    }

    pub(crate) fn filter(&self) -> Option<CaseFilter<'_>> {
        match self {
            Prepared::Lexicase(e) => Some(CaseFilter::Exact(e)),
            Prepared::Static(p) => Some(CaseFilter::Pass(p)),
            Prepared::SemiDynamic(e, eps) => Some(CaseFilter::SemiDynamic(e, eps)),
            Prepared::Dynamic(e) => Some(CaseFilter::Dynamic(e)),
            Prepared::Random(_) | Prepared::Tournament(..) => None,
        }
    }

    pub(crate) fn select<R: Rng + ?Sized>(&self, rng: &mut R) -> SelectionEvent {
        match self {
            Prepared::Random(n) => SelectionEvent::direct(rng.gen_range(0..*n), 1),
            Prepared::Tournament(fit, r) => tournament_select_one(fit, *r, rng).expect("tournament size validated"),
            _ => run_event(self.filter().expect("lexicase family"), rng),
        }
    }
}

/// `config.ns` independent selection events. Event `i` draws from its own
/// stream derived from `(seed, i)`, so the result does not depend on `exec`.
pub fn select_parents(errors: &ErrorMatrix, config: &SelectionConfig, seed: u64) -> Result<Vec<SelectionEvent>> {
    select_parents_with(errors, config, seed, Exec::default())
}

pub fn select_parents_with(
    errors: &ErrorMatrix,
    config: &SelectionConfig,
    seed: u64,
    exec: Exec,
) -> Result<Vec<SelectionEvent>> {
    config.validate()?;
    let prepared = Prepared::new(errors, config.method, config.tournament_size);
    Ok(exec.map(config.ns, |i| {
        let mut rng = stream(seed, domain::SELECTION, i as u64);
        prepared.select(&mut rng)
    }))
}
