//! Population loop: generational selection-based steps, age-fitness Pareto
//! survival and deterministic crowding.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::error_model::{median_in_place, sanitize_error, semantic_diversity, ErrorMatrix, PENALTY};
use crate::exec::{domain, splitmix64, stream, Exec};
use crate::gp::canonical::{canonical_tokens, edit_distance};
use crate::gp::eval::{evaluate, SampleMatrix};
use crate::gp::tree::ProgramTree;
use crate::gp::variation::{ramped_half_and_half, vary};
use crate::selection::{select_parents_with, Method, SelectionConfig};

/// How the next generation is formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    Select(Method),
    /// Age-fitness Pareto survival.
    Afp,
    /// Deterministic crowding.
    Dc,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Select(Method::Random),
        Strategy::Select(Method::Tournament),
        Strategy::Select(Method::Lexicase),
        Strategy::Afp,
        Strategy::Dc,
        Strategy::Select(Method::EpsStatic),
        Strategy::Select(Method::EpsSemiDynamic),
        Strategy::Select(Method::EpsDynamic),
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Select(m) => m.name(),
            Strategy::Afp => "afp",
            Strategy::Dc => "dc",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "afp" => Ok(Strategy::Afp),
            "dc" => Ok(Strategy::Dc),
            _ => s.parse::<Method>().map(Strategy::Select),
        }
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.name().to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub population_size: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub generation_limit: usize,
    pub strategy: Strategy,
    pub tournament_size: usize,
    pub seed: u64,
    /// Keep-best: the best individual always survives into the next generation.
    pub elitism: bool,
    pub exec: Exec,
    /// Measure selection wall-clock time. Off by default so that metrics are
    /// byte-reproducible.
    pub record_timing: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            population_size: 1000,
            crossover_rate: 0.6,
            mutation_rate: 0.4,
            generation_limit: 1000,
            strategy: Strategy::Select(Method::EpsSemiDynamic),
            tournament_size: 2,
            seed: 0,
            elitism: true,
            exec: Exec::default(),
            record_timing: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return Err(Error::invalid("population size must be at least 2"));
        }
        if self.generation_limit == 0 {
            return Err(Error::invalid("generation limit must be positive"));
        }
        if self.tournament_size == 0 {
            return Err(Error::invalid("tournament size must be at least 1"));
        }
        let ok = |r: f64| r.is_finite() && (0.0..=1.0).contains(&r);
        if !ok(self.crossover_rate) || !ok(self.mutation_rate) {
            return Err(Error::invalid("variation rates must lie in [0, 1]"));
        }
        if (self.crossover_rate + self.mutation_rate - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "crossover and mutation rates sum to {}, expected 1",
                self.crossover_rate + self.mutation_rate
            )));
        }
        Ok(())
    }
}

/// Training inputs and target.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingData {
    pub inputs: SampleMatrix,
    pub target: Vec<f64>,
}

impl TrainingData {
    pub fn new(inputs: SampleMatrix, target: Vec<f64>) -> Result<Self> {
        if inputs.samples() != target.len() {
            return Err(Error::invalid(format!("{} samples but {} targets", inputs.samples(), target.len())));
        }
        if target.is_empty() {
            return Err(Error::invalid("training data has no samples"));
        }
        if target.iter().any(|v| !v.is_finite())
            || (0..inputs.features()).any(|f| inputs.column(f).iter().any(|v| !v.is_finite()))
        {
            return Err(Error::invalid("training data contains non-finite values"));
        }
        Ok(Self { inputs, target })
    }

    pub fn samples(&self) -> usize {
        self.target.len()
    }

    /// Population variance of the target.
    pub fn target_variance(&self) -> f64 {
        let n = self.target.len() as f64;
        let mean = self.target.iter().sum::<f64>() / n;
        self.target.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub tree: ProgramTree,
    pub semantics: Vec<f64>,
    /// Squared error per training case.
    pub errors: Vec<f64>,
    /// Mean squared error.
    pub fitness: f64,
    pub age: u32,
}

impl Individual {
    pub fn evaluate(tree: ProgramTree, data: &TrainingData, age: u32) -> Result<Self> {
        let semantics = evaluate(&tree, &data.inputs)?;
        let errors: Vec<f64> =
            semantics.iter().zip(&data.target).map(|(p, y)| sanitize_error((y - p) * (y - p))).collect();
        let fitness = mse(&errors);
        Ok(Self { tree, semantics, errors, fitness, age })
    }
}

fn mse(errors: &[f64]) -> f64 {
    (errors.iter().sum::<f64>() / errors.len() as f64).min(PENALTY)
}

/// Mean squared error of `tree` on arbitrary data (e.g. a test partition).
pub fn mse_on(tree: &ProgramTree, data: &TrainingData) -> Result<f64> {
    Individual::evaluate(tree.clone(), data, 0).map(|i| i.fitness)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub generation: usize,
    pub best_mse: f64,
    /// `best_mse` divided by the training target variance.
    pub norm_mse: f64,
    pub diversity: f64,
    pub median_case_depth: f64,
    pub sel_time_ms: f64,
}

pub struct Engine {
    config: EngineConfig,
    data: TrainingData,
    variance: f64,
    population: Vec<Individual>,
    generation: usize,
    metrics: Vec<RunMetrics>,
}

impl Engine {
    /// Validates the configuration and builds the initial population.
    pub fn new(config: EngineConfig, data: TrainingData) -> Result<Self> {
        config.validate()?;
        let n_vars = data.inputs.features();
        let population = config
            .exec
            .map(config.population_size, |i| {
                let mut rng = stream(config.seed, domain::INIT, i as u64);
                Individual::evaluate(ramped_half_and_half(&mut rng, i, n_vars), &data, 0)
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let variance = data.target_variance();
        Ok(Self { config, data, variance, population, generation: 0, metrics: Vec::new() })
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn data(&self) -> &TrainingData {
        &self.data
    }

    pub fn population(&self) -> &[Individual] {
        &self.population
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn metrics(&self) -> &[RunMetrics] {
        &self.metrics
    }

    pub fn error_matrix(&self) -> ErrorMatrix {
        let t = self.data.samples();
        let values = self.population.iter().flat_map(|i| i.errors.iter().copied()).collect();
        ErrorMatrix::new(self.population.len(), t, values).expect("errors are sanitized")
    }

    /// Lowest training MSE; ties go to the lowest index.
    pub fn best(&self) -> &Individual {
        &self.population[best_index(&self.population)]
    }

    /// Advances one generation and records its metrics.
    pub fn step(&mut self) -> Result<&RunMetrics> {
        let (case_depth, sel_ms) = match self.config.strategy {
            Strategy::Select(m) => self.step_generational(m)?,
            Strategy::Afp => self.step_afp()?,
            Strategy::Dc => self.step_dc()?,
        };
        self.generation += 1;
        let best_mse = self.best().fitness;
        let norm_mse = if self.variance > 0.0 { best_mse / self.variance } else { best_mse };
        self.metrics.push(RunMetrics {
            generation: self.generation,
            best_mse,
            norm_mse,
            diversity: semantic_diversity(&self.error_matrix()),
            median_case_depth: case_depth,
            sel_time_ms: if self.config.record_timing { sel_ms } else { 0.0 },
        });
        Ok(self.metrics.last().expect("just pushed"))
    }

    /// Steps until the generation limit.
    pub fn run(&mut self) -> Result<()> {
        while self.generation < self.config.generation_limit {
            self.step()?;
        }
        Ok(())
    }

    fn gen_domain(&self, tag: u64) -> u64 {
        domain::per_generation(tag, self.generation as u64)
    }

    fn make_children(
        &self,
        parents: impl Fn(usize, &mut crate::exec::StreamRng) -> (usize, usize) + Sync + Send,
    ) -> Result<Vec<Individual>> {
        let cfg = &self.config;
        let dom = self.gen_domain(domain::VARIATION);
        let n_vars = self.data.inputs.features();
        cfg.exec
            .map(cfg.population_size, |i| {
                let mut rng = stream(cfg.seed, dom, i as u64);
                let (a, b) = parents(i, &mut rng);
                let (pa, pb) = (&self.population[a], &self.population[b]);
                let (tree, _) = vary(&mut rng, &pa.tree, &pb.tree, cfg.crossover_rate, n_vars);
                Individual::evaluate(tree, &self.data, pa.age.max(pb.age))
            })
            .into_iter()
            .collect()
    }

    /// Selection-driven generational replacement. Returns (median case depth,
    /// selection milliseconds).
    pub fn step_generational(&mut self, method: Method) -> Result<(f64, f64)> {
        let n = self.config.population_size;
        let errors = self.error_matrix();
        let sel_seed = splitmix64(self.config.seed ^ splitmix64(self.gen_domain(domain::SELECTION)));
        let started = Instant::now();
        let events = select_parents_with(
            &errors,
            &SelectionConfig { method, tournament_size: self.config.tournament_size, ns: n },
            sel_seed,
            self.config.exec,
        )?;
        let sel_ms = started.elapsed().as_secs_f64() * 1e3;
        let mut depths: Vec<f64> = events.iter().map(|e| e.case_depth as f64).collect();
        let depth = median_in_place(&mut depths);

        let mut children = self.make_children(|i, _| (events[i].selected, events[(i + 1) % n].selected))?;
        if self.config.elitism {
            let best = self.best().clone();
            let worst = worst_index(&children);
            children[worst] = best;
        }
        for c in &mut children {
            c.age += 1;
        }
        self.population = children;
        Ok((depth, sel_ms))
    }

    /// Age-fitness Pareto survival.
    pub fn step_afp(&mut self) -> Result<(f64, f64)> {
        let n = self.config.population_size;
        let started = Instant::now();
        let mut children = self.make_children(|_, rng| (rng.gen_range(0..n), rng.gen_range(0..n)))?;

        let mut inject_rng = stream(self.config.seed, self.gen_domain(domain::INJECT), 0);
        let index = inject_rng.gen_range(0..n);
        let fresh = ramped_half_and_half(&mut inject_rng, index, self.data.inputs.features());
        children.push(Individual::evaluate(fresh, &self.data, 0)?);

        let mut pool = std::mem::take(&mut self.population);
        pool.extend(children);
        let mut rng = stream(self.config.seed, self.gen_domain(domain::SURVIVAL), 0);
        afp_survival(&mut pool, n, &mut rng);
        for ind in &mut pool {
            ind.age += 1;
        }
        self.population = pool;
        Ok((0.0, started.elapsed().as_secs_f64() * 1e3))
    }

    /// Deterministic crowding with random pairing.
    pub fn step_dc(&mut self) -> Result<(f64, f64)> {
        let n = self.config.population_size;
        let started = Instant::now();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut stream(self.config.seed, self.gen_domain(domain::PAIRING), 0));
        let sel_ms = started.elapsed().as_secs_f64() * 1e3;

        let children = self.make_children(|i, _| (order[i], order[(i + 1) % n]))?;
        let forms: Vec<Vec<String>> = self.config.exec.map_slice(&self.population, |p| canonical_tokens(&p.tree));
        let targets: Vec<usize> = self.config.exec.map(n, |i| {
            let child = canonical_tokens(&children[i].tree);
            let (a, b) = (order[i], order[(i + 1) % n]);
            let (da, db) = (edit_distance(&child, &forms[a]), edit_distance(&child, &forms[b]));
            match da.cmp(&db) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => {
                    let mut rng = stream(self.config.seed, self.gen_domain(domain::PAIRING), 1 + i as u64);
                    if rng.gen_bool(0.5) {
                        a
                    } else {
                        b
                    }
                }
            }
        });

        let mut next = self.population.clone();
        for (child, target) in children.into_iter().zip(targets) {
            if child.fitness < next[target].fitness {
                next[target] = child;
            }
        }
        for ind in &mut next {
            ind.age += 1;
        }
        self.population = next;
        Ok((0.0, sel_ms))
    }
}

fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.fitness < pop[best].fitness {
            best = i;
        }
    }
    best
}

fn worst_index(pop: &[Individual]) -> usize {
    let mut worst = 0;
    for (i, ind) in pop.iter().enumerate() {
        if ind.fitness >= pop[worst].fitness {
            worst = i;
        }
    }
    worst
}

/// `a` dominates `b` on (age, fitness), both minimised. Equal pairs count as
/// dominated so that clones can be culled.
fn age_fitness_dominates(a: &Individual, b: &Individual) -> bool {
    a.age <= b.age && a.fitness <= b.fitness
}

/// Shuffled pairing passes of size-2 survival tournaments until `pool` is back
/// to `target`. A pass that removes nothing falls back to dropping the
/// less fit member of one random pair.
pub(crate) fn afp_survival<R: Rng + ?Sized>(pool: &mut Vec<Individual>, target: usize, rng: &mut R) {
    while pool.len() > target {
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        idx.shuffle(rng);
        let mut dead = vec![false; pool.len()];
        let mut removed = 0;
        for pair in idx.chunks_exact(2) {
            if pool.len() - removed <= target {
                break;
            }
            let (a, b) = (pair[0], pair[1]);
            if age_fitness_dominates(&pool[a], &pool[b]) {
                dead[b] = true;
                removed += 1;
            } else if age_fitness_dominates(&pool[b], &pool[a]) {
                dead[a] = true;
                removed += 1;
            }
        }
        if removed == 0 {
            let a = rng.gen_range(0..pool.len());
            let mut b = rng.gen_range(0..pool.len() - 1);
            if b >= a {
                b += 1;
            }
            dead[if pool[a].fitness > pool[b].fitness { a } else { b }] = true;
        }
        let mut keep = dead.iter().map(|d| !d);
        pool.retain(|_| keep.next().expect("one flag per member"));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::StreamRng;
    use rand::SeedableRng;

    fn line_data() -> TrainingData {
        let rows: Vec<[f64; 1]> = (0..20).map(|i| [i as f64 / 4.0]).collect();
        let y = rows.iter().map(|r| 2.0 * r[0] + 1.0).collect();
        TrainingData::new(SampleMatrix::from_rows(&rows).unwrap(), y).unwrap()
    }

    fn small(strategy: Strategy, seed: u64) -> EngineConfig {
        EngineConfig { population_size: 40, generation_limit: 8, strategy, seed, ..Default::default() }
    }

    fn ind(age: u32, fitness: f64) -> Individual {
        Individual { tree: "+ x0 x0".parse().unwrap(), semantics: vec![], errors: vec![], fitness, age }
    }

    #[test]
    fn config_validation() {
        assert!(EngineConfig::default().validate().is_ok());
        let bad = EngineConfig { crossover_rate: 0.7, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = EngineConfig { population_size: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("nsga2".parse::<Strategy>().is_err());
    }

    #[test]
    fn init_population() {
        let e = Engine::new(small(Strategy::Select(Method::Lexicase), 1), line_data()).unwrap();
        assert_eq!(e.population().len(), 40);
        for i in e.population() {
            assert!((3..=50).contains(&i.tree.len()));
            assert_eq!(i.semantics.len(), 20);
            assert_eq!(i.age, 0);
        }
    }

    #[test]
    fn elitism_keeps_best_mse_monotone() {
        for s in Strategy::ALL {
            let mut e = Engine::new(small(s, 3), line_data()).unwrap();
            e.run().unwrap();
            assert_eq!(e.metrics().len(), 8, "{s}");
            for w in e.metrics().windows(2) {
                assert!(w[1].best_mse <= w[0].best_mse, "{s}");
            }
            assert!(e.population().iter().all(|i| (3..=50).contains(&i.tree.len())));
            assert_eq!(e.population().len(), 40);
        }
    }

    #[test]
    fn runs_are_reproducible_and_exec_independent() {
        for s in Strategy::ALL {
            let mut a = Engine::new(small(s, 9), line_data()).unwrap();
            let mut b = Engine::new(EngineConfig { exec: Exec::Sequential, ..small(s, 9) }, line_data()).unwrap();
            a.run().unwrap();
            b.run().unwrap();
            assert_eq!(a.metrics(), b.metrics(), "{s}");
            assert_eq!(a.best().tree, b.best().tree, "{s}");
        }
    }

    #[test]
    fn afp_removes_dominated_and_restores_size() {
        let mut rng = StreamRng::seed_from_u64(0);
        let mut pool = vec![ind(0, 1.0), ind(5, 2.0)];
        afp_survival(&mut pool, 1, &mut rng);
        assert_eq!(pool.len(), 1);
        assert_eq!((pool[0].age, pool[0].fitness), (0, 1.0));

        // mutually non-dominated: fallback drops the less fit
        let mut pool = vec![ind(0, 2.0), ind(5, 1.0)];
        afp_survival(&mut pool, 1, &mut rng);
        assert_eq!(pool[0].fitness, 1.0);

        let mut pool: Vec<Individual> = (0..31).map(|i| ind(i % 4, (i * 7 % 11) as f64)).collect();
        afp_survival(&mut pool, 15, &mut rng);
        assert_eq!(pool.len(), 15);
    }

    #[test]
    fn afp_injects_age_zero_individual() {
        let mut e = Engine::new(small(Strategy::Afp, 4), line_data()).unwrap();
        for _ in 0..5 {
            e.step().unwrap();
        }
        // survivors are aged after the step, so the freshest have age 1
        assert!(e.population().iter().all(|i| i.age >= 1));
        assert!(e.population().iter().any(|i| i.age <= 5));
    }

    #[test]
    fn dc_never_accepts_worse_children() {
        let mut e = Engine::new(small(Strategy::Dc, 5), line_data()).unwrap();
        let before: f64 = e.population().iter().map(|i| i.fitness).sum();
        e.step().unwrap();
        let after: f64 = e.population().iter().map(|i| i.fitness).sum();
        assert!(after <= before);
    }

    #[test]
    fn normalized_mse_uses_target_variance() {
        let d = line_data();
        let var = d.target_variance();
        let mut e = Engine::new(small(Strategy::Select(Method::Tournament), 2), d).unwrap();
        let m = e.step().unwrap().clone();
        assert!((m.norm_mse - m.best_mse / var).abs() <= 1e-12 * m.norm_mse.max(1.0));
        assert_eq!(m.sel_time_ms, 0.0);
    }
}
