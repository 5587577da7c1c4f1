//! Real-coded genetic algorithm primitives and the baseline GA loop.
//!
//! Fitness is minimized. Mate pairs adjacent members in selection order and
//! blends them with one BLX-α coefficient per pair; mutation perturbs each
//! gene multiplicatively, `x ← x + ε∘x` with `ε ~ N(0, σ²)` drawn per gene.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::{BoxDomain, Objective};
use crate::rng::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
    pub fitness: Option<f64>,
}

impl Individual {
    pub fn new(genes: Vec<f64>) -> Self {
        Self { genes, fitness: None }
    }

    pub fn evaluated(genes: Vec<f64>, fitness: f64) -> Self {
        Self { genes, fitness: Some(fitness) }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population {
    pub members: Vec<Individual>,
    pub generation: usize,
}

impl Population {
    pub fn new(members: Vec<Individual>, generation: usize) -> Self {
        Self { members, generation }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Best evaluated member; ties go to the lower index.
    pub fn best(&self) -> Option<&Individual> {
        self.members
            .iter()
            .filter(|m| m.fitness.is_some())
            .min_by(|a, b| a.fitness.unwrap().total_cmp(&b.fitness.unwrap()))
    }
}

/// Hyperparameters shared by the GA and ASGA loops.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub initial_size: usize,
    pub offspring_size: usize,
    pub generations: usize,
    pub mate_probability: f64,
    pub mutation_probability: f64,
    pub blx_alpha: f64,
    pub mutation_sigma2: f64,
    pub seed: u64,
    /// Carry the best individual so far into every generation.
    pub elitism: bool,
    /// Clamp offspring to the domain before evaluation.
    pub clip_to_domain: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            initial_size: 200,
            offspring_size: 100,
            generations: 10,
            mate_probability: 0.5,
            mutation_probability: 0.5,
            blx_alpha: 1.0,
            mutation_sigma2: 0.1,
            seed: 0,
            elitism: true,
            clip_to_domain: true,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_size == 0 {
            return Err(Error::config("n0", "initial population size must be positive"));
        }
        if self.offspring_size == 0 {
            return Err(Error::config("n", "offspring size must be positive"));
        }
        if self.offspring_size > self.initial_size {
            return Err(Error::config("n", "offspring size N must not exceed N0"));
        }
        for (field, p) in
            [("mate_probability", self.mate_probability), ("mutation_probability", self.mutation_probability)]
        {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::config(field, "probability must lie in [0, 1]"));
            }
        }
        if !(self.blx_alpha >= 0.0 && self.blx_alpha.is_finite()) {
            return Err(Error::config("blx_alpha", "must be a finite non-negative number"));
        }
        if !(self.mutation_sigma2 > 0.0 && self.mutation_sigma2.is_finite()) {
            return Err(Error::config("mutation_sigma2", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Ga,
    Asga,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ga => "ga",
            Method::Asga => "asga",
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
        match s.trim().to_ascii_lowercase().as_str() {
            "ga" => Ok(Method::Ga),
            "asga" => Ok(Method::Asga),
            other => Err(Error::config("method", format!("unknown method '{other}'"))),
        }
    }
}

/// Best individual of one generation.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_genes: Vec<f64>,
    /// Objective calls made so far, including this generation.
    pub evaluations: usize,
}

/// Counters for the rarely taken paths of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Diagnostics {
    /// Reduced individuals pulled back toward the domain center.
    pub repairs: usize,
    /// Inactive samples produced by each back-mapping stage.
    pub rejection_samples: usize,
    pub hit_and_run_samples: usize,
    pub center_copies: usize,
    /// Local linear fits that fell back to a minimum-norm solution.
    pub rank_deficient_fits: usize,
}

impl Diagnostics {
    pub fn merge(&mut self, other: &Diagnostics) {
        self.repairs += other.repairs;
        self.rejection_samples += other.rejection_samples;
        self.hit_and_run_samples += other.hit_and_run_samples;
        self.center_copies += other.center_copies;
        self.rank_deficient_fits += other.rank_deficient_fits;
    }
}

/// Everything recorded about one optimization run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub method: Method,
    pub function: String,
    pub dim: usize,
    pub run: usize,
    pub seed: u64,
    pub generations: Vec<GenerationRecord>,
    pub diagnostics: Diagnostics,
}

impl RunRecord {
    pub fn final_best(&self) -> &GenerationRecord {
        self.generations.last().expect("a run records at least generation 0")
    }

    pub fn best_fitness_curve(&self) -> Vec<f64> {
        self.generations.iter().map(|g| g.best_fitness).collect()
    }
}

pub fn random_population(domain: &BoxDomain, count: usize, rng: &mut Rng) -> Population {
    let members = (0..count)
        .map(|_| {
            let genes = domain.lower().iter().zip(domain.upper()).map(|(l, u)| rng.random_range(*l..=*u)).collect();
            Individual::new(genes)
        })
        .collect();
    Population::new(members, 0)
}

/// The `count` fittest members, ordered by (fitness, original index).
pub fn select_best(pop: &Population, count: usize) -> Result<Population> {
    if let Some(index) = pop.members.iter().position(|m| m.fitness.is_none()) {
        return Err(Error::Unevaluated { index });
    }
    if count > pop.len() {
        return Err(Error::NotEnoughSamples { needed: count, have: pop.len() });
    }
    let mut order: Vec<usize> = (0..pop.len()).collect();
    // stable sort keeps index order among equal fitnesses
    order.sort_by(|&a, &b| pop.members[a].fitness.unwrap().total_cmp(&pop.members[b].fitness.unwrap()));
    let members = order[..count].iter().map(|&i| pop.members[i].clone()).collect();
    Ok(Population::new(members, pop.generation))
}

/// BLX-α children of `a` and `b` for blend coefficient `gamma`.
pub fn blend_pair(a: &[f64], b: &[f64], gamma: f64) -> (Vec<f64>, Vec<f64>) {
    let ca = a.iter().zip(b).map(|(x, y)| (1.0 - gamma) * x + gamma * y).collect();
    let cb = a.iter().zip(b).map(|(x, y)| gamma * x + (1.0 - gamma) * y).collect();
    (ca, cb)
}

/// Blend crossover over adjacent pairs; an odd trailing member passes through.
pub fn mate_blx(pop: &Population, probability: f64, blx_alpha: f64, rng: &mut Rng) -> Population {
    let mut members = pop.members.clone();
    for pair in members.chunks_exact_mut(2) {
        if rng.random::<f64>() >= probability {
            continue;
        }
        let gamma = -blx_alpha + (1.0 + 2.0 * blx_alpha) * rng.random::<f64>();
        let (ca, cb) = blend_pair(&pair[0].genes, &pair[1].genes, gamma);
        pair[0] = Individual::new(ca);
        pair[1] = Individual::new(cb);
    }
    Population::new(members, pop.generation)
}

/// `x + ε∘x` for a given noise vector.
pub fn mutate_with(x: &[f64], eps: &[f64]) -> Vec<f64> {
    x.iter().zip(eps).map(|(v, e)| v + e * v).collect()
}

/// Multiplicative Gaussian mutation applied to each member with `probability`.
pub fn mutate_gaussian(pop: &Population, probability: f64, sigma2: f64, rng: &mut Rng) -> Population {
    let normal = Normal::new(0.0, sigma2.sqrt()).expect("sigma2 validated positive");
    let members = pop
        .members
        .iter()
        .map(|m| {
            if rng.random::<f64>() >= probability {
                return m.clone();
            }
            let eps: Vec<f64> = (0..m.genes.len()).map(|_| normal.sample(rng)).collect();
            Individual::new(mutate_with(&m.genes, &eps))
        })
        .collect();
    Population::new(members, pop.generation)
}

/// Evaluates every member without a fitness, in parallel. Returns the number
/// of objective calls made.
pub fn evaluate_population(objective: &dyn Objective, pop: &mut Population) -> Result<usize> {
    let calls = pop.members.iter().filter(|m| m.fitness.is_none()).count();
    pop.members.par_iter_mut().filter(|m| m.fitness.is_none()).try_for_each(|m| {
        m.fitness = Some(objective.evaluate(&m.genes)?);
        Ok::<_, Error>(())
    })?;
    Ok(calls)
}

/// Replaces the worst member (last one on ties) with `elite`.
pub(crate) fn inject_elite(pop: &mut Population, elite: &Individual) {
    let worst = pop
        .members
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.fitness.unwrap_or(f64::INFINITY).total_cmp(&b.fitness.unwrap_or(f64::INFINITY)))
        .map(|(i, _)| i);
    if let Some(i) = worst {
        pop.members[i] = elite.clone();
    }
}

pub(crate) fn generation_record(pop: &Population, evaluations: usize) -> GenerationRecord {
    let best = pop.best().expect("population is evaluated");
    GenerationRecord {
        generation: pop.generation,
        best_fitness: best.fitness.unwrap(),
        best_genes: best.genes.clone(),
        evaluations,
    }
}

pub(crate) fn check_problem(objective: &dyn Objective, domain: &BoxDomain) -> Result<()> {
    if objective.dimension() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim(), actual: objective.dimension() });
    }
    Ok(())
}

/// Mutable state of a GA run between generations.
pub struct GaState<'a> {
    objective: &'a dyn Objective,
    domain: &'a BoxDomain,
    config: &'a EvolutionConfig,
    pub population: Population,
    pub elite: Individual,
    pub evaluations: usize,
}

impl<'a> GaState<'a> {
    /// Draws and evaluates the initial population.
    pub fn init(
        objective: &'a dyn Objective,
        domain: &'a BoxDomain,
        config: &'a EvolutionConfig,
        rng: &mut Rng,
    ) -> Result<Self> {
        config.validate()?;
        check_problem(objective, domain)?;
        let mut population = random_population(domain, config.initial_size, rng);
        let evaluations = evaluate_population(objective, &mut population)?;
        let elite = population.best().expect("non-empty").clone();
        Ok(Self { objective, domain, config, population, elite, evaluations })
    }

    /// One generation: select N → mate → mutate → clip → evaluate.
    pub fn step(&mut self, rng: &mut Rng) -> Result<()> {
        let cfg = self.config;
        let selected = select_best(&self.population, cfg.offspring_size)?;
        let mated = mate_blx(&selected, cfg.mate_probability, cfg.blx_alpha, rng);
        let mut next = mutate_gaussian(&mated, cfg.mutation_probability, cfg.mutation_sigma2, rng);
        for m in next.members.iter_mut() {
            if cfg.clip_to_domain {
                self.domain.clip(&mut m.genes);
            }
            // every offspring costs one evaluation, changed or not
            m.fitness = None;
        }
        next.generation = self.population.generation + 1;
        self.evaluations += evaluate_population(self.objective, &mut next)?;
        if cfg.elitism {
            inject_elite(&mut next, &self.elite);
        }
        let best = next.best().expect("non-empty").clone();
        if best.fitness < self.elite.fitness {
            self.elite = best;
        }
        self.population = next;
        Ok(())
    }

    pub fn record(&self) -> GenerationRecord {
        generation_record(&self.population, self.evaluations)
    }
}

/// The baseline GA.
pub fn run_ga(
    objective: &dyn Objective,
    domain: &BoxDomain,
    config: &EvolutionConfig,
    rng: &mut Rng,
) -> Result<RunRecord> {
    let mut state = GaState::init(objective, domain, config, rng)?;
    let mut generations = vec![state.record()];
    for _ in 0..config.generations {
        state.step(rng)?;
        generations.push(state.record());
    }
    Ok(RunRecord {
        method: Method::Ga,
        function: objective.name().to_string(),
        dim: domain.dim(),
        run: 0,
        seed: config.seed,
        generations,
        diagnostics: Diagnostics::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::{Benchmark, ObjectiveSpec};
    use crate::rng;
    use proptest::prelude::*;

    fn pop_with_fitness(fs: &[f64]) -> Population {
        let members = fs.iter().enumerate().map(|(i, f)| Individual::evaluated(vec![i as f64], *f)).collect();
        Population::new(members, 0)
    }

    #[test]
    fn random_population_is_contained_and_reproducible() {
        let d = BoxDomain::cube(0.0, 1.0, 2).unwrap();
        let p = random_population(&d, 1, &mut rng::from_seed(3));
        assert_eq!(p.len(), 1);
        assert!(d.contains(&p.members[0].genes));
        assert!(p.members[0].fitness.is_none());
        let a = random_population(&d, 50, &mut rng::from_seed(3));
        let b = random_population(&d, 50, &mut rng::from_seed(3));
        assert_eq!(a, b);
    }

    #[test]
    fn selection_orders_by_fitness_then_index() {
        let s = select_best(&pop_with_fitness(&[5.0, 1.0, 3.0]), 2).unwrap();
        assert_eq!(s.members.iter().map(|m| m.fitness.unwrap()).collect::<Vec<_>>(), vec![1.0, 3.0]);
        let all = select_best(&pop_with_fitness(&[5.0, 1.0, 3.0]), 3).unwrap();
        assert_eq!(all.members.iter().map(|m| m.genes[0]).collect::<Vec<_>>(), vec![1.0, 2.0, 0.0]);
        let tie = select_best(&pop_with_fitness(&[2.0, 2.0, 9.0]), 1).unwrap();
        assert_eq!(tie.members[0].genes, vec![0.0]);
    }

    #[test]
    fn selection_rejects_unevaluated() {
        let mut p = pop_with_fitness(&[1.0, 2.0]);
        p.members[1].fitness = None;
        assert!(matches!(select_best(&p, 1), Err(Error::Unevaluated { index: 1 })));
    }

    #[test]
    fn blend_formula_cases() {
        let (a, b) = blend_pair(&[0.0, 0.0], &[1.0, 1.0], 0.5);
        assert_eq!((a, b), (vec![0.5, 0.5], vec![0.5, 0.5]));
        let (a, b) = blend_pair(&[0.2, 3.0], &[1.0, -1.0], 0.0);
        assert_eq!((a, b), (vec![0.2, 3.0], vec![1.0, -1.0]));
        let (a, b) = blend_pair(&[0.2, 3.0], &[1.0, -1.0], 1.0);
        assert_eq!((a, b), (vec![1.0, -1.0], vec![0.2, 3.0]));
    }

    #[test]
    fn mutation_formula_cases() {
        assert_eq!(mutate_with(&[2.0, -4.0], &[0.0, 0.0]), vec![2.0, -4.0]);
        let m = mutate_with(&[2.0, -4.0], &[0.1, 0.1]);
        assert!((m[0] - 2.2).abs() < 1e-15 && (m[1] + 4.4).abs() < 1e-15);
        assert_eq!(mutate_with(&[0.0], &[123.0]), vec![0.0]);
    }

    #[test]
    fn mate_passes_odd_member_through() {
        let p = pop_with_fitness(&[1.0, 2.0, 3.0]);
        let m = mate_blx(&p, 1.0, 1.0, &mut rng::from_seed(1));
        assert_eq!(m.members[2], p.members[2]);
        assert!(m.members[0].fitness.is_none());
    }

    #[test]
    fn zero_generations_records_only_initial_best() {
        let spec = ObjectiveSpec::benchmark(Benchmark::Bohachevsky, 2).unwrap();
        let cfg = EvolutionConfig { generations: 0, ..Default::default() };
        let r = run_ga(&spec, &spec.domain, &cfg, &mut rng::from_seed(1)).unwrap();
        assert_eq!(r.generations.len(), 1);
        assert_eq!(r.final_best().evaluations, 200);
    }

    #[test]
    fn ga_is_elitist_and_deterministic() {
        let spec = ObjectiveSpec::benchmark(Benchmark::Bohachevsky, 2).unwrap();
        let cfg = EvolutionConfig::default();
        let a = run_ga(&spec, &spec.domain, &cfg, &mut rng::from_seed(5)).unwrap();
        let b = run_ga(&spec, &spec.domain, &cfg, &mut rng::from_seed(5)).unwrap();
        assert_eq!(a, b);
        let curve = a.best_fitness_curve();
        assert!(curve.windows(2).all(|w| w[1] <= w[0]), "{curve:?}");
        assert_eq!(a.final_best().evaluations, 200 + 10 * 100);
    }

    #[test]
    fn size_is_conserved_and_genes_clipped() {
        let spec = ObjectiveSpec::benchmark(Benchmark::Rastrigin, 4).unwrap();
        let cfg = EvolutionConfig { initial_size: 40, offspring_size: 20, ..Default::default() };
        let mut r = rng::from_seed(9);
        let mut state = GaState::init(&spec, &spec.domain, &cfg, &mut r).unwrap();
        for g in 1..=5 {
            state.step(&mut r).unwrap();
            assert_eq!(state.population.len(), 20);
            assert_eq!(state.population.generation, g);
            assert!(state.population.members.iter().all(|m| spec.domain.contains(&m.genes)));
        }
    }

    #[test]
    fn config_validation() {
        let bad = EvolutionConfig { offspring_size: 300, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::Config { field: "n", .. })));
        let bad = EvolutionConfig { mate_probability: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    proptest! {
        #[test]
        fn zero_probabilities_leave_genes_unchanged(seed in any::<u64>(), n in 1usize..12) {
            let d = BoxDomain::cube(-3.0, 3.0, 3).unwrap();
            let mut r = rng::from_seed(seed);
            let p = random_population(&d, n, &mut r);
            let m = mutate_gaussian(&mate_blx(&p, 0.0, 1.0, &mut r), 0.0, 0.1, &mut r);
            prop_assert_eq!(m, p);
        }
    }
}
