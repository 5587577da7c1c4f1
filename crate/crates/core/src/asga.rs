//! The active-subspace GA.
//!
//! Each generation selects the `N/B` fittest individuals, rebuilds the active
//! subspace from every sample evaluated so far, projects the selection onto
//! it, mates and mutates there, and maps each reduced individual back to `B`
//! full-space points. Reduced genes are unconstrained; a reduced point with no
//! pre-image in the domain is pulled toward the image of the domain center by
//! repeated halving until one exists.

use crate::error::{Error, Result};
use crate::evolve::{
    check_problem, evaluate_population, generation_record, inject_elite, mate_blx, mutate_gaussian, random_population,
    select_best, Diagnostics, EvolutionConfig, GenerationRecord, Individual, Method, Population, RunRecord,
};
use crate::geometry::{backward_with, chebyshev_center, inactive_polytope, BackwardOptions};
use crate::objective::{BoxDomain, Objective};
use crate::rng::Rng;
use crate::subspace::{build_subspace, ActiveDim, ActiveSubspace, SampleStore};

/// Halvings tried before falling back to the domain-center image.
pub const MAX_REPAIR_HALVINGS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct AsgaConfig {
    pub evolution: EvolutionConfig,
    pub active_dim: ActiveDim,
    /// Full-space points generated per reduced individual (`B`).
    pub backward_count: usize,
    pub backward: BackwardOptions,
}

impl Default for AsgaConfig {
    fn default() -> Self {
        Self {
            evolution: EvolutionConfig::default(),
            active_dim: ActiveDim::Fixed(1),
            backward_count: 2,
            backward: BackwardOptions::default(),
        }
    }
}

impl AsgaConfig {
    /// Checks the configuration against a problem of dimension `k`.
    pub fn validate(&self, k: usize) -> Result<()> {
        self.evolution.validate()?;
        let (n0, n, b) = (self.evolution.initial_size, self.evolution.offspring_size, self.backward_count);
        if b == 0 {
            return Err(Error::config("backward", "B must be at least 1"));
        }
        if n % b != 0 {
            return Err(Error::config("backward", format!("B must divide N (N = {n}, B = {b})")));
        }
        if n / b < 2 {
            return Err(Error::config("backward", format!("N/B must be at least 2 for mating, got {}", n / b)));
        }
        if n0 < k + 2 {
            return Err(Error::config("n0", format!("N0 must be at least k + 2 = {}", k + 2)));
        }
        if k < 2 {
            return Err(Error::config("dim", "an active subspace needs k >= 2"));
        }
        if let ActiveDim::Fixed(m) = self.active_dim {
            if m == 0 || m >= k {
                return Err(Error::config("active_dim", format!("M must satisfy 1 <= M < k = {k}, got {m}")));
            }
        }
        Ok(())
    }
}

/// What one ASGA generation did, for inspection and tests.
#[derive(Debug, Clone)]
pub struct StepReport {
    pub subspace: ActiveSubspace,
    /// Reduced individuals after mate, mutation and any repair.
    pub reduced: Vec<Vec<f64>>,
    /// Back-mapped offspring before elitism; entries `i*B..(i+1)*B` come from `reduced[i]`.
    pub offspring: Vec<Vec<f64>>,
    pub diagnostics: Diagnostics,
}

pub struct AsgaState<'a> {
    objective: &'a dyn Objective,
    domain: &'a BoxDomain,
    config: &'a AsgaConfig,
    pub population: Population,
    pub elite: Individual,
    pub evaluations: usize,
    pub store: SampleStore,
    pub diagnostics: Diagnostics,
}

impl<'a> AsgaState<'a> {
    pub fn init(
        objective: &'a dyn Objective,
        domain: &'a BoxDomain,
        config: &'a AsgaConfig,
        rng: &mut Rng,
    ) -> Result<Self> {
        check_problem(objective, domain)?;
        config.validate(domain.dim())?;
        let mut population = random_population(domain, config.evolution.initial_size, rng);
        let evaluations = evaluate_population(objective, &mut population)?;
        let mut store = SampleStore::new(domain.dim());
        for m in &population.members {
            store.push(&m.genes, m.fitness.unwrap())?;
        }
        let elite = population.best().expect("non-empty").clone();
        Ok(Self {
            objective,
            domain,
            config,
            population,
            elite,
            evaluations,
            store,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn step(&mut self, rng: &mut Rng) -> Result<StepReport> {
        let evo = &self.config.evolution;
        let b = self.config.backward_count;
        let selected = select_best(&self.population, evo.offspring_size / b)?;
        let subspace = build_subspace(&self.store, self.domain, self.config.active_dim)?;
        let mut diag = Diagnostics { rank_deficient_fits: subspace.rank_deficient_fits, ..Default::default() };

        let reduced = Population::new(
            selected.members.iter().map(|m| Individual::new(subspace.forward(&m.genes))).collect(),
            selected.generation,
        );
        let mated = mate_blx(&reduced, evo.mate_probability, evo.blx_alpha, rng);
        let mutated = mutate_gaussian(&mated, evo.mutation_probability, evo.mutation_sigma2, rng);

        let center_image = subspace.forward(&self.domain.center());
        let mut reduced_out = Vec::with_capacity(mutated.len());
        let mut offspring = Vec::with_capacity(evo.offspring_size);
        for m in &mutated.members {
            let mut mu = m.genes.clone();
            let outcome = match backward_with(&subspace, &mu, b, self.config.backward, rng) {
                Err(Error::Infeasible) => {
                    mu = repair(&subspace, &mu, &center_image)?;
                    diag.repairs += 1;
                    backward_with(&subspace, &mu, b, self.config.backward, rng)?
                }
                other => other?,
            };
            diag.rejection_samples += outcome.stages.rejection;
            diag.hit_and_run_samples += outcome.stages.hit_and_run;
            diag.center_copies += outcome.stages.center_copies;
            offspring.extend(outcome.points);
            reduced_out.push(mu);
        }

        let mut next =
            Population::new(offspring.iter().cloned().map(Individual::new).collect(), self.population.generation + 1);
        self.evaluations += evaluate_population(self.objective, &mut next)?;
        if evo.elitism {
            inject_elite(&mut next, &self.elite);
        }
        for m in &next.members {
            self.store.push(&m.genes, m.fitness.unwrap())?;
        }
        let best = next.best().expect("non-empty").clone();
        if best.fitness < self.elite.fitness {
            self.elite = best;
        }
        self.population = next;
        self.diagnostics.merge(&diag);
        Ok(StepReport { subspace, reduced: reduced_out, offspring, diagnostics: diag })
    }

    pub fn record(&self) -> GenerationRecord {
        generation_record(&self.population, self.evaluations)
    }
}

/// Halves `mu` toward `target` until its inactive polytope is non-empty.
pub fn repair(subspace: &ActiveSubspace, mu: &[f64], target: &[f64]) -> Result<Vec<f64>> {
    let mut current = mu.to_vec();
    for _ in 0..MAX_REPAIR_HALVINGS {
        current.iter_mut().zip(target).for_each(|(c, t)| *c = 0.5 * (*c + t));
        match chebyshev_center(&inactive_polytope(subspace, &current)?) {
            Ok(_) => return Ok(current),
            Err(Error::Infeasible) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(target.to_vec())
}

/// The active-subspace GA.
pub fn run_asga(
    objective: &dyn Objective,
    domain: &BoxDomain,
    config: &AsgaConfig,
    rng: &mut Rng,
) -> Result<RunRecord> {
    let mut state = AsgaState::init(objective, domain, config, rng)?;
    let mut generations = vec![state.record()];
    for _ in 0..config.evolution.generations {
        state.step(rng)?;
        generations.push(state.record());
    }
    Ok(RunRecord {
        method: Method::Asga,
        function: objective.name().to_string(),
        dim: domain.dim(),
        run: 0,
        seed: config.evolution.seed,
        generations,
        diagnostics: state.diagnostics,
    })
}

/// Total objective calls made by a run.
pub fn evaluation_budget(record: &RunRecord) -> usize {
    record.generations.last().map_or(0, |g| g.evaluations)
}
