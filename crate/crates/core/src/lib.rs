//! Genetic optimization in a data-driven active subspace.
//!
//! The crate provides the baseline real-coded GA ([`evolve`]), active subspace
//! construction from evaluated samples ([`subspace`]), the polytope machinery
//! that maps reduced individuals back to the full space ([`geometry`]), the
//! active-subspace GA driver ([`asga`]), benchmark objectives and RBF
//! surrogates ([`objective`]), and experiment orchestration ([`lab`]).
//!
//! ```
//! use asga_core::{rng, run_asga, AsgaConfig, Benchmark, EvolutionConfig, ObjectiveSpec};
//!
//! let spec = ObjectiveSpec::benchmark(Benchmark::Zakharov, 6).unwrap();
//! let config = AsgaConfig {
//!     evolution: EvolutionConfig { initial_size: 60, offspring_size: 20, generations: 3, ..Default::default() },
//!     ..Default::default()
//! };
//! let record = run_asga(&spec, &spec.domain, &config, &mut rng::from_seed(7)).unwrap();
//! assert_eq!(record.generations.len(), 4);
//! ```

pub mod asga;
pub mod error;
pub mod evolve;
pub mod geometry;
pub mod lab;
pub mod objective;
pub mod rng;
pub mod subspace;

pub use asga::{evaluation_budget, run_asga, AsgaConfig, AsgaState};
pub use error::{Error, Result};
pub use evolve::{
    mate_blx, mutate_gaussian, random_population, run_ga, select_best, Diagnostics, EvolutionConfig, GenerationRecord,
    Individual, Method, Population, RunRecord,
};
pub use geometry::{backward, chebyshev_center, inactive_polytope, sample_hit_and_run, sample_rejection, Polytope};
pub use lab::{aggregate, convergence_trace, gain, mean_gain, AggregateCurve, ExperimentPlan};
pub use objective::{fit_rbf, Benchmark, BoxDomain, Kernel, Objective, ObjectiveSpec, RbfSurrogate};
pub use subspace::{build_subspace, choose_active_dim, ActiveDim, ActiveSubspace, SampleStore};
