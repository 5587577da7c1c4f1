//! Fixtures shared by the criterion benchmarks.

use asga_core::objective::{Benchmark, Objective, ObjectiveSpec};
use asga_core::subspace::{build_subspace, ActiveDim, ActiveSubspace, SampleStore};
use asga_core::{random_population, rng};

/// `n` uniform samples of `function` in dimension `dim`.
pub fn sample_store(function: Benchmark, dim: usize, n: usize, seed: u64) -> (ObjectiveSpec, SampleStore) {
    let spec = ObjectiveSpec::benchmark(function, dim).expect("valid benchmark");
    let pop = random_population(&spec.domain, n, &mut rng::from_seed(seed));
    let mut store = SampleStore::new(dim);
    for m in &pop.members {
        store.push(&m.genes, spec.evaluate(&m.genes).expect("finite")).expect("matching dim");
    }
    (spec, store)
}

/// A one-dimensional active subspace built from [`sample_store`].
pub fn subspace(function: Benchmark, dim: usize, n: usize) -> (ObjectiveSpec, ActiveSubspace) {
    let (spec, store) = sample_store(function, dim, n, 1);
    let s = build_subspace(&store, &spec.domain, ActiveDim::Fixed(1)).expect("subspace");
    (spec, s)
}
