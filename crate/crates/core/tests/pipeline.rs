use asga_core::evolve::Method;
use asga_core::lab::{self, ExperimentPlan};
use asga_core::objective::{fit_rbf, Benchmark, Dataset, Kernel, Objective, ObjectiveSpec, Penalized};
use asga_core::subspace::ActiveDim;
use asga_core::{rng, run_asga, run_ga, AsgaConfig, EvolutionConfig};

fn small(generations: usize) -> EvolutionConfig {
    EvolutionConfig { initial_size: 80, offspring_size: 20, generations, ..Default::default() }
}

#[test]
fn surrogate_from_csv_is_optimized_inside_its_box() {
    let mut text = String::from("x1,x2,x3,lift_to_drag\n");
    for i in 0..40 {
        let x = [(i * 13 % 40) as f64 / 39.0, (i * 7 % 40) as f64 / 39.0, i as f64 / 39.0];
        let y = (x[0] - 0.2).powi(2) + 0.5 * (x[1] - 0.7).powi(2) + 0.1 * x[2];
        text += &format!("{},{},{},{}\n", x[0], x[1], x[2], -y);
    }
    let data = Dataset::from_reader(text.as_bytes()).unwrap();
    let surrogate = fit_rbf(&data.inputs, &data.outputs, Kernel::ThinPlate, 1.0).unwrap().with_penalty(10.0);
    let domain = surrogate.input_domain().unwrap();
    let objective = Penalized { surrogate, domain: domain.clone() };
    let evolution = EvolutionConfig { clip_to_domain: false, ..small(4) };
    let config = AsgaConfig { evolution, ..Default::default() };
    let record = run_asga(&objective, &domain, &config, &mut rng::from_seed(3)).unwrap();
    assert_eq!(record.function, "rbf");
    let best = record.final_best();
    assert!(domain.contains(&best.best_genes));
    assert!(best.best_fitness < 0.0);
    assert_eq!(objective.evaluate(&[2.0, 0.5, 0.5]).unwrap(), 10.0);
}

#[test]
fn automatic_active_dimension_runs_end_to_end() {
    let spec = ObjectiveSpec::benchmark(Benchmark::Zakharov, 8).unwrap();
    let config =
        AsgaConfig { evolution: small(5), active_dim: ActiveDim::Auto, backward_count: 4, ..Default::default() };
    let record = run_asga(&spec, &spec.domain, &config, &mut rng::from_seed(1)).unwrap();
    let curve = record.best_fitness_curve();
    assert!(curve.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(record.final_best().evaluations, 80 + 5 * 20);
}

#[test]
fn ga_and_asga_share_the_initial_best_under_the_same_stream() {
    let spec = ObjectiveSpec::benchmark(Benchmark::Schaffer7, 6).unwrap();
    let ga = run_ga(&spec, &spec.domain, &small(2), &mut rng::from_seed(9)).unwrap();
    let config = AsgaConfig { evolution: small(2), ..Default::default() };
    let asga = run_asga(&spec, &spec.domain, &config, &mut rng::from_seed(9)).unwrap();
    assert_eq!(ga.generations[0], asga.generations[0]);
}

#[test]
fn bench_outputs_round_trip_through_a_directory() {
    let mut plan = ExperimentPlan::desk(5);
    plan.cells.retain(|c| c.dim == 2);
    plan.cells.truncate(2);
    plan.runs_per_cell = 2;
    let records = plan.run_all().unwrap();
    assert_eq!(records.len(), 2 * 2 * 2);

    let dir = tempfile::tempdir().unwrap();
    lab::write_bench_outputs(dir.path(), &records).unwrap();
    let back = lab::read_runs_dir(&dir.path().join("runs")).unwrap();
    assert_eq!(lab::group_records(&back).len(), 4);
    for (key, runs) in lab::group_records(&records) {
        let read = &lab::group_records(&back)[&key];
        assert_eq!(read.len(), runs.len());
        for (a, b) in read.iter().zip(&runs) {
            assert_eq!(a.generations, b.generations);
        }
    }
    let (gains, _) = lab::gain_tables(&back).unwrap();
    assert!(gains.iter().any(|g| g.method == Method::Asga));
    assert!(gains.iter().all(|g| g.g_last >= 1.0));
}
