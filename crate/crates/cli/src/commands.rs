use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use anyhow::{Context, Result};
use asga_core::evolve::RunRecord;
use asga_core::geometry::BackwardOptions;
use asga_core::lab::{self, ExperimentPlan};
use asga_core::objective::{read_dataset, Objective, Penalized};
use asga_core::subspace::{bootstrap_eigenvalues, choose_active_dim, SampleStore};
use asga_core::{
    fit_rbf, random_population, rng, run_asga, run_ga, ActiveDim, AsgaConfig, BoxDomain, EvolutionConfig, Kernel,
    Method, ObjectiveSpec,
};
use rayon::prelude::*;

use crate::config::{parse_field, ConfigError, FileConfig};
use crate::{BenchArgs, Cli, Command, EigsArgs, EvolutionArgs, OptimizeArgs, ReportArgs};

fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn require<T>(value: Option<T>, field: &str) -> Result<T, ConfigError> {
    value.ok_or_else(|| ConfigError(format!("missing required setting '{field}'")))
}

pub fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    if let Some(threads) = pick(cli.threads, file.threads) {
        if threads == 0 {
            return Err(ConfigError("threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    let out_dir = pick(cli.out_dir, file.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    match cli.command {
        Command::Optimize(args) => optimize(args, &file, &out_dir),
        Command::Bench(args) => bench(args, &file, &out_dir),
        Command::Eigs(args) => eigs(args, &file, &out_dir),
        Command::Report(args) => report(args, &out_dir),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

fn evolution_config(args: &EvolutionArgs, file: &FileConfig, base: EvolutionConfig) -> EvolutionConfig {
    EvolutionConfig {
        mate_probability: pick(args.mate_probability, file.mate_probability).unwrap_or(base.mate_probability),
        mutation_probability: pick(args.mutation_probability, file.mutation_probability)
            .unwrap_or(base.mutation_probability),
        blx_alpha: pick(args.blx_alpha, file.blx_alpha).unwrap_or(base.blx_alpha),
        mutation_sigma2: pick(args.mutation_sigma2, file.mutation_sigma2).unwrap_or(base.mutation_sigma2),
        ..base
    }
}

fn active_dim(args: &EvolutionArgs, file: &FileConfig) -> Result<ActiveDim, ConfigError> {
    match pick(args.active_dim.clone(), file.active_dim.clone()) {
        Some(text) => parse_field("active_dim", &text),
        None => Ok(ActiveDim::Fixed(1)),
    }
}

fn backward_options(args: &EvolutionArgs, file: &FileConfig) -> BackwardOptions {
    let base = BackwardOptions::default();
    BackwardOptions { burn_in_per_dim: pick(args.burn_in, file.burn_in).unwrap_or(base.burn_in_per_dim), ..base }
}

fn optimize(args: OptimizeArgs, file: &FileConfig, out_dir: &Path) -> Result<()> {
    let function = require(pick(args.function, file.function.clone()), "function")?;
    let method: Method = parse_field("method", &pick(args.method, file.method.clone()).unwrap_or("ga".into()))?;
    let seed = pick(args.seed, file.seed).unwrap_or(0);
    let defaults = EvolutionConfig::default();
    let mut evolution = evolution_config(
        &args.evolution,
        file,
        EvolutionConfig {
            initial_size: pick(args.n0, file.n0).unwrap_or(defaults.initial_size),
            offspring_size: pick(args.n, file.n).unwrap_or(defaults.offspring_size),
            generations: pick(args.generations, file.generations).unwrap_or(defaults.generations),
            seed,
            ..defaults
        },
    );
    let dim_flag = pick(args.dim, file.dim);

    let (objective, domain, spec): (Box<dyn Objective>, BoxDomain, Option<ObjectiveSpec>) = if function == "rbf" {
        let path = require(pick(args.dataset, file.dataset.clone()), "dataset")?;
        let data = read_dataset(&path).with_context(|| format!("reading dataset {}", path.display()))?;
        let kernel: Kernel = match pick(args.kernel, file.kernel.clone()) {
            Some(k) => parse_field("kernel", &k)?,
            None => Kernel::default(),
        };
        let shape = pick(args.shape, file.shape).unwrap_or(1.0);
        let penalty = pick(args.penalty, file.penalty).unwrap_or(asga_core::objective::rbf::DEFAULT_PENALTY);
        let surrogate = fit_rbf(&data.inputs, &data.outputs, kernel, shape)?.with_penalty(penalty);
        let domain = surrogate.input_domain()?;
        if let Some(d) = dim_flag.filter(|&d| d != domain.dim()) {
            return Err(
                ConfigError(format!("dim {d} does not match the dataset's {} input columns", domain.dim())).into()
            );
        }
        // points outside the data box must reach the penalty instead of being clipped
        evolution.clip_to_domain = false;
        (Box::new(Penalized { surrogate, domain: domain.clone() }), domain, None)
    } else {
        let spec = ObjectiveSpec::by_name(&function, dim_flag.unwrap_or(2))?;
        (Box::new(spec.clone()), spec.domain.clone(), Some(spec))
    };

    let label = format!("{function}:{}", domain.dim());
    let mut r = rng::stream(seed, rng::cell_hash(&label), 0);
    let start = Instant::now();
    let record = match method {
        Method::Ga => run_ga(objective.as_ref(), &domain, &evolution, &mut r)?,
        Method::Asga => {
            let config = AsgaConfig {
                evolution,
                active_dim: active_dim(&args.evolution, file)?,
                backward_count: pick(args.evolution.backward, file.backward).unwrap_or(2),
                backward: backward_options(&args.evolution, file),
            };
            run_asga(objective.as_ref(), &domain, &config, &mut r)?
        }
    };
    let wall = start.elapsed().as_secs_f64();

    create_dir(out_dir)?;
    let stem = format!("optimize_{function}_d{}_{method}_s{seed}", record.dim);
    let runs_path = out_dir.join(format!("{stem}.csv"));
    lab::write_runs_csv(fs::File::create(&runs_path)?, std::slice::from_ref(&record))?;
    if let Some(spec) = &spec {
        if let (Some(point), Some(value)) = (&spec.known_optimum_point, spec.known_optimum_value) {
            let trace = lab::convergence_trace(&record, point, value);
            lab::write_trace_csv(fs::File::create(out_dir.join(format!("{stem}_trace.csv")))?, &trace)?;
        }
    }
    let best = record.final_best();
    let d = &record.diagnostics;
    println!(
        "function={function} method={method} dim={} best_fitness={} evaluations={} wall_time={wall:.3}s output={}",
        record.dim,
        best.best_fitness,
        best.evaluations,
        runs_path.display()
    );
    if method == Method::Asga {
        eprintln!(
            "back-mapping: {} rejection, {} hit-and-run, {} center copies, {} repairs, {} rank-deficient fits",
            d.rejection_samples, d.hit_and_run_samples, d.center_copies, d.repairs, d.rank_deficient_fits
        );
    }
    Ok(())
}

fn bench(args: BenchArgs, file: &FileConfig, out_dir: &Path) -> Result<()> {
    let seed = pick(args.seed, file.seed).unwrap_or(0);
    let plan_name = pick(args.plan, file.plan.clone()).unwrap_or("desk".into());
    let mut plan = match plan_name.as_str() {
        "desk" => ExperimentPlan::desk(seed),
        "full" => ExperimentPlan::full(seed),
        other => return Err(ConfigError(format!("invalid plan: '{other}' (expected desk or full)")).into()),
    };
    if let Some(runs) = pick(args.runs, file.runs) {
        plan.runs_per_cell = runs;
    }
    plan.evolution = evolution_config(&args.evolution, file, plan.evolution.clone());
    plan.active_dim = active_dim(&args.evolution, file)?;
    plan.backward_count = pick(args.evolution.backward, file.backward).unwrap_or(plan.backward_count);
    plan.backward = backward_options(&args.evolution, file);
    plan.validate()?;

    let jobs: Vec<_> = plan
        .cells
        .iter()
        .flat_map(|c| plan.methods.iter().flat_map(move |&m| (0..plan.runs_per_cell).map(move |r| (c, m, r))))
        .collect();
    let total = jobs.len();
    let done = AtomicUsize::new(0);
    let start = Instant::now();
    let records: Vec<RunRecord> = jobs
        .into_par_iter()
        .map(|(cell, method, run)| {
            let record = plan.run_one(cell, method, run)?;
            let n = done.fetch_add(1, Ordering::Relaxed) + 1;
            eprintln!(
                "[{n}/{total}] {} d={} {method} run {run}: best {:e} ({:.1}s)",
                cell.function,
                cell.dim,
                record.final_best().best_fitness,
                start.elapsed().as_secs_f64()
            );
            Ok(record)
        })
        .collect::<asga_core::Result<_>>()?;

    lab::write_bench_outputs(out_dir, &records)?;
    println!("plan={plan_name} runs={} output={}", records.len(), out_dir.display());
    Ok(())
}

fn eigs(args: EigsArgs, file: &FileConfig, out_dir: &Path) -> Result<()> {
    let function = require(pick(args.function, file.function.clone()), "function")?;
    let spec = ObjectiveSpec::by_name(&function, pick(args.dim, file.dim).unwrap_or(15))?;
    let samples = pick(args.samples, file.samples).unwrap_or(2000);
    let n_boot = pick(args.n_boot, file.n_boot).unwrap_or(100);
    let seed = pick(args.seed, file.seed).unwrap_or(0);
    let dim = spec.domain.dim();
    if samples < dim + 2 {
        return Err(ConfigError(format!("invalid samples: need at least dim + 2 = {}", dim + 2)).into());
    }

    let mut r = rng::stream(seed, rng::cell_hash(&format!("eigs:{function}:{dim}")), 0);
    let population = random_population(&spec.domain, samples, &mut r);
    let mut store = SampleStore::new(dim);
    for m in &population.members {
        store.push(&m.genes, spec.evaluate(&m.genes)?)?;
    }
    let spectrum = bootstrap_eigenvalues(&store, &spec.domain, n_boot, &mut r)?;

    create_dir(out_dir)?;
    let path = out_dir.join(format!("eigs_{function}_d{dim}.csv"));
    spectrum.write_csv(fs::File::create(&path)?)?;
    println!(
        "function={function} dim={dim} leading_eigenvalue={} spectral_gap_dim={} output={}",
        spectrum.eigenvalues[0],
        choose_active_dim(&spectrum.eigenvalues),
        path.display()
    );
    Ok(())
}

fn report(args: ReportArgs, out_dir: &Path) -> Result<()> {
    let dir = args.input.unwrap_or_else(|| out_dir.to_path_buf());
    let runs_dir = dir.join("runs");
    let records = lab::read_runs_dir(&runs_dir).with_context(|| format!("reading {}", runs_dir.display()))?;
    if records.is_empty() {
        anyhow::bail!("no run files found in {}", runs_dir.display());
    }
    let (gains, curve) = lab::gain_tables(&records)?;
    lab::write_gains_csv(fs::File::create(dir.join("gains.csv"))?, &gains)?;
    lab::write_gain_curve_csv(fs::File::create(dir.join("gain_curve.csv"))?, &curve)?;
    for g in &gains {
        println!(
            "{:<12} {:<5} dim {:>3}  G(1) {:>12.3}  G(last) {:>12.3}",
            g.function, g.method, g.dim, g.g_first, g.g_last
        );
    }
    Ok(())
}
