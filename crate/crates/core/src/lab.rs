//! Experiment orchestration: repeated seeded runs, per-generation aggregation,
//! relative gains, convergence traces and their CSV files.
//!
//! Run `i` of a cell draws from `rng::stream(master_seed, hash("function:dim"), i)`,
//! so GA and ASGA runs with the same index start from the same initial
//! population and adding cells never perturbs existing ones.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::asga::{run_asga, AsgaConfig};
use crate::error::{Error, Result};
use crate::evolve::{run_ga, EvolutionConfig, GenerationRecord, Method, RunRecord};
use crate::geometry::BackwardOptions;
use crate::objective::{Benchmark, ObjectiveSpec};
use crate::rng;
use crate::subspace::ActiveDim;

/// One benchmark at one dimension with its budget.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub function: Benchmark,
    pub dim: usize,
    pub initial_size: usize,
    pub offspring_size: usize,
    pub generations: usize,
}

impl Cell {
    pub fn label(&self) -> String {
        format!("{}:{}", self.function, self.dim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub cells: Vec<Cell>,
    pub methods: Vec<Method>,
    pub runs_per_cell: usize,
    pub master_seed: u64,
    /// Operator settings; sizes and generations come from each cell.
    pub evolution: EvolutionConfig,
    pub active_dim: ActiveDim,
    pub backward_count: usize,
    pub backward: BackwardOptions,
}

impl ExperimentPlan {
    fn grid(budgets: &[(usize, usize, usize, usize)], runs: usize, master_seed: u64) -> Self {
        let cells = budgets
            .iter()
            .flat_map(|&(dim, n0, n, gens)| {
                Benchmark::ALL.into_iter().map(move |function| Cell {
                    function,
                    dim,
                    initial_size: n0,
                    offspring_size: n,
                    generations: gens,
                })
            })
            .collect();
        Self {
            cells,
            methods: vec![Method::Ga, Method::Asga],
            runs_per_cell: runs,
            master_seed,
            evolution: EvolutionConfig::default(),
            active_dim: ActiveDim::Fixed(1),
            backward_count: 2,
            backward: BackwardOptions::default(),
        }
    }

    /// Small budgets that finish in minutes: dims 2 and 15, five runs.
    pub fn desk(master_seed: u64) -> Self {
        Self::grid(&[(2, 200, 100, 10), (15, 500, 100, 15)], 5, master_seed)
    }

    /// Full budgets: dims 2, 15 and 40, fifteen runs. Takes hours.
    pub fn full(master_seed: u64) -> Self {
        Self::grid(&[(2, 200, 100, 10), (15, 2000, 200, 30), (40, 5000, 1000, 50)], 15, master_seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs_per_cell == 0 {
            return Err(Error::config("runs", "runs per cell must be at least 1"));
        }
        for cell in &self.cells {
            let cfg = self.asga_config(cell);
            cfg.evolution.validate()?;
            if self.methods.contains(&Method::Asga) {
                cfg.validate(cell.dim)?;
            }
        }
        Ok(())
    }

    pub fn evolution_config(&self, cell: &Cell) -> EvolutionConfig {
        EvolutionConfig {
            initial_size: cell.initial_size,
            offspring_size: cell.offspring_size,
            generations: cell.generations,
            seed: self.master_seed,
            ..self.evolution.clone()
        }
    }

    pub fn asga_config(&self, cell: &Cell) -> AsgaConfig {
        AsgaConfig {
            evolution: self.evolution_config(cell),
            active_dim: self.active_dim,
            backward_count: self.backward_count,
            backward: self.backward,
        }
    }

    /// Executes one run.
    pub fn run_one(&self, cell: &Cell, method: Method, run: usize) -> Result<RunRecord> {
        let spec = ObjectiveSpec::benchmark(cell.function, cell.dim)?;
        let mut r = rng::stream(self.master_seed, rng::cell_hash(&cell.label()), run as u64);
        let mut record = match method {
            Method::Ga => run_ga(&spec, &spec.domain, &self.evolution_config(cell), &mut r)?,
            Method::Asga => run_asga(&spec, &spec.domain, &self.asga_config(cell), &mut r)?,
        };
        record.run = run;
        Ok(record)
    }

    /// Every (cell, method, run) in parallel; results in plan order.
    pub fn run_all(&self) -> Result<Vec<RunRecord>> {
        self.validate()?;
        let jobs: Vec<(&Cell, Method, usize)> = self
            .cells
            .iter()
            .flat_map(|c| self.methods.iter().flat_map(move |&m| (0..self.runs_per_cell).map(move |r| (c, m, r))))
            .collect();
        jobs.into_par_iter().map(|(c, m, r)| self.run_one(c, m, r)).collect()
    }
}

fn ordered_mean(mut values: Vec<f64>) -> f64 {
    // summing in sorted order makes the mean independent of run order
    values.sort_by(f64::total_cmp);
    values.iter().sum::<f64>() / values.len() as f64
}

/// `f(x⁰_best) / f(xᵏ_best)` for one run.
pub fn gain(record: &RunRecord, k: usize) -> Result<f64> {
    let initial = record.generations.first().ok_or(Error::LengthMismatch(0, k + 1))?.best_fitness;
    let at_k = record.generations.get(k).ok_or(Error::LengthMismatch(record.generations.len(), k + 1))?.best_fitness;
    if initial == 0.0 || at_k == 0.0 {
        return Err(Error::ZeroDenominator { run: record.run, initial, k, at_k });
    }
    Ok(initial / at_k)
}

/// Mean of [`gain`] over runs.
pub fn mean_gain(records: &[RunRecord], k: usize) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::LengthMismatch(0, 1));
    }
    let gains = records.iter().map(|r| gain(r, k)).collect::<Result<Vec<_>>>()?;
    Ok(ordered_mean(gains))
}

/// Per-generation mean, min and max of the best fitness across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub mean: Vec<f64>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

pub fn aggregate(records: &[RunRecord]) -> Result<AggregateCurve> {
    let len = records.first().map(|r| r.generations.len()).ok_or(Error::LengthMismatch(0, 1))?;
    if let Some(bad) = records.iter().find(|r| r.generations.len() != len) {
        return Err(Error::LengthMismatch(len, bad.generations.len()));
    }
    let mut curve = AggregateCurve { mean: vec![], min: vec![], max: vec![] };
    for g in 0..len {
        let values: Vec<f64> = records.iter().map(|r| r.generations[g].best_fitness).collect();
        curve.min.push(values.iter().copied().fold(f64::INFINITY, f64::min));
        curve.max.push(values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        curve.mean.push(ordered_mean(values).clamp(curve.min[g], curve.max[g]));
    }
    Ok(curve)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub generation: usize,
    pub f_dist: f64,
    pub x_dist: f64,
    pub x: Vec<f64>,
}

/// Distance of each generation's best to the known optimum, in value and in
/// coordinates.
pub fn convergence_trace(record: &RunRecord, optimum_point: &[f64], optimum_value: f64) -> Vec<TracePoint> {
    record
        .generations
        .iter()
        .map(|g| TracePoint {
            generation: g.generation,
            f_dist: (g.best_fitness - optimum_value).abs(),
            x_dist: g.best_genes.iter().zip(optimum_point).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
            x: g.best_genes.clone(),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// CSV files

fn parse<T: std::str::FromStr>(field: &str, what: &str) -> Result<T> {
    field.trim().parse().map_err(|_| Error::Parse(format!("bad {what} '{field}'")))
}

fn coordinate_header(prefix: &[&str], dim: usize) -> Vec<String> {
    prefix.iter().map(|s| s.to_string()).chain((0..dim).map(|i| format!("x{i}"))).collect()
}

/// Run records as rows `method,function,dim,run,seed,generation,evaluations,best_fitness,x0..`.
/// All records must share a dimension.
pub fn write_runs_csv<W: Write>(out: W, records: &[RunRecord]) -> Result<()> {
    let dim = records.first().map_or(0, |r| r.dim);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(coordinate_header(
        &["method", "function", "dim", "run", "seed", "generation", "evaluations", "best_fitness"],
        dim,
    ))?;
    for r in records {
        if r.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: r.dim });
        }
        for g in &r.generations {
            let mut row = vec![
                r.method.to_string(),
                r.function.clone(),
                r.dim.to_string(),
                r.run.to_string(),
                r.seed.to_string(),
                g.generation.to_string(),
                g.evaluations.to_string(),
                g.best_fitness.to_string(),
            ];
            row.extend(g.best_genes.iter().map(f64::to_string));
            w.write_record(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_runs_csv`]. Diagnostics are not stored and come back zeroed.
pub fn read_runs_csv<R: Read>(input: R) -> Result<Vec<RunRecord>> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut records: Vec<RunRecord> = Vec::new();
    for row in rdr.records() {
        let row = row?;
        if row.len() < 8 {
            return Err(Error::Parse(format!("run row has {} fields", row.len())));
        }
        let method: Method = row[0].parse()?;
        let function = row[1].to_string();
        let dim: usize = parse(&row[2], "dim")?;
        let run: usize = parse(&row[3], "run")?;
        let seed: u64 = parse(&row[4], "seed")?;
        if row.len() != 8 + dim {
            return Err(Error::Parse(format!("expected {} fields, found {}", 8 + dim, row.len())));
        }
        let gen = GenerationRecord {
            generation: parse(&row[5], "generation")?,
            evaluations: parse(&row[6], "evaluations")?,
            best_fitness: parse(&row[7], "best_fitness")?,
            best_genes: (8..8 + dim).map(|i| parse(&row[i], "coordinate")).collect::<Result<_>>()?,
        };
        match records.last_mut() {
            Some(r)
                if r.method == method && r.function == function && r.dim == dim && r.run == run && r.seed == seed =>
            {
                r.generations.push(gen)
            }
            _ => records.push(RunRecord {
                method,
                function,
                dim,
                run,
                seed,
                generations: vec![gen],
                diagnostics: Default::default(),
            }),
        }
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub method: Method,
    pub function: String,
    pub dim: usize,
    pub generation: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

pub fn curve_rows(method: Method, function: &str, dim: usize, curve: &AggregateCurve) -> Vec<CurveRow> {
    (0..curve.mean.len())
        .map(|g| CurveRow {
            method,
            function: function.to_string(),
            dim,
            generation: g,
            mean: curve.mean[g],
            min: curve.min[g],
            max: curve.max[g],
        })
        .collect()
}

pub fn write_curves_csv<W: Write>(out: W, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["method", "function", "dim", "generation", "mean", "min", "max"])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            r.function.clone(),
            r.dim.to_string(),
            r.generation.to_string(),
            r.mean.to_string(),
            r.min.to_string(),
            r.max.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curves_csv<R: Read>(input: R) -> Result<Vec<CurveRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(CurveRow {
                method: row[0].parse()?,
                function: row[1].to_string(),
                dim: parse(&row[2], "dim")?,
                generation: parse(&row[3], "generation")?,
                mean: parse(&row[4], "mean")?,
                min: parse(&row[5], "min")?,
                max: parse(&row[6], "max")?,
            })
        })
        .collect()
}

/// One line of the summary gain table.
#[derive(Debug, Clone, PartialEq)]
pub struct GainRow {
    pub function: String,
    pub method: Method,
    pub dim: usize,
    pub g_first: f64,
    pub g_last: f64,
}

pub fn write_gains_csv<W: Write>(out: W, rows: &[GainRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["function", "method", "dim", "g_first", "g_last"])?;
    for r in rows {
        w.write_record([
            r.function.clone(),
            r.method.to_string(),
            r.dim.to_string(),
            r.g_first.to_string(),
            r.g_last.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_gains_csv<R: Read>(input: R) -> Result<Vec<GainRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(GainRow {
                function: row[0].to_string(),
                method: row[1].parse()?,
                dim: parse(&row[2], "dim")?,
                g_first: parse(&row[3], "g_first")?,
                g_last: parse(&row[4], "g_last")?,
            })
        })
        .collect()
}

/// Mean gain at every generation of one (function, method, dim) group.
#[derive(Debug, Clone, PartialEq)]
pub struct GainCurveRow {
    pub function: String,
    pub method: Method,
    pub dim: usize,
    pub generation: usize,
    pub gain: f64,
}

pub fn write_gain_curve_csv<W: Write>(out: W, rows: &[GainCurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["function", "method", "dim", "generation", "gain"])?;
    for r in rows {
        w.write_record([
            r.function.clone(),
            r.method.to_string(),
            r.dim.to_string(),
            r.generation.to_string(),
            r.gain.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_gain_curve_csv<R: Read>(input: R) -> Result<Vec<GainCurveRow>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(GainCurveRow {
                function: row[0].to_string(),
                method: row[1].parse()?,
                dim: parse(&row[2], "dim")?,
                generation: parse(&row[3], "generation")?,
                gain: parse(&row[4], "gain")?,
            })
        })
        .collect()
}

pub fn write_trace_csv<W: Write>(out: W, trace: &[TracePoint]) -> Result<()> {
    let dim = trace.first().map_or(0, |t| t.x.len());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(coordinate_header(&["generation", "f_dist", "x_dist"], dim))?;
    for t in trace {
        let mut row = vec![t.generation.to_string(), t.f_dist.to_string(), t.x_dist.to_string()];
        row.extend(t.x.iter().map(f64::to_string));
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace_csv<R: Read>(input: R) -> Result<Vec<TracePoint>> {
    let mut rdr = csv::Reader::from_reader(input);
    rdr.records()
        .map(|row| {
            let row = row?;
            Ok(TracePoint {
                generation: parse(&row[0], "generation")?,
                f_dist: parse(&row[1], "f_dist")?,
                x_dist: parse(&row[2], "x_dist")?,
                x: (3..row.len()).map(|i| parse(&row[i], "coordinate")).collect::<Result<_>>()?,
            })
        })
        .collect()
}

type GroupKey = (String, usize, Method);

/// Groups records by (function, dim, method), each group sorted by run index.
pub fn group_records(records: &[RunRecord]) -> BTreeMap<GroupKey, Vec<RunRecord>> {
    let mut groups: BTreeMap<GroupKey, Vec<RunRecord>> = BTreeMap::new();
    for r in records {
        groups.entry((r.function.clone(), r.dim, r.method)).or_default().push(r.clone());
    }
    groups.values_mut().for_each(|v| v.sort_by_key(|r| r.run));
    groups
}

impl PartialOrd for Method {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Method {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.name().cmp(other.name())
    }
}

/// Summary table and full gain curves, one group per (function, dim, method).
pub fn gain_tables(records: &[RunRecord]) -> Result<(Vec<GainRow>, Vec<GainCurveRow>)> {
    let mut table = Vec::new();
    let mut curves = Vec::new();
    for ((function, dim, method), runs) in group_records(records) {
        let last = aggregate(&runs)?.mean.len() - 1;
        for k in 0..=last {
            curves.push(GainCurveRow {
                function: function.clone(),
                method,
                dim,
                generation: k,
                gain: mean_gain(&runs, k)?,
            });
        }
        table.push(GainRow {
            function,
            method,
            dim,
            g_first: mean_gain(&runs, last.min(1))?,
            g_last: mean_gain(&runs, last)?,
        });
    }
    Ok((table, curves))
}

/// Aggregated curves for every (function, dim, method) group.
pub fn curve_table(records: &[RunRecord]) -> Result<Vec<CurveRow>> {
    let mut rows = Vec::new();
    for ((function, dim, method), runs) in group_records(records) {
        rows.extend(curve_rows(method, &function, dim, &aggregate(&runs)?));
    }
    Ok(rows)
}

/// File name for the runs of one group inside a `runs/` directory.
pub fn runs_file_name(function: &str, dim: usize, method: Method) -> String {
    format!("{function}_d{dim}_{method}.csv")
}

/// Writes `runs/*.csv`, `curves.csv` and `gains.csv` under `dir`.
pub fn write_bench_outputs(dir: &Path, records: &[RunRecord]) -> Result<()> {
    let runs_dir = dir.join("runs");
    fs::create_dir_all(&runs_dir)?;
    for ((function, dim, method), runs) in group_records(records) {
        write_runs_csv(fs::File::create(runs_dir.join(runs_file_name(&function, dim, method)))?, &runs)?;
    }
    write_curves_csv(fs::File::create(dir.join("curves.csv"))?, &curve_table(records)?)?;
    let (gains, _) = gain_tables(records)?;
    write_gains_csv(fs::File::create(dir.join("gains.csv"))?, &gains)?;
    Ok(())
}

/// Reads every `*.csv` in `dir`, in file-name order.
pub fn read_runs_dir(dir: &Path) -> Result<Vec<RunRecord>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    for p in paths {
        records.extend(read_runs_csv(fs::File::open(p)?)?);
    }
    Ok(records)
}
