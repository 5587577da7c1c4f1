//! The benchmark suite: Rosenbrock, Ackley, Bohachevsky, Rastrigin,
//! Schaffer N.7 and a shifted Zakharov, each on its customary hypercube.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use super::{check_input, BoxDomain, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Benchmark {
    Rosenbrock,
    Ackley,
    Bohachevsky,
    Rastrigin,
    Schaffer7,
    Zakharov,
}

impl Benchmark {
    pub const ALL: [Benchmark; 6] = [
        Benchmark::Rosenbrock,
        Benchmark::Ackley,
        Benchmark::Bohachevsky,
        Benchmark::Rastrigin,
        Benchmark::Schaffer7,
        Benchmark::Zakharov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Rosenbrock => "rosenbrock",
            Benchmark::Ackley => "ackley",
            Benchmark::Bohachevsky => "bohachevsky",
            Benchmark::Rastrigin => "rastrigin",
            Benchmark::Schaffer7 => "schaffer7",
            Benchmark::Zakharov => "zakharov",
        }
    }

    /// Per-coordinate search interval.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Benchmark::Rosenbrock => (-5.0, 10.0),
            Benchmark::Ackley => (-15.0, 30.0),
            Benchmark::Bohachevsky => (-100.0, 100.0),
            Benchmark::Rastrigin => (-5.12, 5.12),
            Benchmark::Schaffer7 => (-100.0, 100.0),
            Benchmark::Zakharov => (-15.0, 0.0),
        }
    }

    /// Location of the global minimum; every coordinate takes this value.
    pub fn optimum_coordinate(self) -> f64 {
        match self {
            Benchmark::Rosenbrock => 1.0,
            Benchmark::Zakharov => -10.0,
            _ => 0.0,
        }
    }

    /// Evaluates the function without validating `x`.
    pub fn value(self, x: &[f64]) -> f64 {
        match self {
            Benchmark::Rosenbrock => {
                x.windows(2).map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (w[0] - 1.0).powi(2)).sum()
            }
            Benchmark::Ackley => {
                let (a, b, c) = (20.0, 0.2, 2.0 * PI);
                let d = x.len() as f64;
                let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
                let cos = x.iter().map(|v| (c * v).cos()).sum::<f64>() / d;
                -a * (-b * sq.sqrt()).exp() - cos.exp() + a + E
            }
            Benchmark::Bohachevsky => x
                .windows(2)
                .map(|w| {
                    w[0] * w[0] + 2.0 * w[1] * w[1] - 0.3 * (3.0 * PI * w[0]).cos() - 0.4 * (4.0 * PI * w[1]).cos()
                        + 0.7
                })
                .sum(),
            Benchmark::Rastrigin => {
                10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
            }
            Benchmark::Schaffer7 => x
                .windows(2)
                .map(|w| {
                    let s = w[0] * w[0] + w[1] * w[1];
                    // the limit at s = 0 is 0
                    if s == 0.0 {
                        0.0
                    } else {
                        s.powf(0.25) * ((50.0 * s.powf(0.1)).sin().powi(2) + 1.0)
                    }
                })
                .sum(),
            Benchmark::Zakharov => {
                let sq: f64 = x.iter().map(|v| (v + 10.0).powi(2)).sum();
                let lin: f64 = x.iter().enumerate().map(|(i, v)| 0.5 * (i + 1) as f64 * (v + 10.0)).sum();
                sq + lin.powi(2) + lin.powi(4)
            }
        }
    }
}

impl fmt::Display for Benchmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Benchmark {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Benchmark::ALL
            .into_iter()
            .find(|b| b.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::UnknownObjective(s.to_string()))
    }
}

/// A benchmark instantiated at a given dimension.
#[derive(Debug, Clone)]
pub struct ObjectiveSpec {
    pub name: String,
    pub dimension: usize,
    pub domain: BoxDomain,
    pub known_optimum_value: Option<f64>,
    pub known_optimum_point: Option<Vec<f64>>,
    benchmark: Benchmark,
}

impl ObjectiveSpec {
    pub fn benchmark(benchmark: Benchmark, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::config("dim", "dimension must be positive"));
        }
        let (lo, hi) = benchmark.bounds();
        Ok(Self {
            name: benchmark.name().to_string(),
            dimension,
            domain: BoxDomain::cube(lo, hi, dimension)?,
            known_optimum_value: Some(0.0),
            known_optimum_point: Some(vec![benchmark.optimum_coordinate(); dimension]),
            benchmark,
        })
    }

    /// Looks a benchmark up by its registry name.
    pub fn by_name(name: &str, dimension: usize) -> Result<Self> {
        Self::benchmark(name.parse()?, dimension)
    }

    pub fn kind(&self) -> Benchmark {
        self.benchmark
    }
}

impl Objective for ObjectiveSpec {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.dimension)?;
        Ok(self.benchmark.value(x))
    }

    fn name(&self) -> &str {
        &self.name
    }
}
