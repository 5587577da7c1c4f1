//! Scalar objective functions on box domains.
//!
//! The six analytic benchmarks live in [`benchmarks`]; [`rbf`] fits a radial
//! basis function response surface to user data and wraps it with a constant
//! penalty outside its box.

pub mod benchmarks;
pub mod dataset;
pub mod rbf;

pub use benchmarks::{Benchmark, ObjectiveSpec};
pub use dataset::{read_dataset, Dataset};
pub use rbf::{fit_rbf, Kernel, Penalized, RbfSurrogate};

use crate::error::{Error, Result};

/// A scalar function of a real vector, minimized by the optimizers.
///
/// Implementations must be pure: the same input always yields the same value.
pub trait Objective: Sync {
    fn dimension(&self) -> usize;

    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    /// Label used in run records and output files.
    fn name(&self) -> &str {
        "objective"
    }
}

/// Axis-aligned box `lower[i] <= x[i] <= upper[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(Error::InvalidDomain("domain must have at least one dimension".into()));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), actual: upper.len() });
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite()) || l >= u {
                return Err(Error::InvalidDomain(format!(
                    "bounds of coordinate {i} must satisfy lower < upper, got [{l}, {u}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The hypercube `[lower, upper]^dim`.
    pub fn cube(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        Self::new(vec![lower; dim], vec![upper; dim])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    /// Inclusive membership test.
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn clip(&self, x: &mut [f64]) {
        for (v, (l, u)) in x.iter_mut().zip(self.lower.iter().zip(&self.upper)) {
            *v = v.clamp(*l, *u);
        }
    }
}

pub(crate) fn check_input(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, actual: x.len() });
    }
    if let Some(index) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}
