//! Radial basis function response surfaces.
//!
//! Inputs are rescaled to `[-1, 1]^k` using the bounding box of the training
//! set before distances are taken, so a single shape parameter is meaningful
//! across differently scaled coordinates. The thin-plate kernel is only
//! conditionally positive definite and carries a linear polynomial tail.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use super::{check_input, BoxDomain, Objective};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Gaussian,
    Multiquadric,
    ThinPlate,
}

impl Kernel {
    fn phi(self, r: f64, eps: f64) -> f64 {
        match self {
            Kernel::Gaussian => (-(eps * r).powi(2)).exp(),
            Kernel::Multiquadric => (1.0 + (eps * r).powi(2)).sqrt(),
            Kernel::ThinPlate => {
                if r == 0.0 {
                    0.0
                } else {
                    r * r * r.ln()
                }
            }
        }
    }

    fn has_tail(self) -> bool {
        matches!(self, Kernel::ThinPlate)
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(Kernel::Gaussian),
            "multiquadric" => Ok(Kernel::Multiquadric),
            "thin_plate" | "thin-plate" => Ok(Kernel::ThinPlate),
            other => Err(Error::config("kernel", format!("unknown kernel '{other}'"))),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Multiquadric => "multiquadric",
            Kernel::ThinPlate => "thin_plate",
        })
    }
}

/// A fitted RBF interpolant.
#[derive(Debug, Clone)]
pub struct RbfSurrogate {
    /// Training inputs in rescaled coordinates, one row per center.
    centers: Vec<Vec<f64>>,
    weights: Vec<f64>,
    /// Constant then linear coefficients; empty for kernels without a tail.
    tail: Vec<f64>,
    kernel: Kernel,
    shape_parameter: f64,
    input_lower: Vec<f64>,
    input_half_width: Vec<f64>,
    pub penalty_alpha: f64,
}

/// Default penalty returned outside the surrogate's box.
pub const DEFAULT_PENALTY: f64 = 10.0;

/// Fits an interpolating RBF surface through `(inputs[i], outputs[i])`.
pub fn fit_rbf(inputs: &[Vec<f64>], outputs: &[f64], kernel: Kernel, shape_parameter: f64) -> Result<RbfSurrogate> {
    let n = inputs.len();
    if n != outputs.len() {
        return Err(Error::DimensionMismatch { expected: n, actual: outputs.len() });
    }
    let k = inputs.first().map_or(0, Vec::len);
    if k == 0 {
        return Err(Error::Parse("dataset has no input columns".into()));
    }
    if n < k + 1 {
        return Err(Error::NotEnoughSamples { needed: k + 1, have: n });
    }
    if !(shape_parameter.is_finite() && shape_parameter > 0.0) {
        return Err(Error::config("shape", "shape parameter must be positive"));
    }
    for row in inputs {
        check_input(row, k)?;
    }
    if let Some(index) = outputs.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }

    let mut input_lower = vec![f64::INFINITY; k];
    let mut upper = vec![f64::NEG_INFINITY; k];
    for row in inputs {
        for j in 0..k {
            input_lower[j] = input_lower[j].min(row[j]);
            upper[j] = upper[j].max(row[j]);
        }
    }
    let input_half_width: Vec<f64> =
        input_lower.iter().zip(&upper).map(|(l, u)| if u > l { 0.5 * (u - l) } else { 1.0 }).collect();
    let centers: Vec<Vec<f64>> = inputs.iter().map(|row| rescale(row, &input_lower, &input_half_width)).collect();

    if let Some((first, second, dist)) = closest_pair(&centers) {
        if dist < 1e-10 {
            return Err(Error::DuplicateSamples { first, second });
        }
    }

    let tail_len = if kernel.has_tail() { k + 1 } else { 0 };
    let size = n + tail_len;
    let mut system = DMatrix::<f64>::zeros(size, size);
    for i in 0..n {
        for j in i..n {
            let v = kernel.phi(distance(&centers[i], &centers[j]), shape_parameter);
            system[(i, j)] = v;
            system[(j, i)] = v;
        }
        if tail_len > 0 {
            let poly = std::iter::once(1.0).chain(centers[i].iter().copied());
            for (c, p) in poly.enumerate() {
                system[(i, n + c)] = p;
                system[(n + c, i)] = p;
            }
        }
    }
    let mut rhs = DVector::<f64>::zeros(size);
    rhs.rows_mut(0, n).copy_from_slice(outputs);

    let near_duplicate = || {
        closest_pair(&centers)
            .map(|(first, second, _)| Error::DuplicateSamples { first, second })
            .unwrap_or(Error::SingularSystem)
    };
    let solution = system.clone().lu().solve(&rhs).ok_or_else(near_duplicate)?;
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(near_duplicate());
    }
    let residual = (&system * &solution - &rhs).amax();
    if residual > 1e-6 * rhs.amax().max(1.0) {
        return Err(near_duplicate());
    }

    Ok(RbfSurrogate {
        centers,
        weights: solution.rows(0, n).iter().copied().collect(),
        tail: solution.rows(n, tail_len).iter().copied().collect(),
        kernel,
        shape_parameter,
        input_lower,
        input_half_width,
        penalty_alpha: DEFAULT_PENALTY,
    })
}

fn rescale(x: &[f64], lower: &[f64], half_width: &[f64]) -> Vec<f64> {
    x.iter().zip(lower.iter().zip(half_width)).map(|(v, (l, h))| (v - l) / h - 1.0).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn closest_pair(rows: &[Vec<f64>]) -> Option<(usize, usize, f64)> {
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let d = distance(&rows[i], &rows[j]);
            if best.is_none_or(|(_, _, b)| d < b) {
                best = Some((i, j, d));
            }
        }
    }
    best
}

impl RbfSurrogate {
    pub fn with_penalty(mut self, penalty_alpha: f64) -> Self {
        self.penalty_alpha = penalty_alpha;
        self
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn shape_parameter(&self) -> f64 {
        self.shape_parameter
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    /// Bounding box of the training inputs.
    pub fn input_domain(&self) -> Result<BoxDomain> {
        let lower = self.input_lower.clone();
        let upper = lower.iter().zip(&self.input_half_width).map(|(l, h)| l + 2.0 * h).collect();
        BoxDomain::new(lower, upper)
    }

    fn value(&self, x: &[f64]) -> f64 {
        let z = rescale(x, &self.input_lower, &self.input_half_width);
        let mut s: f64 = self
            .centers
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * self.kernel.phi(distance(c, &z), self.shape_parameter))
            .sum();
        if let Some((c0, lin)) = self.tail.split_first() {
            s += c0 + lin.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>();
        }
        s
    }
}

impl Objective for RbfSurrogate {
    fn dimension(&self) -> usize {
        self.input_lower.len()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        check_input(x, self.dimension())?;
        Ok(self.value(x))
    }
}

/// The surrogate inside `domain` (bounds inclusive), its penalty outside.
pub fn penalized(surrogate: &RbfSurrogate, domain: &BoxDomain, x: &[f64]) -> Result<f64> {
    if x.len() != surrogate.dimension() {
        return Err(Error::DimensionMismatch { expected: surrogate.dimension(), actual: x.len() });
    }
    if domain.contains(x) {
        surrogate.evaluate(x)
    } else {
        Ok(surrogate.penalty_alpha)
    }
}

/// [`penalized`] packaged as an [`Objective`].
#[derive(Debug, Clone)]
pub struct Penalized {
    pub surrogate: RbfSurrogate,
    pub domain: BoxDomain,
}

impl Objective for Penalized {
    fn dimension(&self) -> usize {
        self.surrogate.dimension()
    }

    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        penalized(&self.surrogate, &self.domain, x)
    }

    fn name(&self) -> &str {
        "rbf"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_2d() -> (Vec<Vec<f64>>, Vec<f64>) {
        let inputs = vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![0.0, 0.0], vec![-1.0, 1.0], vec![1.0, 1.0]];
        let outputs = inputs.iter().map(|x| x[0] * x[0] + x[1] * x[1]).collect();
        (inputs, outputs)
    }

    /// Gaussian elimination with partial pivoting, independent of nalgebra.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            let (top, rest) = a.split_at_mut(col + 1);
            let pivot_row = &top[col];
            for (r, row) in rest.iter_mut().enumerate() {
                let f = row[col] / pivot_row[col];
                row.iter_mut().zip(pivot_row).skip(col).for_each(|(v, p)| *v -= f * p);
                b[col + 1 + r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
            x[r] = (b[r] - s) / a[r][r];
        }
        x
    }

    #[test]
    fn reproduces_collinear_linear_samples() {
        let inputs = vec![vec![0.0], vec![1.0], vec![2.0]];
        let outputs = vec![0.0, 1.0, 2.0];
        let s = fit_rbf(&inputs, &outputs, Kernel::Gaussian, 1.0).unwrap();
        for (x, y) in inputs.iter().zip(&outputs) {
            assert!((s.evaluate(x).unwrap() - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn interpolates_every_kernel_on_grid() {
        let (inputs, outputs) = grid_2d();
        for kernel in [Kernel::Gaussian, Kernel::Multiquadric, Kernel::ThinPlate] {
            let s = fit_rbf(&inputs, &outputs, kernel, 1.0).unwrap();
            for (x, y) in inputs.iter().zip(&outputs) {
                let v = s.evaluate(x).unwrap();
                assert!((v - y).abs() <= 1e-6 * y.abs().max(1.0), "{kernel}: {v} vs {y}");
            }
        }
    }

    #[test]
    fn midpoint_matches_independent_dense_solve() {
        let (inputs, outputs) = grid_2d();
        let s = fit_rbf(&inputs, &outputs, Kernel::Gaussian, 1.0).unwrap();
        // the grid already spans [-1, 1]^2, so rescaling is the identity
        let phi = |a: &[f64], b: &[f64]| (-distance(a, b).powi(2)).exp();
        let a: Vec<Vec<f64>> = inputs.iter().map(|xi| inputs.iter().map(|xj| phi(xi, xj)).collect()).collect();
        let w = dense_solve(a, outputs.clone());
        let q = [0.5, 0.0];
        let expected: f64 = inputs.iter().zip(&w).map(|(c, wi)| wi * phi(c, &q)).sum();
        assert!((s.evaluate(&q).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn duplicate_rows_are_named() {
        let inputs = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![0.0, 0.0], vec![0.3, 1.0]];
        let outputs = vec![1.0, 2.0, 3.0, 4.0];
        match fit_rbf(&inputs, &outputs, Kernel::Gaussian, 1.0) {
            Err(Error::DuplicateSamples { first: 0, second: 2 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn penalty_outside_box_inclusive_bounds() {
        let (inputs, outputs) = grid_2d();
        let s = fit_rbf(&inputs, &outputs, Kernel::Gaussian, 1.0).unwrap().with_penalty(10.0);
        let domain = BoxDomain::cube(-1.0, 1.0, 2).unwrap();
        let inside = [0.2, -0.3];
        assert_eq!(penalized(&s, &domain, &inside).unwrap(), s.evaluate(&inside).unwrap());
        assert_eq!(penalized(&s, &domain, &[1.0 + 1e-9, 0.0]).unwrap(), 10.0);
        let edge = [1.0, -1.0];
        assert_eq!(penalized(&s, &domain, &edge).unwrap(), s.evaluate(&edge).unwrap());
        assert!(penalized(&s, &domain, &[0.0]).is_err());
    }
}
