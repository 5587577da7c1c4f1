//! Active subspace construction from scattered input/output pairs.
//!
//! Samples are mapped to `[-1, 1]^k`, gradients are estimated with local
//! linear fits over nearest neighbors, and the uncentered covariance
//! `C = (1/n) Σ ∇f ∇fᵀ` is eigendecomposed. The leading `M` eigenvectors
//! span the active subspace.

use std::io::Write;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::objective::BoxDomain;
use crate::rng::Rng;

/// Append-only collection of evaluated samples, in original coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleStore {
    dim: usize,
    inputs: Vec<f64>,
    outputs: Vec<f64>,
}

impl SampleStore {
    pub fn new(dim: usize) -> Self {
        Self { dim, inputs: Vec::new(), outputs: Vec::new() }
    }

    pub fn push(&mut self, x: &[f64], y: f64) -> Result<()> {
        crate::objective::check_input(x, self.dim)?;
        if !y.is_finite() {
            return Err(Error::NonFinite { index: self.dim });
        }
        self.inputs.extend_from_slice(x);
        self.outputs.push(y);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    pub fn input(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }
}

/// Affine map from a box onto `[-1, 1]^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineScaler {
    domain: BoxDomain,
}

impl AffineScaler {
    pub fn new(domain: BoxDomain) -> Self {
        Self { domain }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn scale(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.domain.lower().iter().zip(self.domain.upper()))
            .map(|(v, (l, u))| 2.0 * (v - l) / (u - l) - 1.0)
            .collect()
    }

    pub fn unscale(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .zip(self.domain.lower().iter().zip(self.domain.upper()))
            .map(|(v, (l, u))| l + 0.5 * (v + 1.0) * (u - l))
            .collect()
    }
}

/// Gradient estimates, one row per stored sample, in scaled coordinates.
#[derive(Debug, Clone)]
pub struct GradientEstimate {
    pub gradients: DMatrix<f64>,
    /// Local fits whose design matrix was rank deficient.
    pub rank_deficient: usize,
}

/// Neighbor count used when none is given: `min(n, ⌈1.5(k+1)⌉ + 2)`.
pub fn default_neighbor_count(n: usize, k: usize) -> usize {
    n.min((3 * (k + 1)).div_ceil(2) + 2)
}

pub fn estimate_gradients_local_linear(store: &SampleStore, scaler: &AffineScaler) -> Result<GradientEstimate> {
    let p = default_neighbor_count(store.len(), store.dim());
    estimate_gradients_with_neighbors(store, scaler, p)
}

/// Local linear gradients using the `neighbors` nearest samples (the sample
/// itself included; distance ties broken by index).
pub fn estimate_gradients_with_neighbors(
    store: &SampleStore,
    scaler: &AffineScaler,
    neighbors: usize,
) -> Result<GradientEstimate> {
    let (n, k) = (store.len(), store.dim());
    if n < k + 2 {
        return Err(Error::NotEnoughSamples { needed: k + 2, have: n });
    }
    if scaler.domain().dim() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: scaler.domain().dim() });
    }
    let p = neighbors.clamp(1, n);
    let scaled: Vec<Vec<f64>> = (0..n).map(|i| scaler.scale(store.input(i))).collect();
    let y = store.outputs();

    let fits: Vec<(Vec<f64>, bool)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let zi = &scaled[i];
            let mut dist: Vec<(f64, usize)> = scaled
                .iter()
                .enumerate()
                .map(|(j, zj)| (zi.iter().zip(zj).map(|(a, b)| (a - b) * (a - b)).sum(), j))
                .collect();
            let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if p < n {
                dist.select_nth_unstable_by(p - 1, by_key);
                dist.truncate(p);
            }
            dist.sort_unstable_by(by_key);

            let design =
                DMatrix::from_fn(p, k + 1, |r, c| if c == 0 { 1.0 } else { scaled[dist[r].1][c - 1] - zi[c - 1] });
            let rhs = DVector::from_iterator(p, dist.iter().map(|&(_, j)| y[j]));
            local_slope(design, rhs)
        })
        .collect();

    let mut gradients = DMatrix::zeros(n, k);
    let mut rank_deficient = 0;
    for (i, (g, deficient)) in fits.into_iter().enumerate() {
        gradients.row_mut(i).iter_mut().zip(g).for_each(|(d, s)| *d = s);
        rank_deficient += deficient as usize;
    }
    Ok(GradientEstimate { gradients, rank_deficient })
}

/// Minimum-norm least squares; returns the slope part and whether the design
/// was rank deficient.
fn local_slope(design: DMatrix<f64>, rhs: DVector<f64>) -> (Vec<f64>, bool) {
    let cols = design.ncols();
    let svd = design.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10 * cols.max(rhs.len()) as f64;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    let coef = svd.solve(&rhs, tol).expect("u and v were computed");
    (coef.iter().skip(1).copied().collect(), rank < cols)
}

/// `C = (1/n) GᵀG`, symmetrized exactly.
pub fn build_covariance(gradients: &DMatrix<f64>) -> DMatrix<f64> {
    let n = gradients.nrows().max(1) as f64;
    let mut c = gradients.transpose() * gradients / n;
    let k = c.nrows();
    for i in 0..k {
        for j in i + 1..k {
            let v = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = v;
            c[(j, i)] = v;
        }
    }
    c
}

/// Eigendecomposition of a symmetric matrix: eigenvalues descending and
/// eigenvectors as columns, each with its largest-magnitude component
/// positive (lowest index on ties).
pub fn decompose(c: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if !c.is_square() {
        return Err(Error::DimensionMismatch { expected: c.nrows(), actual: c.ncols() });
    }
    let scale = c.amax().max(1.0);
    let asym = (c - c.transpose()).amax();
    if asym > 1e-10 * scale {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = SymmetricEigen::new(c.clone());
    let k = c.nrows();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut w = DMatrix::zeros(k, k);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(src).into_owned();
        let mut lead = 0;
        for r in 1..k {
            if v[r].abs() > v[lead].abs() {
                lead = r;
            }
        }
        if v[lead] < 0.0 {
            v.neg_mut();
        }
        w.set_column(dst, &v);
    }
    Ok((values, w))
}

/// Index of the largest spectral gap, `argmax_i log10(Λ_i / Λ_{i+1})`.
/// Values below `1e-15` are floored there; the first index wins ties.
pub fn choose_active_dim(eigenvalues: &[f64]) -> usize {
    let floor = |v: f64| v.max(1e-15);
    let mut best = (1, f64::NEG_INFINITY);
    for (i, w) in eigenvalues.windows(2).enumerate() {
        let gap = (floor(w[0]) / floor(w[1])).log10();
        if gap > best.1 {
            best = (i + 1, gap);
        }
    }
    best.0
}

/// How the active dimension is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActiveDim {
    Fixed(usize),
    /// Largest spectral gap, re-evaluated at every build.
    Auto,
}

impl std::str::FromStr for ActiveDim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" => Ok(ActiveDim::Auto),
            v => v
                .parse()
                .map(ActiveDim::Fixed)
                .map_err(|_| Error::config("active_dim", format!("expected a positive integer or 'auto', got '{v}'"))),
        }
    }
}

impl std::fmt::Display for ActiveDim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ActiveDim::Fixed(m) => write!(f, "{m}"),
            ActiveDim::Auto => f.write_str("auto"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ActiveSubspace {
    pub eigenvalues: Vec<f64>,
    /// Orthogonal `k×k` eigenvector matrix; the first `active_dim` columns span the subspace.
    pub w: DMatrix<f64>,
    pub active_dim: usize,
    pub scaler: AffineScaler,
    pub rank_deficient_fits: usize,
}

impl ActiveSubspace {
    /// Wraps a decomposition; `active_dim` must satisfy `1 <= M < k`.
    pub fn from_parts(eigenvalues: Vec<f64>, w: DMatrix<f64>, active_dim: usize, scaler: AffineScaler) -> Result<Self> {
        let k = w.nrows();
        if active_dim == 0 || active_dim >= k {
            return Err(Error::config("active_dim", format!("M must satisfy 1 <= M < k = {k}, got {active_dim}")));
        }
        if scaler.domain().dim() != k || eigenvalues.len() != k || !w.is_square() {
            return Err(Error::DimensionMismatch { expected: k, actual: scaler.domain().dim() });
        }
        Ok(Self { eigenvalues, w, active_dim, scaler, rank_deficient_fits: 0 })
    }

    pub fn dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn inactive_dim(&self) -> usize {
        self.dim() - self.active_dim
    }

    pub fn w1(&self) -> DMatrix<f64> {
        self.w.columns(0, self.active_dim).into_owned()
    }

    pub fn w2(&self) -> DMatrix<f64> {
        self.w.columns(self.active_dim, self.inactive_dim()).into_owned()
    }

    /// Active variables `W₁ᵀ·scale(x)`.
    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let z = DVector::from_vec(self.scaler.scale(x));
        (self.w.columns(0, self.active_dim).transpose() * z).iter().copied().collect()
    }

    /// Inactive variables `W₂ᵀ·scale(x)`.
    pub fn inactive(&self, x: &[f64]) -> Vec<f64> {
        let z = DVector::from_vec(self.scaler.scale(x));
        (self.w.columns(self.active_dim, self.inactive_dim()).transpose() * z).iter().copied().collect()
    }

    /// Scaled point `W₁·active + W₂·inactive`.
    pub fn compose_scaled(&self, active: &[f64], inactive: &[f64]) -> Vec<f64> {
        let a = DVector::from_column_slice(active);
        let b = DVector::from_column_slice(inactive);
        let z = self.w.columns(0, self.active_dim) * a + self.w.columns(self.active_dim, self.inactive_dim()) * b;
        z.iter().copied().collect()
    }

    /// Original-coordinate point `unscale(W₁·active + W₂·inactive)`.
    pub fn compose(&self, active: &[f64], inactive: &[f64]) -> Vec<f64> {
        self.scaler.unscale(&self.compose_scaled(active, inactive))
    }
}

/// scaler → local linear gradients → covariance → eigendecomposition → split.
pub fn build_subspace(store: &SampleStore, domain: &BoxDomain, active_dim: ActiveDim) -> Result<ActiveSubspace> {
    let k = store.dim();
    if domain.dim() != k {
        return Err(Error::DimensionMismatch { expected: k, actual: domain.dim() });
    }
    if let ActiveDim::Fixed(m) = active_dim {
        if m == 0 || m >= k {
            return Err(Error::config("active_dim", format!("M must satisfy 1 <= M < k = {k}, got {m}")));
        }
    }
    let scaler = AffineScaler::new(domain.clone());
    let est = estimate_gradients_local_linear(store, &scaler)?;
    let (mut eigenvalues, w) = decompose(&build_covariance(&est.gradients))?;
    // round-off can leave tiny negative values on a PSD matrix
    eigenvalues.iter_mut().for_each(|v| *v = v.max(0.0));
    let m = match active_dim {
        ActiveDim::Fixed(m) => m,
        ActiveDim::Auto => choose_active_dim(&eigenvalues),
    };
    let mut subspace = ActiveSubspace::from_parts(eigenvalues, w, m, scaler)?;
    subspace.rank_deficient_fits = est.rank_deficient;
    Ok(subspace)
}

/// Eigenvalues of `C` with bootstrap min/max brackets.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl EigenSpectrum {
    /// CSV with columns `index,eigenvalue,boot_low,boot_high` (1-based index).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "eigenvalue", "boot_low", "boot_high"])?;
        for i in 0..self.eigenvalues.len() {
            w.write_record([
                (i + 1).to_string(),
                self.eigenvalues[i].to_string(),
                self.low[i].to_string(),
                self.high[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn eigenvalues_of(gradients: &DMatrix<f64>) -> Result<Vec<f64>> {
    Ok(decompose(&build_covariance(gradients))?.0.into_iter().map(|v| v.max(0.0)).collect())
}

/// Resamples gradient rows with replacement `n_boot` times and brackets each
/// eigenvalue by the min/max over the replicates and the point estimate.
pub fn bootstrap_eigenvalues(
    store: &SampleStore,
    domain: &BoxDomain,
    n_boot: usize,
    rng: &mut Rng,
) -> Result<EigenSpectrum> {
    if n_boot < 2 {
        return Err(Error::config("n_boot", "need at least two bootstrap replicates"));
    }
    let est = estimate_gradients_local_linear(store, &AffineScaler::new(domain.clone()))?;
    let g = &est.gradients;
    let eigenvalues = eigenvalues_of(g)?;
    let mut low = eigenvalues.clone();
    let mut high = eigenvalues.clone();
    let n = g.nrows();
    for _ in 0..n_boot {
        let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let resampled = g.select_rows(rows.iter());
        for (i, v) in eigenvalues_of(&resampled)?.into_iter().enumerate() {
            low[i] = low[i].min(v);
            high[i] = high[i].max(v);
        }
    }
    Ok(EigenSpectrum { eigenvalues, low, high })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use proptest::prelude::*;

    fn uniform_store(domain: &BoxDomain, n: usize, seed: u64, f: impl Fn(&[f64]) -> f64) -> SampleStore {
        let mut r = rng::from_seed(seed);
        let mut store = SampleStore::new(domain.dim());
        for _ in 0..n {
            let x: Vec<f64> = domain.lower().iter().zip(domain.upper()).map(|(l, u)| r.random_range(*l..*u)).collect();
            store.push(&x, f(&x)).unwrap();
        }
        store
    }

    fn unit_scaler(k: usize) -> AffineScaler {
        AffineScaler::new(BoxDomain::cube(-1.0, 1.0, k).unwrap())
    }

    #[test]
    fn neighbor_count_default() {
        assert_eq!(default_neighbor_count(1000, 2), 7);
        assert_eq!(default_neighbor_count(1000, 15), 26);
        assert_eq!(default_neighbor_count(5, 15), 5);
    }

    #[test]
    fn affine_data_gives_exact_gradients() {
        let store = uniform_store(&BoxDomain::cube(-1.0, 1.0, 2).unwrap(), 30, 1, |x| 3.0 * x[0] - 2.0 * x[1]);
        let est = estimate_gradients_local_linear(&store, &unit_scaler(2)).unwrap();
        for row in est.gradients.row_iter() {
            assert!((row[0] - 3.0).abs() < 1e-8 && (row[1] + 2.0).abs() < 1e-8);
        }
        assert_eq!(est.rank_deficient, 0);
    }

    #[test]
    fn constant_outputs_give_zero_gradients() {
        let store = uniform_store(&BoxDomain::cube(-1.0, 1.0, 3).unwrap(), 20, 2, |_| 4.0);
        let est = estimate_gradients_local_linear(&store, &unit_scaler(3)).unwrap();
        assert!(est.gradients.amax() < 1e-10);
    }

    #[test]
    fn quadratic_on_segment_has_matching_sign() {
        // f = x₁² sampled on the segment x₂ = 0.3; the x₂ direction is
        // unidentifiable, so the fits are rank deficient and min-norm
        let mut store = SampleStore::new(2);
        for i in 0..41 {
            let x1 = -1.0 + i as f64 * 0.05;
            store.push(&[x1, 0.3], x1 * x1).unwrap();
        }
        let est = estimate_gradients_with_neighbors(&store, &unit_scaler(2), 5).unwrap();
        assert_eq!(est.rank_deficient, 41);
        for i in 0..41 {
            let x1 = store.input(i)[0];
            let g = est.gradients[(i, 0)];
            if x1.abs() > 1e-9 {
                assert_eq!(g.signum(), x1.signum(), "at {x1}: {g}");
            }
            // centered stencils are exact; the two at each end are one-sided
            let tol = if x1.abs() > 0.92 { 0.21 } else { 1e-9 };
            assert!((g - 2.0 * x1).abs() < tol, "at {x1}: {g}");
        }
    }

    #[test]
    fn too_few_samples_is_an_error() {
        let store = uniform_store(&BoxDomain::cube(-1.0, 1.0, 3).unwrap(), 4, 2, |_| 1.0);
        assert!(matches!(
            estimate_gradients_local_linear(&store, &unit_scaler(3)),
            Err(Error::NotEnoughSamples { needed: 5, have: 4 })
        ));
    }

    #[test]
    fn covariance_examples() {
        let g = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(build_covariance(&g), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, -1.0, 0.0]);
        assert_eq!(build_covariance(&g), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]));
    }

    #[test]
    fn covariance_matches_outer_product_sum() {
        let mut r = rng::from_seed(4);
        let g = DMatrix::from_fn(5, 3, |_, _| r.random_range(-2.0..2.0));
        let c = build_covariance(&g);
        for a in 0..3 {
            for b in 0..3 {
                let brute: f64 = (0..5).map(|i| g[(i, a)] * g[(i, b)]).sum::<f64>() / 5.0;
                assert!((c[(a, b)] - brute).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn decompose_diagonal_and_sign_convention() {
        let (l, w) = decompose(&DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 4.0]))).unwrap();
        assert_eq!(l, vec![4.0, 1.0]);
        assert!((w.column(0)[1] - 1.0).abs() < 1e-15 && w.column(0)[0].abs() < 1e-15);
        let (l, w) = decompose(&DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 1.0]))).unwrap();
        assert_eq!(l, vec![4.0, 1.0]);
        assert!((w - DMatrix::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn decompose_uniform_gradient_gives_positive_e1() {
        let g = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        let (_, w) = decompose(&build_covariance(&g)).unwrap();
        assert!((w[(0, 0)] - 1.0).abs() < 1e-14 && w[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn decompose_recovers_rotation() {
        let t: f64 = 0.4;
        let rot = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let c = &rot * DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 1.0])) * rot.transpose();
        let (l, w) = decompose(&c).unwrap();
        assert!((l[0] - 3.0).abs() < 1e-12 && (l[1] - 1.0).abs() < 1e-12);
        for j in 0..2 {
            let dot = w.column(j).dot(&rot.column(j)).abs();
            assert!((dot - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn decompose_rejects_asymmetric() {
        let c = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(decompose(&c), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn spectral_gap_choice() {
        assert_eq!(choose_active_dim(&[1.0, 1e-6, 1e-7]), 1);
        assert_eq!(choose_active_dim(&[5.0, 4.9, 0.001]), 2);
        assert_eq!(choose_active_dim(&[2.0, 2.0, 2.0]), 1);
        assert_eq!(choose_active_dim(&[1.0, 0.0, 0.0]), 1);
    }

    #[test]
    fn forward_examples() {
        let scaler = unit_scaler(2);
        let s = ActiveSubspace::from_parts(vec![1.0, 0.0], DMatrix::identity(2, 2), 1, scaler).unwrap();
        assert!((s.forward(&[0.3, -0.7])[0] - 0.3).abs() < 1e-15);
        let dom = BoxDomain::new(vec![-5.0, 2.0], vec![10.0, 4.0]).unwrap();
        let t: f64 = 1.1;
        let w = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        let s = ActiveSubspace::from_parts(vec![1.0, 0.5], w.clone(), 1, AffineScaler::new(dom.clone())).unwrap();
        assert!(s.forward(&dom.center())[0].abs() < 1e-15);
        let x = [7.0, 2.5];
        let z = [2.0 * (7.0 + 5.0) / 15.0 - 1.0, 2.0 * 0.5 / 2.0 - 1.0];
        let expected = w[(0, 0)] * z[0] + w[(1, 0)] * z[1];
        assert!((s.forward(&x)[0] - expected).abs() < 1e-14);
    }

    #[test]
    fn active_dim_bounds() {
        assert!(ActiveSubspace::from_parts(vec![1.0, 0.0], DMatrix::identity(2, 2), 2, unit_scaler(2)).is_err());
        assert!(ActiveSubspace::from_parts(vec![1.0, 0.0], DMatrix::identity(2, 2), 0, unit_scaler(2)).is_err());
        assert_eq!("auto".parse::<ActiveDim>().unwrap(), ActiveDim::Auto);
        assert_eq!("3".parse::<ActiveDim>().unwrap(), ActiveDim::Fixed(3));
        assert!("x".parse::<ActiveDim>().is_err());
    }

    #[test]
    fn bootstrap_identical_rows_have_zero_width() {
        let dom = BoxDomain::cube(-1.0, 1.0, 3).unwrap();
        let store = uniform_store(&dom, 30, 8, |x| x[0] + 2.0 * x[2]);
        let spec = bootstrap_eigenvalues(&store, &dom, 10, &mut rng::from_seed(1)).unwrap();
        for i in 0..3 {
            assert!((spec.high[i] - spec.low[i]).abs() < 1e-9 * spec.eigenvalues[0]);
        }
    }

    #[test]
    fn bootstrap_brackets_and_is_deterministic() {
        let dom = BoxDomain::cube(-2.0, 2.0, 4).unwrap();
        let store = uniform_store(&dom, 80, 9, |x| x.iter().map(|v| v * v * v).sum::<f64>() + x[0] * x[1]);
        let a = bootstrap_eigenvalues(&store, &dom, 100, &mut rng::from_seed(5)).unwrap();
        let b = bootstrap_eigenvalues(&store, &dom, 100, &mut rng::from_seed(5)).unwrap();
        assert_eq!(a, b);
        for i in 0..4 {
            assert!(a.low[i] <= a.eigenvalues[i] && a.eigenvalues[i] <= a.high[i]);
        }
        assert!(a.high[0] > a.low[0]);
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,eigenvalue,boot_low,boot_high\n1,"));
        assert_eq!(text.lines().count(), 5);
    }

    fn nonlinear(x: &[f64]) -> f64 {
        (x[0] + 0.5 * x[1]).sin() + x[2] * x[2] - 0.3 * x[0] * x[2]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn build_invariants(seed in any::<u64>()) {
            let dom = BoxDomain::new(vec![-3.0, 0.0, 1.0], vec![2.0, 5.0, 2.0]).unwrap();
            let store = uniform_store(&dom, 60, seed, nonlinear);
            let s = build_subspace(&store, &dom, ActiveDim::Fixed(1)).unwrap();
            let wtw = s.w.transpose() * &s.w;
            prop_assert!((wtw - DMatrix::<f64>::identity(3, 3)).amax() < 1e-8);
            prop_assert!(s.eigenvalues.windows(2).all(|w| w[0] >= w[1]));
            prop_assert!(s.eigenvalues.iter().all(|v| *v >= -1e-10));

            let est = estimate_gradients_local_linear(&store, &s.scaler).unwrap();
            let c = build_covariance(&est.gradients);
            let lambda = DMatrix::from_diagonal(&DVector::from_vec(s.eigenvalues.clone()));
            prop_assert!((&c * &s.w - &s.w * lambda).amax() < 1e-6 * c.amax().max(1.0));

            let mut r = rng::from_seed(seed ^ 1);
            for _ in 0..10 {
                let x: Vec<f64> = dom.lower().iter().zip(dom.upper()).map(|(l, u)| r.random_range(*l..*u)).collect();
                let back = s.compose(&s.forward(&x), &s.inactive(&x));
                for (a, b) in back.iter().zip(&x) {
                    prop_assert!((a - b).abs() < 1e-8);
                }
            }
        }

        #[test]
        fn output_scaling_keeps_directions(seed in any::<u64>(), c in 0.1f64..20.0) {
            let dom = BoxDomain::cube(-1.0, 1.0, 3).unwrap();
            let base = uniform_store(&dom, 50, seed, nonlinear);
            let mut scaled = SampleStore::new(3);
            for i in 0..base.len() {
                scaled.push(base.input(i), c * base.outputs()[i]).unwrap();
            }
            let a = build_subspace(&base, &dom, ActiveDim::Fixed(1)).unwrap();
            let b = build_subspace(&scaled, &dom, ActiveDim::Fixed(1)).unwrap();
            // directions are only identifiable where eigenvalues are separated
            let gaps_ok = a.eigenvalues.windows(2).all(|w| w[0] - w[1] > 1e-6 * a.eigenvalues[0]);
            if gaps_ok {
                prop_assert!((&a.w - &b.w).amax() < 1e-7);
            }
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                prop_assert!((y - c * c * x).abs() <= 1e-9 * c * c * a.eigenvalues[0]);
            }
        }

        #[test]
        fn affine_recovery_any_neighbor_count(seed in any::<u64>(), extra in 0usize..20) {
            let k = 4;
            let dom = BoxDomain::cube(-1.0, 1.0, k).unwrap();
            let coef = [1.5, -0.25, 3.0, 0.0];
            let store = uniform_store(&dom, 40, seed, |x| 2.0 + x.iter().zip(&coef).map(|(a, b)| a * b).sum::<f64>());
            let est = estimate_gradients_with_neighbors(&store, &unit_scaler(k), k + 1 + extra).unwrap();
            for row in est.gradients.row_iter() {
                for j in 0..k {
                    prop_assert!((row[j] - coef[j]).abs() < 1e-8);
                }
            }
        }
    }
}
