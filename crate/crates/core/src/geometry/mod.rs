//! Back-mapping from active variables to full-space points.
//!
//! For a fixed active point `μ*`, the inactive variables `η` that keep
//! `W₁μ* + W₂η` inside `[-1, 1]^k` form the polytope
//! `{η : W₂η <= 1 − W₁μ*, −W₂η <= 1 + W₁μ*}`. Samples are drawn from it by
//! bounding-box rejection, then hit-and-run from the Chebyshev center, and as
//! a last resort the center itself is repeated.

pub mod lp;

pub use lp::{maximize, LpResult, LpStatus};

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::subspace::ActiveSubspace;

/// Slack allowed when testing sampler output against `A·η <= b`.
pub const CONTAINMENT_TOL: f64 = 1e-10;
/// Chebyshev radius below which the polytope is treated as lower dimensional.
pub const MIN_RADIUS: f64 = 1e-10;
const DIRECTION_ATTEMPTS: usize = 100;

/// H-representation `{η : A·η <= b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    /// Known per-coordinate bounds enclosing the polytope, if any.
    pub bounding_box: Option<Vec<(f64, f64)>>,
}

impl Polytope {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(Error::DimensionMismatch { expected: a.nrows(), actual: b.len() });
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(Self { a, b, bounding_box: None })
    }

    pub fn with_bounding_box(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounding_box = Some(bounds);
        self
    }

    /// Dimension of the ambient space.
    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn slack(&self, eta: &[f64]) -> DVector<f64> {
        &self.b - &self.a * DVector::from_column_slice(eta)
    }

    pub fn contains(&self, eta: &[f64], tol: f64) -> bool {
        self.slack(eta).iter().all(|s| *s >= -tol)
    }

    /// Row-wise strict feasibility; all-zero rows only need `b >= 0`.
    fn strictly_contains(&self, eta: &[f64]) -> bool {
        let slack = self.slack(eta);
        self.a.row_iter().zip(slack.iter()).all(
            |(row, s)| {
                if row.iter().all(|v| *v == 0.0) {
                    *s >= 0.0
                } else {
                    *s > 0.0
                }
            },
        )
    }

    /// The known bounding box, or one computed by `2q` linear programs.
    pub fn bounds(&self) -> Result<Vec<(f64, f64)>> {
        if let Some(b) = &self.bounding_box {
            return Ok(b.clone());
        }
        let q = self.dim();
        let free = vec![true; q];
        let rhs: Vec<f64> = self.b.iter().copied().collect();
        (0..q)
            .map(|j| {
                let mut c = vec![0.0; q];
                c[j] = 1.0;
                let hi = maximize(&c, &self.a, &rhs, &free);
                c[j] = -1.0;
                let lo = maximize(&c, &self.a, &rhs, &free);
                match (hi.status, lo.status) {
                    (LpStatus::Optimal, LpStatus::Optimal) => Ok((-lo.objective_value, hi.objective_value)),
                    (LpStatus::Infeasible, _) | (_, LpStatus::Infeasible) => Err(Error::Infeasible),
                    _ => Err(Error::Unbounded),
                }
            })
            .collect()
    }
}

/// Feasible inactive variables for the active point `mu_star`:
/// `A = [W₂; −W₂]`, `b = [1 − W₁μ*; 1 + W₁μ*]`.
///
/// The attached bounding box is `|η_j| <= Σ_i |W₂[i, j]|`, valid because
/// `η = W₂ᵀz` for some `z ∈ [-1, 1]^k`.
pub fn inactive_polytope(subspace: &ActiveSubspace, mu_star: &[f64]) -> Result<Polytope> {
    if mu_star.len() != subspace.active_dim {
        return Err(Error::DimensionMismatch { expected: subspace.active_dim, actual: mu_star.len() });
    }
    if let Some(index) = mu_star.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    let k = subspace.dim();
    let w2 = subspace.w2();
    let shift = subspace.w1() * DVector::from_column_slice(mu_star);
    let mut a = DMatrix::zeros(2 * k, w2.ncols());
    a.rows_mut(0, k).copy_from(&w2);
    a.rows_mut(k, k).copy_from(&(-&w2));
    let b = DVector::from_fn(2 * k, |i, _| if i < k { 1.0 - shift[i] } else { 1.0 + shift[i - k] });
    let bounds = w2
        .column_iter()
        .map(|col| {
            let r = col.iter().map(|v| v.abs()).sum::<f64>();
            (-r, r)
        })
        .collect();
    Ok(Polytope::new(a, b)?.with_bounding_box(bounds))
}

/// Center and radius of the largest inscribed ball.
#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevBall {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// Solves `max r s.t. a_iᵀx + r‖a_i‖ <= b_i, r >= 0`.
pub fn chebyshev_center(p: &Polytope) -> Result<ChebyshevBall> {
    let (m, q) = p.a.shape();
    let mut a = DMatrix::zeros(m, q + 1);
    a.columns_mut(0, q).copy_from(&p.a);
    for i in 0..m {
        a[(i, q)] = p.a.row(i).norm();
    }
    let mut c = vec![0.0; q + 1];
    c[q] = 1.0;
    let mut free = vec![true; q + 1];
    free[q] = false;
    let rhs: Vec<f64> = p.b.iter().copied().collect();
    let res = maximize(&c, &a, &rhs, &free);
    match res.status {
        LpStatus::Optimal => Ok(ChebyshevBall { center: res.point[..q].to_vec(), radius: res.point[q].max(0.0) }),
        LpStatus::Infeasible => Err(Error::Infeasible),
        LpStatus::Unbounded => Err(Error::Unbounded),
    }
}

/// Accepted samples and the number of box draws spent on them.
#[derive(Debug, Clone, PartialEq)]
pub struct RejectionOutcome {
    pub samples: Vec<Vec<f64>>,
    pub trials: usize,
}

/// Uniform draws from the bounding box, kept when inside the polytope. Stops
/// after `count` acceptances or `max_trials` draws; a short result means the
/// caller needs another strategy.
pub fn sample_rejection(p: &Polytope, count: usize, max_trials: usize, rng: &mut Rng) -> RejectionOutcome {
    let mut out = RejectionOutcome { samples: Vec::new(), trials: 0 };
    let Ok(bounds) = p.bounds() else {
        return out;
    };
    while out.samples.len() < count && out.trials < max_trials {
        out.trials += 1;
        let eta: Vec<f64> =
            bounds.iter().map(|&(lo, hi)| if hi > lo { rng.random_range(lo..hi) } else { lo }).collect();
        if p.contains(&eta, 1e-12) {
            out.samples.push(eta);
        }
    }
    out
}

fn random_direction(q: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return d.into_iter().map(|v| v / norm).collect();
        }
    }
}

/// Feasible interval `[t⁻, t⁺]` of `x + t·d`.
fn chord(p: &Polytope, x: &[f64], d: &[f64]) -> Result<(f64, f64)> {
    let slack = p.slack(x);
    let ad = &p.a * DVector::from_column_slice(d);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (s, a) in slack.iter().zip(ad.iter()) {
        let s = s.max(0.0);
        if *a > 1e-14 {
            hi = hi.min(s / a);
        } else if *a < -1e-14 {
            lo = lo.max(s / a);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Unbounded);
    }
    Ok((lo, hi))
}

/// Hit-and-run walk from a strictly feasible `start`. After a burn-in of
/// `10·q` moves every position is emitted.
pub fn sample_hit_and_run(p: &Polytope, count: usize, start: &[f64], rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    sample_hit_and_run_with(p, count, start, 10 * p.dim(), rng)
}

/// [`sample_hit_and_run`] with an explicit number of discarded moves.
pub fn sample_hit_and_run_with(
    p: &Polytope,
    count: usize,
    start: &[f64],
    burn_in: usize,
    rng: &mut Rng,
) -> Result<Vec<Vec<f64>>> {
    let q = p.dim();
    if start.len() != q {
        return Err(Error::DimensionMismatch { expected: q, actual: start.len() });
    }
    if !p.strictly_contains(start) {
        return Err(Error::InfeasibleStart);
    }
    let mut x = start.to_vec();
    let mut out = Vec::with_capacity(count);
    let mut step = 0;
    while out.len() < count {
        let mut moved = false;
        for _ in 0..DIRECTION_ATTEMPTS {
            let d = random_direction(q, rng);
            let (lo, hi) = chord(p, &x, &d)?;
            if hi - lo > 1e-14 {
                let t = lo + (hi - lo) * rng.random::<f64>();
                x.iter_mut().zip(&d).for_each(|(xi, di)| *xi += t * di);
                moved = true;
                break;
            }
        }
        if !moved {
            return Err(Error::DegeneratePolytope);
        }
        step += 1;
        if step > burn_in {
            out.push(x.clone());
        }
    }
    Ok(out)
}

/// Which back-mapping stage produced how many inactive samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StageCounts {
    pub rejection: usize,
    pub hit_and_run: usize,
    pub center_copies: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardOutcome {
    /// Points in original coordinates.
    pub points: Vec<Vec<f64>>,
    pub stages: StageCounts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackwardOptions {
    /// Rejection draws allowed per requested point.
    pub trials_per_point: usize,
    /// Hit-and-run moves discarded per inactive dimension.
    pub burn_in_per_dim: usize,
}

impl Default for BackwardOptions {
    fn default() -> Self {
        Self { trials_per_point: 100, burn_in_per_dim: 0 }
    }
}

/// `count` full-space points whose active variables equal `mu_star`.
///
/// Returns [`Error::Infeasible`] when no point of the domain projects onto
/// `mu_star`.
pub fn backward(subspace: &ActiveSubspace, mu_star: &[f64], count: usize, rng: &mut Rng) -> Result<BackwardOutcome> {
    backward_with(subspace, mu_star, count, BackwardOptions::default(), rng)
}

pub fn backward_with(
    subspace: &ActiveSubspace,
    mu_star: &[f64],
    count: usize,
    options: BackwardOptions,
    rng: &mut Rng,
) -> Result<BackwardOutcome> {
    if count == 0 {
        return Err(Error::config("backward", "B must be at least 1"));
    }
    let polytope = inactive_polytope(subspace, mu_star)?;
    let mut stages = StageCounts::default();

    let mut etas = sample_rejection(&polytope, count, options.trials_per_point * count, rng).samples;
    stages.rejection = etas.len();
    if etas.len() < count {
        let ball = chebyshev_center(&polytope)?;
        let missing = count - etas.len();
        let walked = if ball.radius >= MIN_RADIUS {
            sample_hit_and_run_with(&polytope, missing, &ball.center, options.burn_in_per_dim * polytope.dim(), rng)
                .ok()
        } else {
            None
        };
        match walked {
            Some(w) => {
                stages.hit_and_run = w.len();
                etas.extend(w);
            }
            None => {
                stages.center_copies = missing;
                etas.extend(std::iter::repeat_n(ball.center, missing));
            }
        }
    }

    let domain = subspace.scaler.domain();
    let points = etas
        .iter()
        .map(|eta| {
            let mut z = subspace.compose_scaled(mu_star, eta);
            z.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
            let mut x = subspace.scaler.unscale(&z);
            domain.clip(&mut x);
            x
        })
        .collect();
    Ok(BackwardOutcome { points, stages })
}
