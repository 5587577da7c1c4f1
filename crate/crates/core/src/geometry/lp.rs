//! Dense two-phase simplex with Bland's rule.
//!
//! Solves `maximize cᵀx subject to A·x <= b`, with each variable either
//! non-negative or free. Free variables are split as `x = x⁺ − x⁻`. Meant for
//! the small problems arising from polytope geometry; there is no sparse
//! handling or presolve.

use nalgebra::DMatrix;

const PIVOT_EPS: f64 = 1e-11;
const FEAS_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpResult {
    pub point: Vec<f64>,
    pub objective_value: f64,
    pub status: LpStatus,
}

impl LpResult {
    fn without_solution(status: LpStatus, n: usize) -> Self {
        let objective_value = match status {
            LpStatus::Unbounded => f64::INFINITY,
            _ => f64::NEG_INFINITY,
        };
        Self { point: vec![f64::NAN; n], objective_value, status }
    }
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        *self.rows[r].last().unwrap()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                row.iter_mut().zip(&pivot_row).for_each(|(v, pv)| *v -= f * pv);
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations on the objective row over columns `< allowed`.
    /// Returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let m = self.basis.len();
        loop {
            let obj = &self.rows[m];
            // Bland: lowest-index improving column
            let Some(enter) = (0..allowed).find(|&j| obj[j] < -PIVOT_EPS) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.rows[r][enter];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    let better = match leave {
                        None => true,
                        Some((lr, best)) => {
                            ratio < best - 1e-12 || (ratio <= best + 1e-12 && self.basis[r] < self.basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

/// Maximizes `cᵀx` subject to `A·x <= b`; `free[j]` lifts `x_j >= 0`.
pub fn maximize(c: &[f64], a: &DMatrix<f64>, b: &[f64], free: &[bool]) -> LpResult {
    let (m, n) = a.shape();
    assert_eq!(c.len(), n, "objective length");
    assert_eq!(b.len(), m, "rhs length");
    assert_eq!(free.len(), n, "free flags length");

    // column map: original j -> (plus column, optional minus column)
    let mut cols = Vec::with_capacity(n);
    let mut nv = 0;
    for &f in free {
        if f {
            cols.push((nv, Some(nv + 1)));
            nv += 2;
        } else {
            cols.push((nv, None));
            nv += 1;
        }
    }
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    let width = nv + m + n_art + 1;
    let mut rows = vec![vec![0.0; width]; m + 1];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut rows[i];
        for j in 0..n {
            let (p, neg) = cols[j];
            row[p] = sign * a[(i, j)];
            if let Some(q) = neg {
                row[q] = -sign * a[(i, j)];
            }
        }
        row[nv + i] = sign;
        row[width - 1] = sign * b[i];
        if sign < 0.0 {
            row[nv + m + art] = 1.0;
            basis[i] = nv + m + art;
            art += 1;
        } else {
            basis[i] = nv + i;
        }
    }
    let mut t = Tableau { rows, basis };
    let structural = nv + m;

    if n_art > 0 {
        // phase 1: maximize −Σ artificials
        for j in structural..structural + n_art {
            t.rows[m][j] = 1.0;
        }
        for r in 0..m {
            if t.basis[r] >= structural {
                let row = t.rows[r].clone();
                t.rows[m].iter_mut().zip(&row).for_each(|(o, v)| *o -= v);
            }
        }
        t.optimize(structural + n_art);
        if t.rhs(m) < -FEAS_EPS * (1.0 + b.iter().fold(0.0f64, |s, v| s.max(v.abs()))) {
            return LpResult::without_solution(LpStatus::Infeasible, n);
        }
        // drive remaining artificials out of the basis
        for r in 0..m {
            if t.basis[r] >= structural {
                if let Some(c) = (0..structural).find(|&j| t.rows[r][j].abs() > PIVOT_EPS) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // phase 2
    let obj = &mut t.rows[m];
    obj.iter_mut().for_each(|v| *v = 0.0);
    for j in 0..n {
        let (p, neg) = cols[j];
        obj[p] = -c[j];
        if let Some(q) = neg {
            obj[q] = c[j];
        }
    }
    for r in 0..m {
        let bc = t.basis[r];
        let f = t.rows[m][bc];
        if f != 0.0 {
            let row = t.rows[r].clone();
            t.rows[m].iter_mut().zip(&row).for_each(|(o, v)| *o -= f * v);
        }
    }
    if !t.optimize(structural) {
        return LpResult::without_solution(LpStatus::Unbounded, n);
    }

    let mut values = vec![0.0; width - 1];
    for r in 0..m {
        values[t.basis[r]] = t.rhs(r);
    }
    let point: Vec<f64> = cols.iter().map(|&(p, neg)| values[p] - neg.map_or(0.0, |q| values[q])).collect();
    let objective_value = c.iter().zip(&point).map(|(a, b)| a * b).sum();
    LpResult { point, objective_value, status: LpStatus::Optimal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng as _;

    fn lp(c: &[f64], rows: &[&[f64]], b: &[f64], free: &[bool]) -> LpResult {
        let n = c.len();
        let a = DMatrix::from_row_iterator(rows.len(), n, rows.iter().flat_map(|r| r.iter().copied()));
        maximize(c, &a, b, free)
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 → (2, 6), 36
        let r = lp(&[3.0, 5.0], &[&[1.0, 0.0], &[0.0, 2.0], &[3.0, 2.0]], &[4.0, 12.0, 18.0], &[false, false]);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective_value - 36.0).abs() < 1e-9);
        assert!((r.point[0] - 2.0).abs() < 1e-9 && (r.point[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn needs_phase_one() {
        // max −x − y with x + y >= 2 written as −x − y <= −2
        let r = lp(&[-1.0, -1.0], &[&[-1.0, -1.0]], &[-2.0], &[false, false]);
        assert_eq!(r.status, LpStatus::Optimal);
        assert!((r.objective_value + 2.0).abs() < 1e-9);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let r = lp(&[1.0], &[&[1.0], &[-1.0]], &[-1.0, -1.0], &[true]);
        assert_eq!(r.status, LpStatus::Infeasible);
        let r = lp(&[1.0, 0.0], &[&[-1.0, 1.0]], &[1.0], &[false, false]);
        assert_eq!(r.status, LpStatus::Unbounded);
    }

    #[test]
    fn free_variables_go_negative() {
        // max −x s.t. x >= −3 (−x <= 3), x free → x = −3
        let r = lp(&[-1.0], &[&[-1.0]], &[3.0], &[true]);
        assert!((r.point[0] + 3.0).abs() < 1e-12);
    }

    /// Enumerates every vertex: choose n active constraints among the m rows
    /// and the n sign bounds, solve, keep the feasible ones.
    fn vertex_oracle(c: &[f64], a: &DMatrix<f64>, b: &[f64]) -> Option<f64> {
        let (m, n) = a.shape();
        let mut all = DMatrix::zeros(m + n, n);
        let mut rhs = vec![0.0; m + n];
        all.rows_mut(0, m).copy_from(a);
        rhs[..m].copy_from_slice(b);
        for j in 0..n {
            all[(m + j, j)] = -1.0;
        }
        let total = m + n;
        let mut best: Option<f64> = None;
        let mut idx: Vec<usize> = (0..n).collect();
        loop {
            let sub = all.select_rows(idx.iter());
            let r = nalgebra::DVector::from_iterator(n, idx.iter().map(|&i| rhs[i]));
            if let Some(x) = sub.lu().solve(&r) {
                let feasible = (0..total).all(|i| all.row(i).transpose().dot(&x) <= rhs[i] + 1e-9);
                if feasible && x.iter().all(|v| v.is_finite()) {
                    let v: f64 = c.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                    best = Some(best.map_or(v, |b: f64| b.max(v)));
                }
            }
            // next combination
            let mut i = n;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] < total - n + i {
                    break;
                }
            }
            idx[i] += 1;
            for j in i + 1..n {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }

    #[test]
    fn random_lps_match_vertex_enumeration() {
        let mut r = rng::from_seed(2024);
        let mut checked = 0;
        while checked < 50 {
            let n = r.random_range(1..=5);
            let m_random = r.random_range(1..=12 - n);
            let m = m_random + n;
            let mut a = DMatrix::zeros(m, n);
            let mut b = vec![0.0; m];
            for i in 0..m_random {
                for j in 0..n {
                    a[(i, j)] = r.random_range(-1.0..1.0);
                }
                b[i] = r.random_range(-0.5..2.0);
            }
            // box rows keep every instance bounded
            for j in 0..n {
                a[(m_random + j, j)] = 1.0;
                b[m_random + j] = r.random_range(1.0..5.0);
            }
            let c: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let res = maximize(&c, &a, &b, &vec![false; n]);
            match vertex_oracle(&c, &a, &b) {
                Some(best) => {
                    assert_eq!(res.status, LpStatus::Optimal);
                    assert!((res.objective_value - best).abs() < 1e-6, "{} vs {best}", res.objective_value);
                    for (row, bi) in a.row_iter().zip(b.iter()) {
                        assert!(row.iter().zip(&res.point).map(|(x, y)| x * y).sum::<f64>() <= bi + 1e-7);
                    }
                    assert!(res.point.iter().all(|v| *v >= -1e-7));
                }
                None => assert_eq!(res.status, LpStatus::Infeasible),
            }
            checked += 1;
        }
    }
}
