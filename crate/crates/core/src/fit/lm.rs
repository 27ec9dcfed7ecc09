//! Damped Gauss-Newton (Levenberg-Marquardt) with forward-difference
//! Jacobians and box bounds.
//!
//! Steps are accepted only when they lower the cost, so the accepted cost
//! sequence is monotone. Bounds are handled with an active set: a parameter
//! sitting on a bound whose gradient points outward is frozen for that
//! solve, and every trial point is projected back into the box.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LmOptions {
    pub max_iterations: usize,
    /// Converged once an accepted step lowers the cost by less than this
    /// fraction.
    pub rel_cost_tol: f64,
    /// Per-parameter (lower, upper); empty means unbounded.
    pub bounds: Vec<(f64, f64)>,
    pub initial_lambda: f64,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rel_cost_tol: 1e-10,
            bounds: Vec::new(),
            initial_lambda: 1e-3,
        }
    }
}

impl LmOptions {
    pub fn with_bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = bounds;
        self
    }
}

#[derive(Debug, Clone)]
pub struct LmOutcome {
    pub x: Vec<f64>,
    /// Half the sum of squared residuals.
    pub cost: f64,
    pub residuals: Vec<f64>,
    pub jacobian: DMatrix<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after the initial evaluation and after every accepted step.
    pub cost_history: Vec<f64>,
}

impl LmOutcome {
    /// Condition number of the column-normalized Jacobian at the optimum.
    pub fn condition_number(&self) -> f64 {
        let mut j = self.jacobian.clone();
        for mut col in j.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= norm;
            }
        }
        let sv = j.singular_values();
        let max = sv.iter().copied().fold(0.0, f64::max);
        let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
        if min == 0.0 {
            f64::INFINITY
        } else {
            max / min
        }
    }

    /// Parameter covariance (J^T J)^-1 scaled by the residual variance
    /// 2 cost / (m - n).
    pub fn covariance(&self) -> DMatrix<f64> {
        let (m, n) = self.jacobian.shape();
        let jtj = self.jacobian.transpose() * &self.jacobian;
        let dof = m.saturating_sub(n).max(1) as f64;
        let s2 = 2.0 * self.cost / dof;
        let inv = jtj
            .clone()
            .pseudo_inverse(1e-14 * jtj.amax().max(f64::MIN_POSITIVE))
            .unwrap_or_else(|_| DMatrix::from_element(n, n, f64::NAN));
        let mut cov = inv * s2;
        // symmetrize
        for r in 0..n {
            for c in 0..r {
                let a = 0.5 * (cov[(r, c)] + cov[(c, r)]);
                cov[(r, c)] = a;
                cov[(c, r)] = a;
            }
        }
        cov
    }
}

fn cost_of(r: &[f64]) -> f64 {
    0.5 * r.iter().map(|v| v * v).sum::<f64>()
}

fn project(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

fn jacobian<F>(f: &F, x: &[f64], r0: &[f64], bounds: &[(f64, f64)]) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let m = r0.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let mut h = (1e-6 * x[j].abs()).max(1e-9);
        if let Some(&(_, hi)) = bounds.get(j) {
            if x[j] + h > hi {
                h = -h;
            }
        }
        xp[j] = x[j] + h;
        let step = xp[j] - x[j];
        let rp = f(&xp)?;
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (rp[i] - r0[i]) / step;
        }
    }
    Ok(jac)
}

/// Minimizes half the squared norm of `f(x)` from `x0`.
///
/// A failing evaluation at a trial point rejects that step; a failing
/// evaluation at the start point or inside the Jacobian is returned.
pub fn minimize<F>(f: F, x0: &[f64], opts: &LmOptions) -> Result<LmOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let bounds: Vec<(f64, f64)> = if opts.bounds.is_empty() {
        vec![(f64::NEG_INFINITY, f64::INFINITY); n]
    } else {
        assert_eq!(opts.bounds.len(), n, "one bound pair per parameter");
        opts.bounds.clone()
    };
    let mut x = x0.to_vec();
    project(&mut x, &bounds);
    let mut r = f(&x)?;
    if r.len() < n {
        return Err(Error::Underdetermined {
            points: r.len(),
            parameters: n,
        });
    }
    if r.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonConvergence {
            what: "least squares",
            detail: "non-finite residuals at the starting point".into(),
        });
    }
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut lambda = opts.initial_lambda;
    let mut converged = false;
    let mut iterations = 0;

    'outer: while iterations < opts.max_iterations {
        iterations += 1;
        if cost == 0.0 {
            converged = true;
            break;
        }
        let jac = jacobian(&f, &x, &r, &bounds)?;
        let rv = DVector::from_column_slice(&r);
        let grad = jac.transpose() * &rv;
        let jtj = jac.transpose() * &jac;

        let free: Vec<usize> = (0..n)
            .filter(|&j| {
                let (lo, hi) = bounds[j];
                !((x[j] <= lo && grad[j] > 0.0) || (x[j] >= hi && grad[j] < 0.0))
            })
            .collect();
        if free.is_empty() {
            converged = true;
            break;
        }
        let k = free.len();
        let a = DMatrix::from_fn(k, k, |p, q| jtj[(free[p], free[q])]);
        let g = DVector::from_fn(k, |p, _| grad[free[p]]);
        let diag_floor = 1e-12 * a.diagonal().amax().max(f64::MIN_POSITIVE);

        loop {
            let mut damped = a.clone();
            for p in 0..k {
                damped[(p, p)] += lambda * a[(p, p)].max(diag_floor);
            }
            let step = damped
                .clone()
                .cholesky()
                .map(|c| c.solve(&(-&g)))
                .or_else(|| damped.lu().solve(&(-&g)));
            let Some(step) = step else {
                lambda *= 4.0;
                if lambda > 1e16 {
                    converged = true;
                    break 'outer;
                }
                continue;
            };
            let mut trial = x.clone();
            for (p, &j) in free.iter().enumerate() {
                trial[j] += step[p];
            }
            project(&mut trial, &bounds);
            let moved = trial
                .iter()
                .zip(&x)
                .map(|(a, b)| (a - b).abs() / (b.abs() + 1e-300))
                .fold(0.0, f64::max);
            let trial_r = f(&trial).ok().filter(|v| v.iter().all(|e| e.is_finite()));
            match trial_r {
                Some(tr) if cost_of(&tr) < cost => {
                    let new_cost = cost_of(&tr);
                    let rel = (cost - new_cost) / cost;
                    x = trial;
                    r = tr;
                    cost = new_cost;
                    history.push(cost);
                    lambda = (lambda / 3.0).max(1e-12);
                    if rel < opts.rel_cost_tol || moved < 1e-15 {
                        converged = true;
                        break 'outer;
                    }
                    break;
                }
                _ => {
                    lambda *= 4.0;
                    // no representable decrease left: numerically stationary
                    if lambda > 1e16 || moved < 1e-15 {
                        converged = true;
                        break 'outer;
                    }
                }
            }
        }
    }

    let jac = jacobian(&f, &x, &r, &bounds)?;
    Ok(LmOutcome {
        x,
        cost,
        residuals: r,
        jacobian: jac,
        iterations,
        converged,
        cost_history: history,
    })
}
