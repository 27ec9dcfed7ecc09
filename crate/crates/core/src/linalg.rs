//! Small dense and tridiagonal helpers.
//!
//! Dense Hermitian eigenproblems go through nalgebra. The symmetric
//! tridiagonal solver here (Sturm-sequence bisection plus inverse iteration)
//! backs the real-space phase-grid oracle, which needs only the lowest few
//! eigenpairs of matrices far too large for a dense solver.

use nalgebra::{ComplexField, DMatrix};

/// Real symmetric tridiagonal matrix: `diag` has length n, `off` length n-1.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert!(!diag.is_empty());
        assert_eq!(off.len() + 1, diag.len());
        Self { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    pub fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE.sqrt();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            let q_prev = if q == 0.0 { tiny } else { q };
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q_prev;
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k`-th smallest eigenvalue (0-based), by bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        assert!(k < self.dim());
        let (mut lo, mut hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 4.0 * f64::EPSILON * scale.max(f64::MIN_POSITIVE)
            {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `count` eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, count: usize) -> Vec<f64> {
        (0..count).map(|k| self.eigenvalue(k)).collect()
    }

    /// Normalized eigenvectors for the given (well separated) eigenvalues,
    /// by shifted inverse iteration with Gram-Schmidt against earlier ones.
    pub fn eigenvectors(&self, eigenvalues: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let (lo, hi) = self.gershgorin();
        let scale = lo.abs().max(hi.abs());
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        for &lambda in eigenvalues {
            let shift = lambda + 8.0 * f64::EPSILON * scale;
            let lu = TridiagonalLu::factor(self, shift);
            let mut v: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64 / 13.0)
                .collect();
            for _ in 0..4 {
                lu.solve_in_place(&mut v);
                for prev in &out {
                    let d = dot(prev, &v);
                    v.iter_mut().zip(prev).for_each(|(x, p)| *x -= d * p);
                }
                let norm = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= norm);
            }
            out.push(v);
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// LU factorization of (T - shift I) with partial pivoting; the upper factor
/// has two superdiagonals.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(t: &SymTridiagonal, shift: f64) -> Self {
        let n = t.dim();
        let mut dl = t.off.clone();
        let mut d: Vec<f64> = t.diag.iter().map(|x| x - shift).collect();
        let mut du = t.off.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let tiny = f64::EPSILON * t.diag.iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(1.0);
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// Largest entry of |V^H V - I| over the columns of `v`.
pub fn orthonormality_residual<T: ComplexField<RealField = f64>>(v: &DMatrix<T>) -> f64 {
    let gram = v.adjoint() * v;
    let mut worst = 0.0_f64;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            let diff = (gram[(i, j)].clone() - T::from_real(target)).modulus();
            worst = worst.max(diff);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::SymmetricEigen;

    fn random_tridiagonal(n: usize, seed: u64) -> SymTridiagonal {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        let diag = (0..n).map(|_| 3.0 * next()).collect();
        let off = (0..n - 1).map(|_| next()).collect();
        SymTridiagonal::new(diag, off)
    }

    #[test]
    fn bisection_matches_dense_solver() {
        let t = random_tridiagonal(40, 3);
        let mut dense = DMatrix::<f64>::zeros(40, 40);
        for i in 0..40 {
            dense[(i, i)] = t.diag[i];
            if i + 1 < 40 {
                dense[(i, i + 1)] = t.off[i];
                dense[(i + 1, i)] = t.off[i];
            }
        }
        let mut expected: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let got = t.lowest_eigenvalues(40);
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-12, "{g} vs {e}");
        }
    }

    #[test]
    fn inverse_iteration_gives_eigenvectors() {
        let t = random_tridiagonal(200, 11);
        let vals = t.lowest_eigenvalues(5);
        let vecs = t.eigenvectors(&vals);
        for (lambda, v) in vals.iter().zip(&vecs) {
            let n = v.len();
            let mut res = 0.0_f64;
            for i in 0..n {
                let mut tv = t.diag[i] * v[i];
                if i > 0 {
                    tv += t.off[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    tv += t.off[i] * v[i + 1];
                }
                res = res.max((tv - lambda * v[i]).abs());
            }
            assert!(res < 1e-10, "residual {res}");
        }
        let m = DMatrix::from_fn(200, 5, |i, j| vecs[j][i]);
        assert!(orthonormality_residual(&m) < 1e-12);
    }
}
