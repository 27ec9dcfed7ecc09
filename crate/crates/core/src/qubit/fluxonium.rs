use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{max_abs_diff, EnergySpectrum, FluxConfig, FluxoniumParams, SolverConfig};
use crate::constants::TWO_PI;
use crate::error::{Error, Result};

/// Oscillator ladder basis of the fluxonium LC part, centered on the total
/// phase offset. The phase displacement x = phi - phi_off is
/// phi_zpf (a + a^dag); the Josephson term is built by diagonalizing the
/// truncated x and applying the cosine to its eigenvalues.
#[derive(Debug, Clone)]
struct LadderBasis {
    dim: usize,
    e_j: f64,
    e_l: f64,
    omega: f64,
    phi_zpf: f64,
    n_zpf: f64,
    x_values: Vec<f64>,
    x_vectors: DMatrix<f64>,
}

impl LadderBasis {
    fn new(params: &FluxoniumParams, dim: usize) -> Self {
        let phi_zpf = params.phi_zpf();
        let mut x = DMatrix::<f64>::zeros(dim, dim);
        for k in 1..dim {
            let v = phi_zpf * (k as f64).sqrt();
            x[(k - 1, k)] = v;
            x[(k, k - 1)] = v;
        }
        let eig = SymmetricEigen::new(x);
        Self {
            dim,
            e_j: params.e_j,
            e_l: params.e_l,
            omega: params.plasma_frequency(),
            phi_zpf,
            n_zpf: params.n_zpf(),
            x_values: eig.eigenvalues.iter().copied().collect(),
            x_vectors: eig.eigenvectors,
        }
    }

    fn hamiltonian(&self, phi_off: f64) -> DMatrix<f64> {
        let mut h = if self.e_j == 0.0 {
            DMatrix::zeros(self.dim, self.dim)
        } else {
            let weights = DVector::from_iterator(
                self.dim,
                self.x_values.iter().map(|xi| -self.e_j * (phi_off + xi).cos()),
            );
            let scaled = DMatrix::from_fn(self.dim, self.dim, |r, c| {
                self.x_vectors[(r, c)] * weights[c]
            });
            let mut m = scaled * self.x_vectors.transpose();
            // symmetrize away rounding in the triple product
            for r in 0..self.dim {
                for c in 0..r {
                    let avg = 0.5 * (m[(r, c)] + m[(c, r)]);
                    m[(r, c)] = avg;
                    m[(c, r)] = avg;
                }
            }
            m
        };
        for k in 0..self.dim {
            h[(k, k)] += self.omega * (k as f64 + 0.5);
        }
        h
    }

    fn spectrum(&self, phi_off: f64, n_levels: usize) -> EnergySpectrum {
        let eig = SymmetricEigen::new(self.hamiltonian(phi_off));
        let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let mut spec = EnergySpectrum::from_eigen(&values, &eig.eigenvectors, n_levels);
        fix_sign_gauge(&mut spec.eigenvectors);
        spec
    }

    /// <u| x |v> for real basis vectors.
    fn displacement_element(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 1..self.dim {
            let a = (k as f64).sqrt();
            s += a * (u[k - 1] * v[k] + u[k] * v[k - 1]);
        }
        self.phi_zpf * s
    }

    /// |<u| n |v>| with n = i n_zpf (a^dag - a).
    fn charge_element(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in 1..self.dim {
            let a = (k as f64).sqrt();
            s += a * (u[k] * v[k - 1] - u[k - 1] * v[k]);
        }
        (self.n_zpf * s).abs()
    }
}

/// Makes the largest-magnitude entry of every column positive so results do
/// not depend on the eigensolver's sign choice.
fn fix_sign_gauge(v: &mut DMatrix<f64>) {
    for mut col in v.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(1.0);
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
}

/// A fluxonium with a fixed, convergence-checked basis size. Building one
/// is the expensive part; spectra at many offsets then reuse the basis.
#[derive(Debug, Clone)]
pub struct FluxoniumSolver {
    params: FluxoniumParams,
    n_levels: usize,
    basis: LadderBasis,
}

impl FluxoniumSolver {
    /// Chooses the basis by checking convergence at offsets 0, pi/2 and pi
    /// when `solver.verify_convergence` is set.
    pub fn new(params: &FluxoniumParams, solver: &SolverConfig) -> Result<Self> {
        Self::with_probes(params, solver, &[0.0, 0.5 * std::f64::consts::PI, std::f64::consts::PI])
    }

    pub fn with_probes(
        params: &FluxoniumParams,
        solver: &SolverConfig,
        probe_offsets: &[f64],
    ) -> Result<Self> {
        params.validate()?;
        solver.validate()?;
        let n_levels = solver.n_levels;
        let mut dim = solver.basis_dim;
        let mut basis = LadderBasis::new(params, dim);
        if solver.verify_convergence {
            loop {
                let larger_dim = dim + SolverConfig::BASIS_STEP;
                if larger_dim > solver.max_basis_dim {
                    return Err(Error::NonConvergence {
                        what: "fluxonium spectrum",
                        detail: format!(
                            "eigen-frequencies still moving at basis_dim {dim} (max {})",
                            solver.max_basis_dim
                        ),
                    });
                }
                let larger = LadderBasis::new(params, larger_dim);
                let worst = probe_offsets
                    .iter()
                    .map(|&off| {
                        max_abs_diff(
                            &basis.spectrum(off, n_levels).frequencies,
                            &larger.spectrum(off, n_levels).frequencies,
                        )
                    })
                    .fold(0.0, f64::max);
                if worst < SolverConfig::TOLERANCE {
                    break;
                }
                dim = larger_dim;
                basis = larger;
            }
        }
        Ok(Self {
            params: *params,
            n_levels,
            basis,
        })
    }

    pub fn params(&self) -> &FluxoniumParams {
        &self.params
    }

    pub fn basis_dim(&self) -> usize {
        self.basis.dim
    }

    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// Spectrum at total phase offset phi_trap + phi_ext.
    pub fn spectrum(&self, phi_off: f64) -> EnergySpectrum {
        self.basis.spectrum(phi_off, self.n_levels)
    }

    pub fn f01(&self, phi_off: f64) -> f64 {
        self.spectrum(phi_off).f01()
    }

    /// |<i| n |j>| between eigenstates of `spec`.
    pub fn charge_element(&self, spec: &EnergySpectrum, i: usize, j: usize) -> Result<f64> {
        check_pair(spec.n_levels(), i, j)?;
        let u: Vec<f64> = spec.eigenvectors.column(i).iter().copied().collect();
        let v: Vec<f64> = spec.eigenvectors.column(j).iter().copied().collect();
        Ok(self.basis.charge_element(&u, &v))
    }

    /// df01/dphi_ext in GHz/rad by Hellmann-Feynman,
    /// E_L (<0|x|0> - <1|x|1>) with x = phi - phi_off.
    pub fn dispersion_of(&self, spec: &EnergySpectrum) -> Result<f64> {
        let gap = spec.f01();
        if gap.abs() < SolverConfig::TOLERANCE {
            return Err(Error::Degenerate {
                lower: 0,
                upper: 1,
                gap,
            });
        }
        let v0: Vec<f64> = spec.eigenvectors.column(0).iter().copied().collect();
        let v1: Vec<f64> = spec.eigenvectors.column(1).iter().copied().collect();
        let x00 = self.basis.displacement_element(&v0, &v0);
        let x11 = self.basis.displacement_element(&v1, &v1);
        Ok(self.basis.e_l * (x00 - x11))
    }

    pub fn dispersion(&self, phi_off: f64) -> Result<f64> {
        self.dispersion_of(&self.spectrum(phi_off))
    }

    /// External phase minimizing f01 over `window` for the given trap phase.
    ///
    /// Golden-section search brackets the minimum; the bracket is then
    /// polished by bisection on the sign of the Hellmann-Feynman
    /// dispersion, which resolves the flat minimum far below the
    /// golden-section floor of ~sqrt(eps).
    pub fn sweet_spot(&self, phi_trap: f64, window: (f64, f64)) -> Result<f64> {
        let (lo, hi) = window;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("bad window [{lo}, {hi}]")));
        }
        if hi - lo > TWO_PI + 1e-12 {
            return Err(Error::invalid(format!(
                "window length {} exceeds 2pi",
                hi - lo
            )));
        }
        let f = |phi_ext: f64| self.f01(phi_trap + phi_ext);
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let (mut a, mut b) = (lo, hi);
        let mut c = b - inv_phi * (b - a);
        let mut d = a + inv_phi * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > 1e-6 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = f(d);
            }
        }
        let edge_tol = 1e-5;
        let guess = 0.5 * (a + b);
        if guess - lo < edge_tol || hi - guess < edge_tol {
            return Err(Error::NoInteriorMinimum { lo, hi });
        }
        // widen slightly so the bracket certainly contains the stationary point
        let (mut a, mut b) = (guess - 2e-6, guess + 2e-6);
        let da = self.dispersion(phi_trap + a)?;
        let db = self.dispersion(phi_trap + b)?;
        if !(da <= 0.0 && db >= 0.0) {
            return Ok(guess);
        }
        for _ in 0..60 {
            if b - a < 1e-12 {
                break;
            }
            let m = 0.5 * (a + b);
            if self.dispersion(phi_trap + m)? < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Ok(0.5 * (a + b))
    }
}

fn check_pair(n_levels: usize, i: usize, j: usize) -> Result<()> {
    if i == j || i >= n_levels || j >= n_levels {
        return Err(Error::IndexOutOfRange(format!(
            "levels ({i}, {j}) with {n_levels} levels; need distinct indices < n_levels"
        )));
    }
    Ok(())
}

/// Lowest `solver.n_levels` eigen-frequencies of
/// 4 E_C n^2 - E_J cos(phi) + E_L (phi - phi_trap - phi_ext)^2 / 2.
pub fn fluxonium_spectrum(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    solver: &SolverConfig,
) -> Result<EnergySpectrum> {
    flux.validate()?;
    let off = flux.total_offset();
    let s = FluxoniumSolver::with_probes(params, solver, &[off])?;
    Ok(s.spectrum(off))
}

/// f_j - f_i in GHz.
pub fn transition_frequency(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    i: usize,
    j: usize,
    solver: &SolverConfig,
) -> Result<f64> {
    if i >= j || j >= solver.n_levels {
        return Err(Error::IndexOutOfRange(format!(
            "transition ({i}, {j}) with {} levels; need 0 <= i < j < n_levels",
            solver.n_levels
        )));
    }
    fluxonium_spectrum(params, flux, solver)?.transition(i, j)
}

/// |<i| n |j>| between fluxonium eigenstates.
pub fn charge_matrix_element(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    i: usize,
    j: usize,
    solver: &SolverConfig,
) -> Result<f64> {
    check_pair(solver.n_levels, i, j)?;
    flux.validate()?;
    let off = flux.total_offset();
    let s = FluxoniumSolver::with_probes(params, solver, &[off])?;
    s.charge_element(&s.spectrum(off), i, j)
}

/// df01/dphi_ext in GHz/rad. Multiply by 2pi for GHz per flux quantum.
pub fn flux_dispersion(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    solver: &SolverConfig,
) -> Result<f64> {
    flux.validate()?;
    let off = flux.total_offset();
    let s = FluxoniumSolver::with_probes(params, solver, &[off])?;
    s.dispersion(off)
}

/// External phase at the f01 minimum inside `window` for trap phase `phi_trap`.
pub fn find_sweet_spot(
    params: &FluxoniumParams,
    phi_trap: f64,
    window: (f64, f64),
    solver: &SolverConfig,
) -> Result<f64> {
    let mid = phi_trap + 0.5 * (window.0 + window.1);
    let s = FluxoniumSolver::with_probes(params, solver, &[mid])?;
    s.sweet_spot(phi_trap, window)
}
