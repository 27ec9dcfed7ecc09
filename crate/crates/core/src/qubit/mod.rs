//! Circuit Hamiltonians and their spectra.
//!
//! All energies are E/h in GHz and all phases are in radians. The fluxonium
//! is diagonalized in the ladder basis of its LC oscillator, the SQUID
//! transmon in the integer-charge basis.

mod fluxonium;
mod oracle;
mod transmon;

use std::f64::consts::PI;

use nalgebra::{ComplexField, DMatrix};
use serde::{Deserialize, Serialize};

use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::linalg::orthonormality_residual;

pub use fluxonium::{
    charge_matrix_element, find_sweet_spot, flux_dispersion, fluxonium_spectrum,
    transition_frequency, FluxoniumSolver,
};
pub use oracle::{phase_grid_charge_element, phase_grid_oracle, PhaseGridOptions};
pub use transmon::{transmon_freq_approx, transmon_josephson_energy, transmon_spectrum};

/// Fluxonium circuit energies, E/h in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxoniumParams {
    pub e_j: f64,
    pub e_c: f64,
    pub e_l: f64,
}

impl FluxoniumParams {
    pub fn new(e_j: f64, e_c: f64, e_l: f64) -> Result<Self> {
        let p = Self { e_j, e_c, e_l };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_c.is_finite() && self.e_c > 0.0) {
            return Err(Error::invalid(format!("e_c must be > 0, got {}", self.e_c)));
        }
        if !(self.e_l.is_finite() && self.e_l > 0.0) {
            return Err(Error::invalid(format!("e_l must be > 0, got {}", self.e_l)));
        }
        if !(self.e_j.is_finite() && self.e_j >= 0.0) {
            return Err(Error::invalid(format!("e_j must be >= 0, got {}", self.e_j)));
        }
        Ok(())
    }

    /// LC plasma frequency sqrt(8 E_C E_L), GHz.
    pub fn plasma_frequency(&self) -> f64 {
        (8.0 * self.e_c * self.e_l).sqrt()
    }

    /// Phase zero-point spread (2 E_C / E_L)^(1/4).
    pub fn phi_zpf(&self) -> f64 {
        (2.0 * self.e_c / self.e_l).powf(0.25)
    }

    /// Charge zero-point spread (E_L / 32 E_C)^(1/4).
    pub fn n_zpf(&self) -> f64 {
        (self.e_l / (32.0 * self.e_c)).powf(0.25)
    }
}

/// Phase bias of a fluxonium: external phase plus the phase offset left by
/// the trapped fluxoid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxConfig {
    pub phi_ext: f64,
    pub phi_trap: f64,
    pub n_trapped: Option<i64>,
}

impl FluxConfig {
    /// `phi_trap` is wrapped into [0, 2pi).
    pub fn new(phi_ext: f64, phi_trap: f64) -> Self {
        Self {
            phi_ext,
            phi_trap: wrap_phase(phi_trap),
            n_trapped: None,
        }
    }

    /// Bias with `n` trapped fluxoids, i.e. phi_trap = n pi mod 2pi.
    pub fn trapped(n: i64, phi_ext: f64) -> Self {
        Self {
            phi_ext,
            phi_trap: crate::fluxtrap::trap_phase(n),
            n_trapped: Some(n),
        }
    }

    /// Bias given directly as a total phase offset phi_trap + phi_ext.
    pub fn from_offset(phi_off: f64) -> Self {
        Self::new(phi_off, 0.0)
    }

    pub fn total_offset(&self) -> f64 {
        self.phi_trap + self.phi_ext
    }

    pub fn validate(&self) -> Result<()> {
        if !self.phi_ext.is_finite() {
            return Err(Error::invalid("phi_ext must be finite"));
        }
        if !(0.0..TWO_PI).contains(&self.phi_trap) {
            return Err(Error::invalid(format!(
                "phi_trap must lie in [0, 2pi), got {}",
                self.phi_trap
            )));
        }
        if let Some(n) = self.n_trapped {
            let expected = crate::fluxtrap::trap_phase(n);
            if (self.phi_trap - expected).abs() >= 1e-12 {
                return Err(Error::invalid(format!(
                    "phi_trap {} inconsistent with n_trapped = {n}",
                    self.phi_trap
                )));
            }
        }
        Ok(())
    }
}

/// Reduces a phase into [0, 2pi).
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(TWO_PI);
    // rem_euclid can round up to exactly 2pi for tiny negative inputs
    if r >= TWO_PI {
        0.0
    } else {
        r
    }
}

/// SQUID-transmon energies, E/h in GHz; `n_g` is the offset charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransmonParams {
    pub e_j1: f64,
    pub e_j2: f64,
    pub e_c: f64,
    pub n_g: f64,
}

impl TransmonParams {
    pub fn new(e_j1: f64, e_j2: f64, e_c: f64, n_g: f64) -> Result<Self> {
        let p = Self { e_j1, e_j2, e_c, n_g };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_j2.is_finite() && self.e_j2 >= 0.0 && self.e_j1 >= self.e_j2) {
            return Err(Error::invalid(format!(
                "need e_j1 >= e_j2 >= 0, got e_j1 = {}, e_j2 = {}",
                self.e_j1, self.e_j2
            )));
        }
        if !(self.e_c.is_finite() && self.e_c > 0.0) {
            return Err(Error::invalid(format!("e_c must be > 0, got {}", self.e_c)));
        }
        if !self.n_g.is_finite() {
            return Err(Error::invalid("n_g must be finite"));
        }
        Ok(())
    }
}

/// Truncation and output sizes for the diagonalizers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Oscillator-basis dimension for the fluxonium.
    pub basis_dim: usize,
    /// Largest |charge number| kept for the transmon.
    pub charge_cutoff: usize,
    /// Number of eigenpairs returned.
    pub n_levels: usize,
    /// When set, every spectrum is recomputed in a larger basis and the
    /// basis is grown until the eigen-frequencies agree to
    /// [`SolverConfig::TOLERANCE`].
    pub verify_convergence: bool,
    /// Upper limit for basis growth during verification.
    pub max_basis_dim: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            basis_dim: 120,
            charge_cutoff: 40,
            n_levels: 6,
            verify_convergence: true,
            max_basis_dim: 400,
        }
    }
}

impl SolverConfig {
    /// Eigen-frequency convergence tolerance, GHz.
    pub const TOLERANCE: f64 = 1e-9;
    /// Fluxonium basis increment used by the convergence test.
    pub const BASIS_STEP: usize = 20;
    /// Transmon charge-cutoff increment used by the convergence test.
    pub const CHARGE_STEP: usize = 10;

    pub fn with_levels(mut self, n_levels: usize) -> Self {
        self.n_levels = n_levels;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_levels == 0 {
            return Err(Error::invalid("n_levels must be >= 1"));
        }
        if self.basis_dim < 3 * self.n_levels {
            return Err(Error::invalid(format!(
                "basis_dim {} must be >= 3 * n_levels = {}",
                self.basis_dim,
                3 * self.n_levels
            )));
        }
        if self.charge_cutoff < 10 {
            return Err(Error::invalid(format!(
                "charge_cutoff must be >= 10, got {}",
                self.charge_cutoff
            )));
        }
        if self.max_basis_dim < self.basis_dim {
            return Err(Error::invalid("max_basis_dim must be >= basis_dim"));
        }
        Ok(())
    }
}

/// Lowest eigenpairs of a diagonalized Hamiltonian. `frequencies` are the
/// eigenvalues E_k/h in GHz in ascending order; column k of `eigenvectors`
/// holds the basis coefficients of level k.
#[derive(Debug, Clone)]
pub struct EnergySpectrum<T: ComplexField<RealField = f64> = f64> {
    pub frequencies: Vec<f64>,
    pub eigenvectors: DMatrix<T>,
}

impl<T: ComplexField<RealField = f64>> EnergySpectrum<T> {
    pub fn n_levels(&self) -> usize {
        self.frequencies.len()
    }

    /// f_j - f_i in GHz.
    pub fn transition(&self, i: usize, j: usize) -> Result<f64> {
        let n = self.n_levels();
        if i >= j || j >= n {
            return Err(Error::IndexOutOfRange(format!(
                "transition ({i}, {j}) with {n} levels; need 0 <= i < j < n"
            )));
        }
        Ok(self.frequencies[j] - self.frequencies[i])
    }

    pub fn f01(&self) -> f64 {
        self.frequencies[1] - self.frequencies[0]
    }

    pub fn orthonormality_residual(&self) -> f64 {
        orthonormality_residual(&self.eigenvectors)
    }

    /// Builds a spectrum from an unordered Hermitian eigendecomposition,
    /// keeping the lowest `n_levels` pairs.
    pub(crate) fn from_eigen(values: &[f64], vectors: &DMatrix<T>, n_levels: usize) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        order.truncate(n_levels);
        let frequencies = order.iter().map(|&k| values[k]).collect();
        let eigenvectors = DMatrix::from_fn(vectors.nrows(), order.len(), |r, c| {
            vectors[(r, order[c])].clone()
        });
        Self {
            frequencies,
            eigenvectors,
        }
    }
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Total offset of the fluxonium sweet spot.
pub const SWEET_SPOT_OFFSET: f64 = PI;
