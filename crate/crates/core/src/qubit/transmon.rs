use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{max_abs_diff, EnergySpectrum, SolverConfig, TransmonParams};
use crate::error::{Error, Result};

fn charge_basis_spectrum(
    p: &TransmonParams,
    phi_ext: f64,
    cutoff: usize,
    n_levels: usize,
) -> EnergySpectrum<Complex64> {
    let dim = 2 * cutoff + 1;
    let c = cutoff as f64;
    let mut h = DMatrix::<Complex64>::zeros(dim, dim);
    // <n+1| e^{i phi} |n> = 1, so cos(phi - phi_ext) couples n -> n+1 with
    // e^{-i phi_ext} / 2 and n+1 -> n with e^{+i phi_ext} / 2.
    let lower = -0.5 * (Complex64::from(p.e_j1) + p.e_j2 * Complex64::from_polar(1.0, -phi_ext));
    for k in 0..dim {
        let n = k as f64 - c;
        h[(k, k)] = Complex64::from(4.0 * p.e_c * (n - p.n_g).powi(2));
        if k + 1 < dim {
            h[(k + 1, k)] = lower;
            h[(k, k + 1)] = lower.conj();
        }
    }
    let eig = SymmetricEigen::new(h);
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let mut spec = EnergySpectrum::from_eigen(&values, &eig.eigenvectors, n_levels);
    for mut col in spec.eigenvectors.column_iter_mut() {
        let pivot = col
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .unwrap_or(Complex64::new(1.0, 0.0));
        let phase = pivot.conj() / pivot.norm();
        col.iter_mut().for_each(|z| *z *= phase);
    }
    spec
}

/// Spectrum of 4 E_C (n - n_g)^2 - E_J1 cos(phi) - E_J2 cos(phi - phi_ext)
/// in the integer-charge basis |n| <= charge_cutoff.
pub fn transmon_spectrum(
    tparams: &TransmonParams,
    phi_ext: f64,
    solver: &SolverConfig,
) -> Result<EnergySpectrum<Complex64>> {
    tparams.validate()?;
    solver.validate()?;
    if !phi_ext.is_finite() {
        return Err(Error::invalid("phi_ext must be finite"));
    }
    let n_levels = solver.n_levels;
    let mut cutoff = solver.charge_cutoff;
    let mut spec = charge_basis_spectrum(tparams, phi_ext, cutoff, n_levels);
    if solver.verify_convergence {
        // the charge basis converges super-exponentially; a few doublings of
        // the step are more than enough for any physical E_J/E_C
        let max_cutoff = cutoff.max(solver.max_basis_dim);
        loop {
            let larger_cutoff = cutoff + SolverConfig::CHARGE_STEP;
            let larger = charge_basis_spectrum(tparams, phi_ext, larger_cutoff, n_levels);
            if max_abs_diff(&spec.frequencies, &larger.frequencies) < SolverConfig::TOLERANCE {
                break;
            }
            if larger_cutoff + SolverConfig::CHARGE_STEP > max_cutoff {
                return Err(Error::NonConvergence {
                    what: "transmon spectrum",
                    detail: format!("eigen-frequencies still moving at charge cutoff {larger_cutoff}"),
                });
            }
            cutoff = larger_cutoff;
            spec = larger;
        }
    }
    Ok(spec)
}

/// Effective Josephson energy of the asymmetric SQUID,
/// sqrt(E_J1^2 + E_J2^2 + 2 E_J1 E_J2 cos(phi_ext)).
pub fn transmon_josephson_energy(tparams: &TransmonParams, phi_ext: f64) -> f64 {
    let TransmonParams { e_j1, e_j2, .. } = *tparams;
    (e_j1 * e_j1 + e_j2 * e_j2 + 2.0 * e_j1 * e_j2 * phi_ext.cos())
        .max(0.0)
        .sqrt()
}

/// Transmon-regime estimate of f01, sqrt(8 E_C E_J(phi_ext)) - E_C.
///
/// Valid only for E_C << |E_J1 - E_J2|; that is not checked. In the
/// symmetric SQUID at phi_ext = pi the effective E_J vanishes and the
/// formula returns -E_C, which has no physical meaning.
pub fn transmon_freq_approx(tparams: &TransmonParams, phi_ext: f64) -> f64 {
    (8.0 * tparams.e_c * transmon_josephson_energy(tparams, phi_ext)).sqrt() - tparams.e_c
}
