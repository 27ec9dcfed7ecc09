//! Coherence-rate models: dielectric-loss relaxation and 1/f flux-noise
//! dephasing in echo and Ramsey experiments.
//!
//! Unit conventions for this module:
//!
//! | quantity                | unit                      |
//! |-------------------------|---------------------------|
//! | rates in and out        | 1/us                      |
//! | flux-noise amplitude    | Phi0 (1/f PSD A^2 (1 Hz)/f) |
//! | flux dispersion         | rad/s per Phi0            |
//! | infrared cutoff omega_l | rad/s                     |
//! | temperature             | K                         |
//!
//! Rates are converted to 1/s only where they meet omega_l inside the
//! Ramsey logarithm and where the dispersion term is formed.

use serde::{Deserialize, Serialize};

use crate::constants::{
    dispersion_to_angular_per_flux_quantum, khz_over_two_pi_to_per_us, per_s_to_per_us,
    per_us_to_per_s, BOLTZMANN, HZ_PER_GHZ, PLANCK, TWO_PI,
};
use crate::error::{Error, Result};
use crate::qubit::{FluxConfig, FluxoniumParams, FluxoniumSolver, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Dielectric loss tangent of the capacitor.
    pub tan_delta_c: f64,
    /// 1/f flux-noise amplitude at 1 Hz seen by echo, Phi0.
    pub a_phi_echo: f64,
    /// 1/f flux-noise amplitude at 1 Hz seen by Ramsey, Phi0.
    pub a_phi_ramsey: f64,
    /// Flux-independent echo dephasing, 1/us.
    pub gamma_misc_echo: f64,
    /// Flux-independent Ramsey dephasing, 1/us.
    pub gamma_misc_ramsey: f64,
    /// Kelvin.
    pub temperature: f64,
    /// Infrared cutoff of the 1/f spectrum, rad/s.
    pub omega_l: f64,
}

impl NoiseModel {
    /// Noise parameters reported for device 1 at T = 50 mK and
    /// omega_l = 2pi x 1 Hz. Misc rates are given as Gamma/2pi in kHz.
    pub fn device_1() -> Self {
        Self {
            tan_delta_c: 2.0e-6,
            a_phi_echo: 6.6e-6,
            a_phi_ramsey: 4.6e-6,
            gamma_misc_echo: khz_over_two_pi_to_per_us(4.4),
            gamma_misc_ramsey: khz_over_two_pi_to_per_us(14.0),
            temperature: 0.050,
            omega_l: TWO_PI,
        }
    }

    /// Noise parameters reported for device 2.
    pub fn device_2() -> Self {
        Self {
            tan_delta_c: 3.2e-6,
            a_phi_echo: 7.5e-6,
            a_phi_ramsey: 5.5e-6,
            gamma_misc_echo: khz_over_two_pi_to_per_us(12.0),
            gamma_misc_ramsey: khz_over_two_pi_to_per_us(72.0),
            temperature: 0.050,
            omega_l: TWO_PI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("tan_delta_c", self.tan_delta_c),
            ("a_phi_echo", self.a_phi_echo),
            ("a_phi_ramsey", self.a_phi_ramsey),
            ("gamma_misc_echo", self.gamma_misc_echo),
            ("gamma_misc_ramsey", self.gamma_misc_ramsey),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::invalid("temperature must be > 0"));
        }
        if !(self.omega_l.is_finite() && self.omega_l > 0.0) {
            return Err(Error::invalid("omega_l must be > 0"));
        }
        Ok(())
    }
}

/// Exponential and Gaussian components of an echo decay, 1/us.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub gamma_exp: f64,
    pub gamma_gauss: f64,
}

/// Dielectric relaxation rate in 1/us from the circuit quantities:
/// 16 E_C tan(delta_C) / hbar |n01|^2 coth(h f01 / 2 k_B T).
pub fn gamma1_from_elements(
    e_c: f64,
    tan_delta_c: f64,
    n01: f64,
    f01: f64,
    temperature: f64,
) -> Result<f64> {
    if !(f01 > 0.0) {
        return Err(Error::OutOfDomain(format!("f01 must be > 0, got {f01} GHz")));
    }
    if !(temperature > 0.0) {
        return Err(Error::invalid("temperature must be > 0"));
    }
    // E_C / hbar = 2pi (E_C / h)
    let ec_over_hbar = TWO_PI * e_c * HZ_PER_GHZ;
    let x = PLANCK * f01 * HZ_PER_GHZ / (2.0 * BOLTZMANN * temperature);
    let coth = 1.0 / x.tanh();
    Ok(per_s_to_per_us(16.0 * ec_over_hbar * tan_delta_c * n01 * n01 * coth))
}

/// Dielectric-loss relaxation rate of the fluxonium, 1/us.
pub fn gamma1_dielectric(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    noise: &NoiseModel,
    solver: &SolverConfig,
) -> Result<f64> {
    noise.validate()?;
    flux.validate()?;
    let off = flux.total_offset();
    let s = FluxoniumSolver::with_probes(params, solver, &[off])?;
    let spec = s.spectrum(off);
    let n01 = s.charge_element(&spec, 0, 1)?;
    gamma1_from_elements(params.e_c, noise.tan_delta_c, n01, spec.f01(), noise.temperature)
}

/// Time for exp(-G_e t - (G_g t)^2) to fall to 1/e, us.
///
/// Evaluated as 2 / (G_e + sqrt(G_e^2 + 4 G_g^2)), the rationalized form of
/// (sqrt(G_e^2 + 4 G_g^2) - G_e) / (2 G_g^2); it has no cancellation when
/// G_g << G_e. For G_g < 1e-12 G_e the pure-exponential limit 1/G_e is
/// returned directly.
pub fn t2e_from_rates(rates: &RatePair) -> Result<f64> {
    let RatePair {
        gamma_exp: ge,
        gamma_gauss: gg,
    } = *rates;
    if !(ge >= 0.0 && gg >= 0.0) || !(ge.is_finite() && gg.is_finite()) {
        return Err(Error::invalid(format!("rates must be finite and >= 0, got ({ge}, {gg})")));
    }
    if ge == 0.0 && gg == 0.0 {
        return Err(Error::invalid("both rates are zero"));
    }
    if gg < 1e-12 * ge {
        return Ok(1.0 / ge);
    }
    Ok(2.0 / (ge + (ge * ge + 4.0 * gg * gg).sqrt()))
}

/// Echo dephasing rate, 1/us:
/// A |d omega01 / d Phi| sqrt(ln 2) + Gamma1/2 + Gamma_misc.
/// `dispersion` in rad/s per Phi0, `gamma1` and `gamma_misc` in 1/us.
pub fn gamma2_echo_model(a_phi: f64, dispersion: f64, gamma1: f64, gamma_misc: f64) -> f64 {
    let flux_term = per_s_to_per_us(a_phi * dispersion.abs() * std::f64::consts::LN_2.sqrt());
    flux_term + 0.5 * gamma1 + gamma_misc
}

/// Converged Ramsey rate with the iteration count it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RamseyRate {
    /// 1/us.
    pub rate: f64,
    pub iterations: usize,
}

const RAMSEY_MAX_ITER: usize = 200;
const RAMSEY_REL_TOL: f64 = 1e-10;

/// Right-hand side of the self-consistent Ramsey equation in 1/s.
fn ramsey_map(flux_coeff: f64, base: f64, omega_l: f64, rate: f64) -> f64 {
    flux_coeff * (rate / omega_l).ln().sqrt() + base
}

/// Solves Gamma = A |D| sqrt(ln(Gamma / omega_l)) + Gamma1/2 + Gamma_misc by
/// fixed-point iteration from the seed A |D| sqrt(ln 1e6) + Gamma1/2 +
/// Gamma_misc. Iteration switches to 0.5 damping if successive updates
/// alternate in sign without shrinking.
pub fn gamma2_ramsey_model(
    a_phi: f64,
    dispersion: f64,
    gamma1: f64,
    gamma_misc: f64,
    omega_l: f64,
) -> Result<RamseyRate> {
    if !(omega_l > 0.0) {
        return Err(Error::invalid("omega_l must be > 0"));
    }
    let base = per_us_to_per_s(0.5 * gamma1 + gamma_misc);
    let flux_coeff = a_phi * dispersion.abs();
    if flux_coeff == 0.0 {
        return Ok(RamseyRate {
            rate: 0.5 * gamma1 + gamma_misc,
            iterations: 0,
        });
    }
    let mut rate = flux_coeff * 1e6f64.ln().sqrt() + base;
    let mut damping = 1.0;
    let mut last_step = 0.0_f64;
    for it in 1..=RAMSEY_MAX_ITER {
        if rate <= omega_l {
            return Err(Error::OutOfDomain(format!(
                "Ramsey rate {rate} 1/s fell below the infrared cutoff {omega_l} rad/s"
            )));
        }
        let target = ramsey_map(flux_coeff, base, omega_l, rate);
        let step = damping * (target - rate);
        if it > 1 && step.signum() != last_step.signum() && step.abs() >= last_step.abs() {
            damping = 0.5;
        }
        let next = rate + step;
        last_step = step;
        let converged = (next - rate).abs() <= RAMSEY_REL_TOL * next.abs();
        rate = next;
        if converged {
            if rate <= omega_l {
                return Err(Error::OutOfDomain(format!(
                    "converged Ramsey rate {rate} 1/s is not above omega_l = {omega_l} rad/s"
                )));
            }
            return Ok(RamseyRate {
                rate: per_s_to_per_us(rate),
                iterations: it,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "Ramsey self-consistency",
        detail: format!("no convergence in {RAMSEY_MAX_ITER} iterations"),
    })
}

/// Relative residual of the Ramsey equation at `rate` (1/us).
pub fn ramsey_residual(
    rate: f64,
    a_phi: f64,
    dispersion: f64,
    gamma1: f64,
    gamma_misc: f64,
    omega_l: f64,
) -> f64 {
    let r = per_us_to_per_s(rate);
    let rhs = ramsey_map(
        a_phi * dispersion.abs(),
        per_us_to_per_s(0.5 * gamma1 + gamma_misc),
        omega_l,
        r,
    );
    ((rhs - r) / r).abs()
}

/// Temperature of a two-level Boltzmann distribution with excited-state
/// population `p_excited` and splitting `f01` GHz, kelvin.
pub fn effective_temperature(p_excited: f64, f01: f64) -> Result<f64> {
    if !(p_excited > 0.0) {
        return Err(Error::invalid(format!(
            "excited population must be > 0, got {p_excited}"
        )));
    }
    if !(p_excited < 0.5) {
        return Err(Error::invalid(format!(
            "excited population {p_excited} >= 0.5 has no positive temperature"
        )));
    }
    if !(f01 > 0.0) {
        return Err(Error::invalid("f01 must be > 0"));
    }
    Ok(PLANCK * f01 * HZ_PER_GHZ / (BOLTZMANN * ((1.0 - p_excited) / p_excited).ln()))
}

/// Coherence rates at one flux point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetPoint {
    /// Offset from the sweet spot, phi_ext + phi_trap - pi, rad.
    pub delta_phi_ext: f64,
    pub f01: f64,
    pub n01: f64,
    /// df01/dphi_ext, GHz/rad.
    pub dispersion: f64,
    pub gamma1: f64,
    pub gamma2_echo: f64,
    pub gamma2_ramsey: f64,
}

/// Relaxation, echo and Ramsey rates versus offset from the sweet spot.
pub fn coherence_budget(
    params: &FluxoniumParams,
    noise: &NoiseModel,
    deltas: &[f64],
    solver: &SolverConfig,
) -> Result<Vec<BudgetPoint>> {
    noise.validate()?;
    let s = FluxoniumSolver::new(params, solver)?;
    deltas
        .iter()
        .map(|&delta| {
            let off = std::f64::consts::PI + delta;
            let spec = s.spectrum(off);
            let n01 = s.charge_element(&spec, 0, 1)?;
            let f01 = spec.f01();
            let dispersion = s.dispersion_of(&spec)?;
            let d = dispersion_to_angular_per_flux_quantum(dispersion);
            let gamma1 = gamma1_from_elements(params.e_c, noise.tan_delta_c, n01, f01, noise.temperature)?;
            let gamma2_echo = gamma2_echo_model(noise.a_phi_echo, d, gamma1, noise.gamma_misc_echo);
            let gamma2_ramsey =
                gamma2_ramsey_model(noise.a_phi_ramsey, d, gamma1, noise.gamma_misc_ramsey, noise.omega_l)?
                    .rate;
            Ok(BudgetPoint {
                delta_phi_ext: delta,
                f01,
                n01,
                dispersion,
                gamma1,
                gamma2_echo,
                gamma2_ramsey,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lossless_capacitor_does_not_relax() {
        assert_eq!(gamma1_from_elements(1.32, 0.0, 0.3, 0.6, 0.05).unwrap(), 0.0);
    }

    #[test]
    fn gamma1_zero_temperature_arithmetic() {
        let g = gamma1_from_elements(1.32, 2.0e-6, 0.5, 1.0, 1e-6).unwrap();
        let expected = 16.0 * TWO_PI * 1.32e9 * 2.0e-6 * 0.25 / 1e6;
        assert!((g - expected).abs() < 1e-15);
        assert!((g - 0.066_350).abs() < 1e-5);
        assert!((1.0 / g - 15.07).abs() < 0.01);
        assert!(gamma1_from_elements(1.32, 2e-6, 0.5, 0.0, 0.05).is_err());
    }

    #[test]
    fn gamma1_grows_with_temperature() {
        let cold = gamma1_from_elements(1.32, 2e-6, 0.5, 1.0, 0.010).unwrap();
        let hot = gamma1_from_elements(1.32, 2e-6, 0.5, 1.0, 0.100).unwrap();
        assert!(hot > cold);
    }

    #[test]
    fn gamma1_is_linear_in_loss_and_element() {
        let base = gamma1_from_elements(1.32, 2e-6, 0.3, 0.7, 0.05).unwrap();
        let twice_loss = gamma1_from_elements(1.32, 4e-6, 0.3, 0.7, 0.05).unwrap();
        let n_sq_doubled = gamma1_from_elements(1.32, 2e-6, 0.3 * 2f64.sqrt(), 0.7, 0.05).unwrap();
        assert!((twice_loss / base - 2.0).abs() < 1e-14);
        assert!((n_sq_doubled / base - 2.0).abs() < 1e-14);
    }

    #[test]
    fn t2e_examples() {
        let t = |ge, gg| t2e_from_rates(&RatePair { gamma_exp: ge, gamma_gauss: gg }).unwrap();
        assert!((t(0.01, 0.0) - 100.0).abs() < 1e-12);
        assert!((t(0.0, 0.02) - 50.0).abs() < 1e-12);
        assert!((t(0.01, 0.01) - 61.803_398_87).abs() < 1e-6);
        assert!(t2e_from_rates(&RatePair { gamma_exp: 0.0, gamma_gauss: 0.0 }).is_err());
    }

    #[test]
    fn echo_model_examples() {
        assert_eq!(gamma2_echo_model(6.6e-6, 0.0, 0.02, 0.01), 0.5 * 0.02 + 0.01);
        let g = gamma2_echo_model(6.6e-6, TWO_PI * 1e9, 0.0, 0.0);
        assert!((g - 0.034_527).abs() < 1e-5, "{g}");
        let g2 = gamma2_echo_model(13.2e-6, TWO_PI * 1e9, 0.0, 0.0);
        assert!((g2 - 2.0 * g).abs() < 1e-15);
    }

    #[test]
    fn ramsey_examples() {
        let r = gamma2_ramsey_model(4.6e-6, 0.0, 0.01, 0.088, TWO_PI).unwrap();
        assert_eq!(r.rate, 0.5 * 0.01 + 0.088);
        assert_eq!(r.iterations, 0);

        let misc = khz_over_two_pi_to_per_us(14.0);
        let d = TWO_PI * 1e9;
        let r = gamma2_ramsey_model(4.6e-6, d, 0.01, misc, TWO_PI).unwrap();
        assert!(ramsey_residual(r.rate, 4.6e-6, d, 0.01, misc, TWO_PI) < 1e-9);

        let rates: Vec<f64> = [2e-6, 4.6e-6, 9e-6]
            .iter()
            .map(|&a| gamma2_ramsey_model(a, d, 0.01, misc, TWO_PI).unwrap().rate)
            .collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn ramsey_below_cutoff_is_rejected() {
        // tiny rates against a huge cutoff: log argument < 1
        let e = gamma2_ramsey_model(1e-9, 1.0, 0.0, 1e-9, 1e9).unwrap_err();
        assert!(matches!(e, Error::OutOfDomain(_)));
    }

    #[test]
    fn effective_temperature_examples() {
        let t = effective_temperature(0.30, 0.88).unwrap();
        assert!((t - 0.050).abs() < 1e-3, "{t}");
        let cold = effective_temperature(1e-6, 0.88).unwrap();
        assert!(cold > 0.0 && cold < 0.004);
        assert!(effective_temperature(0.5, 0.88).is_err());
        assert!(effective_temperature(0.0, 0.88).is_err());
    }
}
