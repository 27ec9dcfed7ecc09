//! Physical constants (SI, exact 2019 definitions) and unit conversions.
//!
//! Energies are carried as E/h in GHz everywhere outside [`crate::coherence`].
//! Rates are carried in 1/us; they are converted to 1/s only where they meet
//! an angular frequency in rad/s.

use std::f64::consts::PI;

/// Planck constant, J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Superconducting flux quantum h/2e, Wb.
pub const FLUX_QUANTUM: f64 = 2.067_833_848e-15;

/// Hz per GHz.
pub const HZ_PER_GHZ: f64 = 1e9;
/// (1/s) per (1/us).
pub const PER_S_PER_PER_US: f64 = 1e6;

pub const TWO_PI: f64 = 2.0 * PI;

#[inline]
pub fn per_us_to_per_s(rate: f64) -> f64 {
    rate * PER_S_PER_PER_US
}

#[inline]
pub fn per_s_to_per_us(rate: f64) -> f64 {
    rate / PER_S_PER_PER_US
}

/// Converts a flux dispersion df01/dphi_ext in GHz/rad into the angular
/// dispersion d(omega01)/d(Phi_ext) in rad/s per flux quantum.
#[inline]
pub fn dispersion_to_angular_per_flux_quantum(ghz_per_rad: f64) -> f64 {
    TWO_PI * HZ_PER_GHZ * ghz_per_rad * TWO_PI
}

/// Rate given as Gamma/2pi in kHz, returned in 1/us.
#[inline]
pub fn khz_over_two_pi_to_per_us(khz: f64) -> f64 {
    TWO_PI * khz * 1e3 / PER_S_PER_PER_US
}
