//! Parameter extraction from spectroscopy, decay and coherence data.

mod decay;
pub mod lm;
mod noise;
mod spectro;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::TWO_PI;
use crate::error::{Error, Result};

pub use decay::{
    exp_decay_model, exp_gauss_model, fit_exp_decay, fit_exp_gauss_decay, fit_ramsey_decay,
    ramsey_model, RamseyOptions,
};
pub use noise::{fit_noise_parameters, CoherencePoint, NoiseFitConfig};
pub use spectro::{
    fit_fluxonium_spectroscopy, fit_parabola_sweet_spot, fit_transmon_period,
    trap_phase_from_sweet_spot, SpectroscopyFitOptions, SpectroscopyGuess, TransmonGuess,
};

/// What the control column of a spectroscopy dataset measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlKind {
    /// Bias-line or coil current, ampere.
    Current,
    /// External phase, radians.
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyPoint {
    pub control: f64,
    /// 1 for f01, 2 for f02.
    pub transition: u8,
    /// GHz.
    pub frequency: f64,
    /// GHz; unit weight when absent.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectroscopyDataset {
    pub control_kind: ControlKind,
    pub points: Vec<SpectroscopyPoint>,
}

impl SpectroscopyDataset {
    pub fn new(control_kind: ControlKind, points: Vec<SpectroscopyPoint>) -> Result<Self> {
        let d = Self {
            control_kind,
            points,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for (k, p) in self.points.iter().enumerate() {
            if !(p.frequency.is_finite() && p.frequency > 0.0) {
                return Err(Error::Schema(format!("row {k}: frequency must be > 0")));
            }
            if !(p.transition == 1 || p.transition == 2) {
                return Err(Error::Schema(format!(
                    "row {k}: transition must be 1 or 2, got {}",
                    p.transition
                )));
            }
            if let Some(s) = p.sigma {
                if !(s.is_finite() && s > 0.0) {
                    return Err(Error::Schema(format!("row {k}: sigma must be > 0")));
                }
            }
            if !p.control.is_finite() {
                return Err(Error::Schema(format!("row {k}: control must be finite")));
            }
        }
        Ok(())
    }
}

/// Excited-state population versus time; `samples` are (t in us, p_e).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub samples: Vec<(f64, f64)>,
}

impl DecayTrace {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        let t = Self { samples };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.iter().any(|&(t, p)| !(t.is_finite() && p.is_finite())) {
            return Err(Error::Schema("decay trace contains non-finite values".into()));
        }
        if self.samples.first().is_some_and(|s| s.0 < 0.0) {
            return Err(Error::Schema("decay times must be >= 0".into()));
        }
        if self.samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Schema("decay times must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.0).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }

    /// Warnings for populations outside [0, 1].
    pub fn out_of_range_warnings(&self) -> Vec<String> {
        let n = self
            .samples
            .iter()
            .filter(|s| !(0.0..=1.0).contains(&s.1))
            .count();
        if n > 0 {
            vec![format!("{n} samples have p_e outside [0, 1]")]
        } else {
            Vec::new()
        }
    }
}

/// Result of a least-squares fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    /// Fitted parameters in reporting units, in a fixed order.
    pub parameters: Vec<(String, f64)>,
    /// Covariance of `parameters`, same order.
    pub covariance: DMatrix<f64>,
    /// RMS of the unweighted residuals, data units.
    pub residual_rms: f64,
    pub converged: bool,
    pub n_iterations: usize,
    /// Quantities computed from the fitted parameters.
    pub derived: Vec<(String, f64)>,
    pub warnings: Vec<String>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters
            .iter()
            .chain(&self.derived)
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
    }

    /// Standard error from the covariance diagonal.
    pub fn std_error(&self, name: &str) -> Option<f64> {
        let k = self.parameters.iter().position(|(n, _)| n == name)?;
        Some(self.covariance[(k, k)].max(0.0).sqrt())
    }

    /// `get` that reports a missing name as an error.
    pub fn value(&self, name: &str) -> Result<f64> {
        self.get(name)
            .ok_or_else(|| Error::invalid(format!("fit result has no parameter '{name}'")))
    }
}

fn rms(residuals: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = residuals.fold((0.0, 0usize), |(s, n), r| (s + r * r, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Jacobian-based covariance transformed by a diagonal rescaling
/// x_report = scale * x_internal.
fn scale_covariance(cov: &DMatrix<f64>, scales: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(cov.nrows(), cov.ncols(), |r, c| cov[(r, c)] * scales[r] * scales[c])
}

fn fourier_sum(x: &[f64], y: &[f64], mean: f64, k: f64) -> Complex64 {
    x.iter()
        .zip(y)
        .map(|(&xi, &yi)| (yi - mean) * Complex64::from_polar(1.0, -TWO_PI * k * xi))
        .sum()
}

/// Strongest sinusoidal component of (x, y) samples, searched over
/// frequencies (cycles per unit x) from one cycle per span up to the mean
/// Nyquist limit, then refined on successively finer local grids. Returns
/// (frequency, Fourier sum at that frequency, peak power, median power of
/// the coarse grid).
fn periodogram_peak(x: &[f64], y: &[f64], oversample: usize) -> Option<(f64, Complex64, f64, f64)> {
    let n = x.len();
    if n < 4 {
        return None;
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    if !(span > 0.0) {
        return None;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let k_min = 1.0 / span;
    let k_max = (0.5 * (n - 1) as f64 / span).max(k_min);
    let mut dk = k_min / oversample as f64;
    let steps = ((k_max - k_min) / dk).floor() as usize + 1;
    let mut powers = Vec::with_capacity(steps);
    let mut best = (k_min, Complex64::new(0.0, 0.0), f64::NEG_INFINITY);
    for s in 0..steps {
        let k = k_min + s as f64 * dk;
        let sum = fourier_sum(x, y, mean, k);
        let p = sum.norm_sqr();
        powers.push(p);
        if p > best.2 {
            best = (k, sum, p);
        }
    }
    for _ in 0..4 {
        let center = best.0;
        for s in -10..=10 {
            let k = (center + s as f64 * dk / 10.0).clamp(k_min, k_max);
            let sum = fourier_sum(x, y, mean, k);
            if sum.norm_sqr() > best.2 {
                best = (k, sum, sum.norm_sqr());
            }
        }
        dk /= 10.0;
    }
    powers.sort_by(f64::total_cmp);
    let median = powers[powers.len() / 2];
    Some((best.0, best.1, best.2, median))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodogram_finds_sinusoid() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|t| 1.0 + 0.3 * (2.0 * std::f64::consts::PI * 0.8 * t + 0.4).cos()).collect();
        let (k, sum, peak, median) = periodogram_peak(&x, &y, 20).unwrap();
        assert!((k - 0.8).abs() < 5e-3, "{k}");
        assert!(peak > 100.0 * median);
        assert!((sum.arg() - 0.4).abs() < 0.1, "{k} {}", sum.arg());
    }

    #[test]
    fn trace_validation() {
        assert!(DecayTrace::new(vec![(0.0, 0.5), (1.0, 0.4)]).is_ok());
        assert!(DecayTrace::new(vec![(1.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(DecayTrace::new(vec![(-1.0, 0.5), (1.0, 0.4)]).is_err());
        let t = DecayTrace::new(vec![(0.0, 1.02), (1.0, 0.4)]).unwrap();
        assert_eq!(t.out_of_range_warnings().len(), 1);
    }
}
