//! Spectroscopy fits: fluxonium transitions versus bias, the parabolic
//! sweet-spot fit and the SQUID-transmon coil calibration.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::lm::{minimize, LmOptions, LmOutcome};
use super::{periodogram_peak, rms, ControlKind, FitResult, SpectroscopyDataset};
use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::qubit::{FluxoniumParams, FluxoniumSolver, SolverConfig};

/// Starting point of the fluxonium spectroscopy fit. Energies in GHz,
/// currents in ampere; the current map is ignored for phase-controlled data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectroscopyGuess {
    pub e_j: f64,
    pub e_c: f64,
    pub e_l: f64,
    pub current_period: f64,
    pub current_offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectroscopyFitOptions {
    /// Trap phase added to the external phase, rad.
    pub phi_trap: f64,
    /// Total number of starts; the first is the unjittered guess.
    pub n_starts: usize,
    /// Relative jitter of the energies and the period; the offset is
    /// jittered by the same fraction of a period.
    pub jitter: f64,
    pub seed: u64,
}

impl Default for SpectroscopyFitOptions {
    fn default() -> Self {
        Self {
            phi_trap: PI,
            n_starts: 5,
            jitter: 0.2,
            seed: 0,
        }
    }
}

/// Unique control values and, per data point, the index of its control.
fn unique_controls(data: &SpectroscopyDataset) -> (Vec<f64>, Vec<usize>) {
    let mut xs: Vec<f64> = data.points.iter().map(|p| p.control).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let idx = data
        .points
        .iter()
        .map(|p| xs.binary_search_by(|x| x.total_cmp(&p.control)).unwrap_or(0))
        .collect();
    (xs, idx)
}

/// Basis size for the whole fit: verified at the guess, plus margin for
/// parameters wandering during the search.
fn fit_basis_dim(guess: &FluxoniumParams, solver: &SolverConfig) -> Result<usize> {
    let cfg = SolverConfig {
        basis_dim: 40,
        n_levels: 3,
        ..*solver
    };
    let verified = FluxoniumSolver::new(guess, &cfg)?.basis_dim();
    Ok((verified + 2 * SolverConfig::BASIS_STEP).min(solver.max_basis_dim.max(verified)))
}

/// Fits E_J, E_C, E_L and, for current-controlled data, the linear map
/// phi_ext = 2 pi (I - I0) / I_period to measured f01 and f02.
///
/// The total phase offset at a point is `phi_trap + phi_ext`. Internally
/// currents are divided by the guessed period so all parameters are of
/// order one. Several starts are run and the lowest cost wins. The reported
/// offset is reduced to [0, I_period).
///
/// Errors: fewer points than parameters, no converged start, or a
/// Jacobian condition number above 1e12 at the optimum. Data spanning less
/// than 0.3 of a period is flagged in the warnings.
pub fn fit_fluxonium_spectroscopy(
    data: &SpectroscopyDataset,
    init: &SpectroscopyGuess,
    solver: &SolverConfig,
    opts: &SpectroscopyFitOptions,
) -> Result<FitResult> {
    data.validate()?;
    let guess = FluxoniumParams::new(init.e_j, init.e_c, init.e_l)?;
    let by_current = data.control_kind == ControlKind::Current;
    let n_params = if by_current { 5 } else { 3 };
    if data.points.len() < n_params {
        return Err(Error::Underdetermined {
            points: data.points.len(),
            parameters: n_params,
        });
    }
    if by_current && !(init.current_period.is_finite() && init.current_period > 0.0) {
        return Err(Error::invalid("current_period guess must be > 0"));
    }
    if opts.n_starts == 0 {
        return Err(Error::invalid("n_starts must be >= 1"));
    }
    let scale = if by_current { init.current_period } else { 1.0 };
    let (controls, index) = unique_controls(data);
    let controls: Vec<f64> = controls.iter().map(|c| c / scale).collect();
    let weights: Vec<f64> = data.points.iter().map(|p| 1.0 / p.sigma.unwrap_or(1.0)).collect();
    let dim = fit_basis_dim(&guess, solver)?;
    let fixed = SolverConfig {
        basis_dim: dim,
        n_levels: 3,
        verify_convergence: false,
        max_basis_dim: dim,
        ..*solver
    };
    let phi_trap = opts.phi_trap;

    // model transitions (f01, f02) at every unique control
    let transitions = |x: &[f64]| -> Result<Vec<[f64; 2]>> {
        let p = FluxoniumParams::new(x[0], x[1], x[2])?;
        let s = FluxoniumSolver::new(&p, &fixed)?;
        Ok(controls
            .par_iter()
            .map(|&c| {
                let phi_ext = if by_current { TWO_PI * (c - x[4]) / x[3] } else { c };
                let spec = s.spectrum(phi_trap + phi_ext);
                let e = &spec.frequencies;
                [e[1] - e[0], e[2] - e[0]]
            })
            .collect())
    };
    let model_minus_data = |x: &[f64]| -> Result<Vec<f64>> {
        let t = transitions(x)?;
        Ok(data
            .points
            .iter()
            .zip(&index)
            .map(|(p, &k)| t[k][usize::from(p.transition) - 1] - p.frequency)
            .collect())
    };
    let residuals = |x: &[f64]| -> Result<Vec<f64>> {
        Ok(model_minus_data(x)?
            .iter()
            .zip(&weights)
            .map(|(r, w)| r * w)
            .collect())
    };

    let x0: Vec<f64> = if by_current {
        vec![init.e_j, init.e_c, init.e_l, 1.0, init.current_offset / scale]
    } else {
        vec![init.e_j, init.e_c, init.e_l]
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut starts = vec![x0.clone()];
    for _ in 1..opts.n_starts {
        let mut s = x0.clone();
        for (k, v) in s.iter_mut().enumerate() {
            let u: f64 = rng.random_range(-opts.jitter..=opts.jitter);
            if k == 4 {
                *v += u;
            } else {
                *v *= 1.0 + u;
            }
        }
        starts.push(s);
    }
    let mut bounds = vec![(1e-6, f64::INFINITY); 3];
    if by_current {
        bounds.push((1e-6, f64::INFINITY));
        bounds.push((f64::NEG_INFINITY, f64::INFINITY));
    }
    let lm_opts = LmOptions::default().with_bounds(bounds);

    let mut best: Option<LmOutcome> = None;
    let mut failures = Vec::new();
    for s in &starts {
        match minimize(residuals, s, &lm_opts) {
            Ok(out) if out.converged => {
                if best.as_ref().is_none_or(|b| out.cost < b.cost) {
                    best = Some(out);
                }
            }
            Ok(out) => failures.push(format!("{} iterations at cost {:e}", out.iterations, out.cost)),
            Err(e) => failures.push(e.to_string()),
        }
    }
    let best = best.ok_or_else(|| Error::NonConvergence {
        what: "spectroscopy fit",
        detail: format!("no start converged: {}", failures.join("; ")),
    })?;
    let condition = best.condition_number();
    if !(condition <= 1e12) {
        return Err(Error::IllConditioned { condition });
    }

    let mut warnings = Vec::new();
    let raw_cov = best.covariance();
    let (parameters, covariance) = if by_current {
        let period = best.x[3] * scale;
        let offset = (best.x[4] * scale).rem_euclid(period);
        let span = (controls[controls.len() - 1] - controls[0]) * scale;
        if span < 0.3 * period {
            warnings.push(format!(
                "data span {span:e} A is {:.3} of a period; fit is ill-conditioned",
                span / period
            ));
        }
        let scales = [1.0, 1.0, 1.0, scale, scale];
        (
            vec![
                ("e_j".to_string(), best.x[0]),
                ("e_c".to_string(), best.x[1]),
                ("e_l".to_string(), best.x[2]),
                ("current_period".to_string(), period),
                ("current_offset".to_string(), offset),
            ],
            super::scale_covariance(&raw_cov, &scales),
        )
    } else {
        (
            vec![
                ("e_j".to_string(), best.x[0]),
                ("e_c".to_string(), best.x[1]),
                ("e_l".to_string(), best.x[2]),
            ],
            raw_cov,
        )
    };
    let unweighted = model_minus_data(&best.x)?;
    Ok(FitResult {
        parameters,
        covariance,
        residual_rms: rms(unweighted.into_iter()),
        converged: true,
        n_iterations: best.iterations,
        derived: vec![
            ("cost".to_string(), best.cost),
            ("condition_number".to_string(), condition),
        ],
        warnings,
    })
}

/// Least-squares fit of f = a (x - x0)^2 + c. Parameters:
/// `vertex_control` (x0), `curvature` (a) and `vertex_frequency` (c).
///
/// Solved as a quadratic polynomial in the centered, scaled control and
/// transformed to vertex form; the covariance follows by linearizing that
/// transformation.
pub fn fit_parabola_sweet_spot(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.iter().any(|(x, f)| !(x.is_finite() && f.is_finite())) {
        return Err(Error::Schema("parabola data must be finite".into()));
    }
    let mut distinct: Vec<f64> = points.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::Underdetermined {
            points: distinct.len(),
            parameters: 3,
        });
    }
    let n = points.len();
    let mean = points.iter().map(|p| p.0).sum::<f64>() / n as f64;
    let s = points.iter().map(|p| (p.0 - mean).abs()).fold(0.0, f64::max);
    let v = DMatrix::from_fn(n, 3, |r, c| ((points[r].0 - mean) / s).powi(c as i32));
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let svd = v.clone().svd(true, true);
    let coef = svd
        .solve(&y, 1e-14)
        .map_err(|e| Error::Unidentifiable(format!("parabola design matrix: {e}")))?;
    let (c0, c1, c2) = (coef[0], coef[1], coef[2]);
    let a = c2 / (s * s);
    if !(a > 0.0) {
        return Err(Error::Unidentifiable(format!(
            "curvature {a:e} is not positive; data has no minimum"
        )));
    }
    let x0 = mean - c1 * s / (2.0 * c2);
    let c = c0 - c1 * c1 / (4.0 * c2);

    let resid = &v * &coef - &y;
    let dof = n.saturating_sub(3);
    let s2 = if dof > 0 { resid.norm_squared() / dof as f64 } else { 0.0 };
    let vtv_inv = (v.transpose() * &v)
        .try_inverse()
        .ok_or_else(|| Error::Unidentifiable("controls are degenerate".into()))?;
    let cov_c = vtv_inv * s2;
    // d(x0, a, c) / d(c0, c1, c2)
    let j = DMatrix::from_row_slice(
        3,
        3,
        &[
            0.0,
            -s / (2.0 * c2),
            c1 * s / (2.0 * c2 * c2),
            0.0,
            0.0,
            1.0 / (s * s),
            1.0,
            -c1 / (2.0 * c2),
            c1 * c1 / (4.0 * c2 * c2),
        ],
    );
    let covariance = &j * cov_c * j.transpose();
    Ok(FitResult {
        parameters: vec![
            ("vertex_control".into(), x0),
            ("curvature".into(), a),
            ("vertex_frequency".into(), c),
        ],
        covariance,
        residual_rms: rms(resid.iter().copied()),
        converged: true,
        n_iterations: 1,
        derived: Vec::new(),
        warnings: Vec::new(),
    })
}

/// Trap phase implied by a sweet spot found at control `vertex_control`
/// when the qubit sweet spot sits at phi_trap + 2 pi x / period = pi:
/// returns pi + 2 pi vertex_control / period.
pub fn trap_phase_from_sweet_spot(vertex_control: f64, current_period: f64) -> Result<f64> {
    if !(current_period.is_finite() && current_period > 0.0) {
        return Err(Error::invalid("current_period must be > 0"));
    }
    Ok(PI + TWO_PI * vertex_control / current_period)
}

/// Optional starting energies for the coil calibration, GHz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmonGuess {
    pub e_c: f64,
}

impl Default for TransmonGuess {
    fn default() -> Self {
        Self { e_c: 0.3 }
    }
}

fn squid_transmon_f01(x: &[f64], control: f64) -> f64 {
    let [period, offset, e_j1, e_j2, e_c] = [x[0], x[1], x[2], x[3], x[4]];
    let phi = TWO_PI * (control - offset) / period;
    let ej = (e_j1 * e_j1 + e_j2 * e_j2 + 2.0 * e_j1 * e_j2 * phi.cos()).max(0.0).sqrt();
    (8.0 * e_c * ej).sqrt() - e_c
}

/// Fits sqrt(8 E_C E_J(phi)) - E_C with phi = 2 pi (I - I0) / I_period to
/// a transmon frequency-versus-coil-current trace. Parameters:
/// `current_period`, `current_offset` (in [0, period)), `e_j1`, `e_j2`
/// (e_j1 >= e_j2) and `e_c`.
///
/// The period starts from the strongest component of a 20x oversampled
/// periodogram, the offset from that component's phase, and the Josephson
/// energies from the frequency extremes at the guessed E_C.
pub fn fit_transmon_period(data: &SpectroscopyDataset, guess: &TransmonGuess) -> Result<FitResult> {
    data.validate()?;
    if data.control_kind != ControlKind::Current {
        return Err(Error::invalid("coil calibration needs current-controlled data"));
    }
    let n = data.points.len();
    if n < 5 {
        return Err(Error::Underdetermined {
            points: n,
            parameters: 5,
        });
    }
    let scale = data
        .points
        .iter()
        .map(|p| p.control.abs())
        .fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(Error::Unidentifiable("all control currents are zero".into()));
    }
    let x: Vec<f64> = data.points.iter().map(|p| p.control / scale).collect();
    let y: Vec<f64> = data.points.iter().map(|p| p.frequency).collect();
    let weights: Vec<f64> = data.points.iter().map(|p| 1.0 / p.sigma.unwrap_or(1.0)).collect();
    let (fmin, fmax) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if fmax - fmin <= 1e-9 * fmax.abs().max(1.0) {
        return Err(Error::Unidentifiable(
            "frequency does not modulate with current; period is undefined".into(),
        ));
    }
    let span = x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - x.iter().copied().fold(f64::INFINITY, f64::min);
    let (k, sum, _, _) = periodogram_peak(&x, &y, 20)
        .ok_or_else(|| Error::Unidentifiable("too few points for a periodogram".into()))?;
    let period0 = 1.0 / k;
    // y ~ c + A cos(2 pi k (x - x0)) with A > 0 puts the maximum at x0
    let offset0 = (-sum.arg() / (TWO_PI * k)).rem_euclid(period0);
    let e_c0 = guess.e_c;
    let ej_sum = (fmax + e_c0).powi(2) / (8.0 * e_c0);
    let ej_diff = (fmin + e_c0).powi(2) / (8.0 * e_c0);
    let e_j1 = 0.5 * (ej_sum + ej_diff);
    let e_j2 = (0.5 * (ej_sum - ej_diff)).max(1e-3 * e_j1);
    let x0 = [period0, offset0, e_j1, e_j2, e_c0];

    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        Ok(x.iter()
            .zip(&y)
            .zip(&weights)
            .map(|((&xi, &yi), w)| (squid_transmon_f01(p, xi) - yi) * w)
            .collect())
    };
    let bounds = vec![
        (1e-9, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
        (1e-9, f64::INFINITY),
        (0.0, f64::INFINITY),
        (1e-9, f64::INFINITY),
    ];
    let out = minimize(residuals, &x0, &LmOptions::default().with_bounds(bounds))?;
    if !out.converged {
        return Err(Error::NonConvergence {
            what: "coil calibration fit",
            detail: format!("{} iterations, cost {:e}", out.iterations, out.cost),
        });
    }
    let mut p = out.x.clone();
    if span < p[0] {
        return Err(Error::Unidentifiable(format!(
            "data spans {:.3} of the fitted period; need more than one period",
            span / p[0]
        )));
    }
    let mut cov = super::scale_covariance(&out.covariance(), &[scale, scale, 1.0, 1.0, 1.0]);
    if p[3] > p[2] {
        // the model is symmetric in the two junctions
        p.swap(2, 3);
        cov.swap_rows(2, 3);
        cov.swap_columns(2, 3);
    }
    let period = p[0] * scale;
    let offset = (p[1] * scale).rem_euclid(period);
    let unweighted: Vec<f64> = x
        .iter()
        .zip(&y)
        .map(|(&xi, &yi)| squid_transmon_f01(&out.x, xi) - yi)
        .collect();
    Ok(FitResult {
        parameters: vec![
            ("current_period".into(), period),
            ("current_offset".into(), offset),
            ("e_j1".into(), p[2]),
            ("e_j2".into(), p[3]),
            ("e_c".into(), p[4]),
        ],
        covariance: cov,
        residual_rms: rms(unweighted.into_iter()),
        converged: true,
        n_iterations: out.iterations,
        derived: vec![("current_per_flux_quantum".into(), period)],
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::SpectroscopyPoint;

    fn device_1() -> FluxoniumParams {
        FluxoniumParams::new(3.54, 1.32, 0.81).unwrap()
    }

    fn synthetic_phase_data(n: usize) -> SpectroscopyDataset {
        let s = FluxoniumSolver::new(&device_1(), &SolverConfig::default().with_levels(3)).unwrap();
        let mut pts = Vec::new();
        for k in 0..n {
            let phi = -0.5 * PI + PI * k as f64 / (n - 1) as f64;
            let spec = s.spectrum(PI + phi);
            for tr in [1u8, 2] {
                pts.push(SpectroscopyPoint {
                    control: phi,
                    transition: tr,
                    frequency: spec.transition(0, tr as usize).unwrap(),
                    sigma: None,
                });
            }
        }
        SpectroscopyDataset::new(ControlKind::Phase, pts).unwrap()
    }

    #[test]
    fn phase_controlled_round_trip() {
        let data = synthetic_phase_data(25);
        let guess = SpectroscopyGuess {
            e_j: 3.3,
            e_c: 1.4,
            e_l: 0.85,
            current_period: 1.0,
            current_offset: 0.0,
        };
        let opts = SpectroscopyFitOptions {
            n_starts: 2,
            ..Default::default()
        };
        let r = fit_fluxonium_spectroscopy(&data, &guess, &SolverConfig::default(), &opts).unwrap();
        assert!((r.get("e_j").unwrap() - 3.54).abs() < 1e-6);
        assert!((r.get("e_c").unwrap() - 1.32).abs() < 1e-6);
        assert!((r.get("e_l").unwrap() - 0.81).abs() < 1e-6);
    }

    #[test]
    fn three_points_are_underdetermined() {
        let data = synthetic_phase_data(25);
        let few = SpectroscopyDataset::new(ControlKind::Current, data.points[..3].to_vec()).unwrap();
        let guess = SpectroscopyGuess {
            e_j: 3.5,
            e_c: 1.3,
            e_l: 0.8,
            current_period: 1.0,
            current_offset: 0.0,
        };
        let err = fit_fluxonium_spectroscopy(&few, &guess, &SolverConfig::default(), &Default::default())
            .unwrap_err();
        assert!(matches!(err, Error::Underdetermined { .. }));
    }

    #[test]
    fn parabola_vertex_is_exact() {
        let pts: Vec<(f64, f64)> = (0..7)
            .map(|k| {
                let x = 2.35 + 0.1 * (k as f64 - 3.0);
                (x, (x - 2.35).powi(2) + 0.5)
            })
            .collect();
        let r = fit_parabola_sweet_spot(&pts).unwrap();
        assert!((r.get("vertex_control").unwrap() - 2.35).abs() < 1e-12);
        assert!((r.get("curvature").unwrap() - 1.0).abs() < 1e-9);
        assert!((r.get("vertex_frequency").unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn parabola_errors() {
        let down: Vec<(f64, f64)> = (0..5).map(|k| (k as f64, -(k as f64 - 2.0).powi(2))).collect();
        assert!(matches!(fit_parabola_sweet_spot(&down), Err(Error::Unidentifiable(_))));
        let two = [(0.0, 1.0), (1.0, 2.0), (1.0, 2.1)];
        assert!(matches!(fit_parabola_sweet_spot(&two), Err(Error::Underdetermined { .. })));
    }

    #[test]
    fn sweet_spot_current_to_trap_phase() {
        let phi = trap_phase_from_sweet_spot(2.35e-6, 3.22e-3).unwrap();
        assert!((phi / TWO_PI - 0.50073).abs() < 1e-5);
    }

    fn transmon_data(period: f64, offset: f64, scale: f64) -> SpectroscopyDataset {
        let truth = [period, offset, 39.0, 3.3, 0.35];
        let pts = (0..121)
            .map(|k| {
                let i = scale * (-1.5e-6 + 3e-6 * k as f64 / 120.0);
                SpectroscopyPoint {
                    control: i,
                    transition: 1,
                    frequency: squid_transmon_f01(&[truth[0] * scale, truth[1] * scale, 39.0, 3.3, 0.35], i),
                    sigma: None,
                }
            })
            .collect();
        SpectroscopyDataset::new(ControlKind::Current, pts).unwrap()
    }

    #[test]
    fn transmon_period_round_trip_and_scaling() {
        let data = transmon_data(540e-9, 120e-9, 1.0);
        let r = fit_transmon_period(&data, &TransmonGuess::default()).unwrap();
        let period = r.get("current_period").unwrap();
        assert!((period - 540e-9).abs() < 1e-12, "{period}");
        assert!((r.get("current_offset").unwrap() - 120e-9).abs() < 1e-12);
        let doubled = transmon_data(540e-9, 120e-9, 2.0);
        let r2 = fit_transmon_period(&doubled, &TransmonGuess::default()).unwrap();
        let p2 = r2.get("current_period").unwrap();
        assert!((p2 / period - 2.0).abs() < 1e-9, "{p2}");
    }

    #[test]
    fn flat_transmon_data_is_unidentifiable() {
        let pts = (0..50)
            .map(|k| SpectroscopyPoint {
                control: k as f64 * 1e-8,
                transition: 1,
                frequency: 6.0,
                sigma: None,
            })
            .collect();
        let data = SpectroscopyDataset::new(ControlKind::Current, pts).unwrap();
        assert!(matches!(
            fit_transmon_period(&data, &TransmonGuess::default()),
            Err(Error::Unidentifiable(_))
        ));
    }
}
