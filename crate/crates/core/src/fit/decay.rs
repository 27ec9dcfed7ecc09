//! Fits of excited-state population decays: relaxation, echo and Ramsey.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::lm::{minimize, LmOptions, LmOutcome};
use super::{periodogram_peak, rms, DecayTrace, FitResult};
use crate::coherence::{t2e_from_rates, RatePair};
use crate::constants::TWO_PI;
use crate::error::{Error, Result};

/// A exp(-gamma t) + B.
pub fn exp_decay_model(t: f64, a: f64, gamma: f64, b: f64) -> f64 {
    a * (-gamma * t).exp() + b
}

/// A exp(-gamma_exp t - (gamma_gauss t)^2) + B.
pub fn exp_gauss_model(t: f64, a: f64, gamma_exp: f64, gamma_gauss: f64, b: f64) -> f64 {
    let g = gamma_gauss * t;
    a * (-gamma_exp * t - g * g).exp() + b
}

/// A exp(-gamma_exp t - (gamma_gauss t)^2) cos(delta_omega t + varphi) + B.
pub fn ramsey_model(
    t: f64,
    a: f64,
    gamma_exp: f64,
    gamma_gauss: f64,
    delta_omega: f64,
    varphi: f64,
    b: f64,
) -> f64 {
    let g = gamma_gauss * t;
    a * (-gamma_exp * t - g * g).exp() * (delta_omega * t + varphi).cos() + b
}

fn require_samples(trace: &DecayTrace, min: usize, parameters: usize) -> Result<()> {
    trace.validate()?;
    if trace.samples.len() < min {
        return Err(Error::Underdetermined {
            points: trace.samples.len(),
            parameters,
        });
    }
    Ok(())
}

fn not_converged(what: &'static str, out: &LmOutcome) -> Error {
    Error::NonConvergence {
        what,
        detail: format!("stopped after {} iterations at cost {:e}", out.iterations, out.cost),
    }
}

fn named(names: &[&str], values: &[f64]) -> Vec<(String, f64)> {
    names.iter().zip(values).map(|(n, v)| (n.to_string(), *v)).collect()
}

struct ExpInit {
    a: f64,
    gamma: f64,
    b: f64,
}

/// B from the mean of the last tenth of the trace, A from the first sample
/// minus B, gamma from a log-linear regression of p_e - B over samples that
/// still carry at least 5% of the amplitude.
fn exp_init(t: &[f64], y: &[f64]) -> Result<ExpInit> {
    let n = t.len();
    let tail = (n / 10).max(1);
    let b = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let a = y[0] - b;
    if !(a > 0.0) {
        return Err(Error::Unidentifiable(format!(
            "initial amplitude {a} is not positive; trace does not decay"
        )));
    }
    let (mut sx, mut sy, mut sxx, mut sxy, mut m) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&ti, &yi) in t.iter().zip(y) {
        let d = yi - b;
        if d > 0.05 * a {
            let l = d.ln();
            sx += ti;
            sy += l;
            sxx += ti * ti;
            sxy += ti * l;
            m += 1.0;
        }
    }
    let span = t[n - 1] - t[0];
    let denom = m * sxx - sx * sx;
    let slope = if m >= 2.0 && denom > 0.0 {
        (m * sxy - sx * sy) / denom
    } else {
        0.0
    };
    let gamma = if slope < 0.0 { -slope } else { 3.0 / span };
    Ok(ExpInit { a, gamma, b })
}

fn exp_residuals(t: &[f64], y: &[f64], p: &[f64]) -> Vec<f64> {
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| exp_decay_model(ti, p[0], p[1], p[2]) - yi)
        .collect()
}

fn exp_gauss_residuals(t: &[f64], y: &[f64], p: &[f64]) -> Vec<f64> {
    t.iter()
        .zip(y)
        .map(|(&ti, &yi)| exp_gauss_model(ti, p[0], p[1], p[2], p[3]) - yi)
        .collect()
}

fn finish(
    names: &[&str],
    out: &LmOutcome,
    values: Vec<f64>,
    derived: Vec<(String, f64)>,
    warnings: Vec<String>,
) -> FitResult {
    FitResult {
        parameters: named(names, &values),
        covariance: out.covariance(),
        residual_rms: rms(out.residuals.iter().copied()),
        converged: out.converged,
        n_iterations: out.iterations,
        derived,
        warnings,
    }
}

/// Fits A exp(-gamma t) + B with gamma >= 0. Derived: `t1` = 1/gamma (us).
pub fn fit_exp_decay(trace: &DecayTrace) -> Result<FitResult> {
    require_samples(trace, 5, 3)?;
    let (t, y) = (trace.times(), trace.values());
    let init = exp_init(&t, &y)?;
    let opts = LmOptions::default().with_bounds(vec![
        (f64::NEG_INFINITY, f64::INFINITY),
        (0.0, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ]);
    let out = minimize(
        |p| Ok(exp_residuals(&t, &y, p)),
        &[init.a, init.gamma, init.b],
        &opts,
    )?;
    if !out.converged {
        return Err(not_converged("exponential decay fit", &out));
    }
    let derived = if out.x[1] > 0.0 {
        vec![("t1".to_string(), 1.0 / out.x[1])]
    } else {
        Vec::new()
    };
    let values = out.x.clone();
    Ok(finish(
        &["A", "gamma", "B"],
        &out,
        values,
        derived,
        trace.out_of_range_warnings(),
    ))
}

/// Fits A exp(-gamma_exp t - (gamma_gauss t)^2) + B with both rates >= 0.
/// Derived: `t2e` (us), the 1/e time of the envelope.
///
/// Three starts are tried: mostly exponential, mixed, and mostly Gaussian.
/// A fourth starts from the pure-exponential optimum, so the result never
/// costs more than [`fit_exp_decay`] on the same data.
pub fn fit_exp_gauss_decay(trace: &DecayTrace) -> Result<FitResult> {
    require_samples(trace, 6, 4)?;
    let (t, y) = (trace.times(), trace.values());
    let init = exp_init(&t, &y)?;
    let g = init.gamma;
    let mut starts = vec![
        [init.a, g, 0.1 * g, init.b],
        [init.a, 0.5 * g, 0.5 * g, init.b],
        [init.a, 0.1 * g, g, init.b],
    ];
    if let Ok(exp) = fit_exp_decay(trace) {
        let p = &exp.parameters;
        starts.push([p[0].1, p[1].1, 0.0, p[2].1]);
    }
    let opts = LmOptions::default().with_bounds(vec![
        (f64::NEG_INFINITY, f64::INFINITY),
        (0.0, f64::INFINITY),
        (0.0, f64::INFINITY),
        (f64::NEG_INFINITY, f64::INFINITY),
    ]);
    let best = best_of(
        starts
            .iter()
            .map(|s| minimize(|p| Ok(exp_gauss_residuals(&t, &y, p)), s, &opts)),
    )
    .ok_or_else(|| Error::NonConvergence {
        what: "exponential-Gaussian decay fit",
        detail: "no start converged".into(),
    })?;
    let rates = RatePair {
        gamma_exp: best.x[1],
        gamma_gauss: best.x[2],
    };
    let derived = t2e_from_rates(&rates)
        .map(|t2e| vec![("t2e".to_string(), t2e)])
        .unwrap_or_default();
    let values = best.x.clone();
    Ok(finish(
        &["A", "gamma_exp", "gamma_gauss", "B"],
        &best,
        values,
        derived,
        trace.out_of_range_warnings(),
    ))
}

/// Lowest-cost converged outcome.
fn best_of(outcomes: impl Iterator<Item = Result<LmOutcome>>) -> Option<LmOutcome> {
    outcomes
        .filter_map(|o| o.ok())
        .filter(|o| o.converged)
        .min_by(|a, b| a.cost.total_cmp(&b.cost))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RamseyOptions {
    /// Fix the detuning (rad/us) instead of fitting it.
    pub delta_omega: Option<f64>,
}

/// Fits A exp(-gamma_exp t - (gamma_gauss t)^2) cos(delta_omega t + varphi) + B.
/// Rates are in 1/us, delta_omega in rad/us, and varphi is reported in
/// [0, 2pi) with A >= 0. Derived: `t2r` (us), the envelope's 1/e time.
pub fn fit_ramsey_decay(trace: &DecayTrace, opts: &RamseyOptions) -> Result<FitResult> {
    require_samples(trace, 10, if opts.delta_omega.is_some() { 5 } else { 6 })?;
    let (t, y) = (trace.times(), trace.values());
    let n = t.len();
    let span = t[n - 1] - t[0];
    let mean = y.iter().sum::<f64>() / n as f64;

    let (k, sum, peak, median) = periodogram_peak(&t, &y, 20).ok_or_else(|| {
        Error::Unidentifiable("trace too short for a periodogram".into())
    })?;
    let (delta_omega0, varphi0) = match opts.delta_omega {
        Some(w) => {
            if !w.is_finite() {
                return Err(Error::invalid("fixed delta_omega must be finite"));
            }
            // phase of the component at the fixed detuning
            let s: num_complex::Complex64 = t
                .iter()
                .zip(&y)
                .map(|(&ti, &yi)| (yi - mean) * num_complex::Complex64::from_polar(1.0, -w * ti))
                .sum();
            (w, s.arg())
        }
        None => {
            let k_min = 1.0 / span;
            if k <= k_min * (1.0 + 1e-9) || peak < 4.0 * median {
                return Err(Error::Unidentifiable(
                    "no detectable oscillation in the Ramsey trace".into(),
                ));
            }
            (TWO_PI * k, sum.arg())
        }
    };
    let amp0 = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max).max(1e-12);

    let fixed = opts.delta_omega;
    let unpack = |p: &[f64]| -> [f64; 6] {
        match fixed {
            Some(w) => [p[0], p[1], p[2], w, p[3], p[4]],
            None => [p[0], p[1], p[2], p[3], p[4], p[5]],
        }
    };
    let residuals = |p: &[f64]| -> Result<Vec<f64>> {
        let q = unpack(p);
        Ok(t
            .iter()
            .zip(&y)
            .map(|(&ti, &yi)| ramsey_model(ti, q[0], q[1], q[2], q[3], q[4], q[5]) - yi)
            .collect())
    };
    let unbounded = (f64::NEG_INFINITY, f64::INFINITY);
    let mut bounds = vec![unbounded, (0.0, f64::INFINITY), (0.0, f64::INFINITY)];
    if fixed.is_none() {
        bounds.push(unbounded);
    }
    bounds.push(unbounded);
    bounds.push(unbounded);
    let lm_opts = LmOptions::default().with_bounds(bounds);

    let mut starts = Vec::new();
    for g in [1.0 / span, 3.0 / span, 10.0 / span] {
        for (ge, gg) in [(g, 0.1 * g), (0.5 * g, 0.5 * g), (0.1 * g, g)] {
            let mut s = vec![amp0, ge, gg];
            if fixed.is_none() {
                s.push(delta_omega0);
            }
            s.push(varphi0);
            s.push(mean);
            starts.push(s);
        }
    }
    let best = best_of(starts.iter().map(|s| minimize(residuals, s, &lm_opts))).ok_or_else(
        || Error::NonConvergence {
            what: "Ramsey decay fit",
            detail: "no start converged".into(),
        },
    )?;

    let mut q = unpack(&best.x);
    let mut cov = best.covariance();
    if q[0] < 0.0 {
        q[0] = -q[0];
        q[4] += PI;
        // A -> -A flips the sign of its covariances
        for k in 0..cov.ncols() {
            if k != 0 {
                cov[(0, k)] = -cov[(0, k)];
                cov[(k, 0)] = -cov[(k, 0)];
            }
        }
    }
    if q[3] < 0.0 {
        // cos is even: (dw, phi) and (-dw, -phi) describe the same curve
        q[3] = -q[3];
        q[4] = -q[4];
        let (iw, ip) = if fixed.is_some() { (usize::MAX, 3) } else { (3, 4) };
        for k in 0..cov.ncols() {
            for idx in [iw, ip] {
                if idx < cov.ncols() && k != iw && k != ip {
                    cov[(idx, k)] = -cov[(idx, k)];
                    cov[(k, idx)] = -cov[(k, idx)];
                }
            }
        }
        if iw < cov.ncols() {
            cov[(iw, ip)] = -cov[(iw, ip)];
            cov[(ip, iw)] = -cov[(ip, iw)];
        }
    }
    q[4] = q[4].rem_euclid(TWO_PI);
    if q[4] >= TWO_PI {
        q[4] = 0.0;
    }

    // covariance in the full six-parameter order; a fixed detuning has zero
    // variance
    let full_cov = if fixed.is_some() {
        let map = [Some(0), Some(1), Some(2), None, Some(3), Some(4)];
        DMatrix::from_fn(6, 6, |r, c| match (map[r], map[c]) {
            (Some(i), Some(j)) => cov[(i, j)],
            _ => 0.0,
        })
    } else {
        cov
    };
    let derived = t2e_from_rates(&RatePair {
        gamma_exp: q[1],
        gamma_gauss: q[2],
    })
    .map(|t2r| vec![("t2r".to_string(), t2r)])
    .unwrap_or_default();
    let mut warnings = trace.out_of_range_warnings();
    if fixed.is_some() {
        warnings.push("delta_omega fixed by caller".into());
    }
    Ok(FitResult {
        parameters: named(
            &["A", "gamma_exp", "gamma_gauss", "delta_omega", "varphi", "B"],
            &q,
        ),
        covariance: full_cov,
        residual_rms: rms(best.residuals.iter().copied()),
        converged: best.converged,
        n_iterations: best.iterations,
        derived,
        warnings,
    })
}
