//! Real-space reference solver for the fluxonium.
//!
//! The Hamiltonian is discretized on a uniform phase grid around the total
//! offset with Dirichlet walls, n^2 = -d^2/dphi^2 by three-point central
//! differences. Second-order discretization error is removed by Richardson
//! extrapolation between grids of spacing h and h/2, and the grid is
//! doubled until the extrapolated values stop moving. This path shares no
//! code with the oscillator-basis solver and exists to check it.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::{max_abs_diff, EnergySpectrum, FluxConfig, FluxoniumParams};
use crate::error::{Error, Result};
use crate::linalg::SymTridiagonal;

#[derive(Debug, Clone, Copy)]
pub struct PhaseGridOptions {
    /// Grid half-width around the offset, radians.
    pub half_width: f64,
    /// Number of intervals of the coarsest grid.
    pub initial_intervals: usize,
    /// Upper bound on the number of intervals.
    pub max_intervals: usize,
    /// Accept once successive extrapolations agree to this many GHz.
    pub tolerance: f64,
}

impl Default for PhaseGridOptions {
    fn default() -> Self {
        Self {
            half_width: 8.0 * PI,
            initial_intervals: 4096,
            max_intervals: 1 << 20,
            tolerance: 1e-7,
        }
    }
}

struct GridSolution {
    values: Vec<f64>,
    vectors: Option<Vec<Vec<f64>>>,
    spacing: f64,
}

fn solve_grid(
    params: &FluxoniumParams,
    phi_off: f64,
    half_width: f64,
    intervals: usize,
    n_levels: usize,
    with_vectors: bool,
) -> GridSolution {
    let h = 2.0 * half_width / intervals as f64;
    let kinetic = 4.0 * params.e_c / (h * h);
    let interior = intervals - 1;
    let diag = (1..=interior)
        .map(|k| {
            let x = -half_width + k as f64 * h;
            2.0 * kinetic + 0.5 * params.e_l * x * x - params.e_j * (phi_off + x).cos()
        })
        .collect();
    let t = SymTridiagonal::new(diag, vec![-kinetic; interior - 1]);
    let values = t.lowest_eigenvalues(n_levels);
    let vectors = with_vectors.then(|| t.eigenvectors(&values));
    GridSolution {
        values,
        vectors,
        spacing: h,
    }
}

fn richardson(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    coarse
        .iter()
        .zip(fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect()
}

/// |<i| n |j>| on the grid, n = -i d/dphi by central differences.
fn grid_charge_element(u: &[f64], v: &[f64], h: f64) -> f64 {
    let n = u.len();
    let mut s = 0.0;
    for k in 0..n {
        let right = if k + 1 < n { v[k + 1] } else { 0.0 };
        let left = if k > 0 { v[k - 1] } else { 0.0 };
        s += u[k] * (right - left);
    }
    (s / (2.0 * h)).abs()
}

/// Lowest `n_levels` eigen-frequencies of the fluxonium from the phase-grid
/// discretization. The returned eigenvectors are the finest grid's
/// eigenvectors (interior points, unit Euclidean norm).
pub fn phase_grid_oracle(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    n_levels: usize,
) -> Result<EnergySpectrum> {
    phase_grid_oracle_with(params, flux, n_levels, &PhaseGridOptions::default())
}

pub fn phase_grid_oracle_with(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    n_levels: usize,
    opts: &PhaseGridOptions,
) -> Result<EnergySpectrum> {
    params.validate()?;
    flux.validate()?;
    if n_levels == 0 {
        return Err(Error::invalid("n_levels must be >= 1"));
    }
    let off = flux.total_offset();
    let solve = |m: usize, vecs: bool| solve_grid(params, off, opts.half_width, m, n_levels, vecs);

    let mut m = opts.initial_intervals;
    let mut coarse = solve(m, false);
    let mut fine = solve(2 * m, false);
    let mut previous = richardson(&coarse.values, &fine.values);
    loop {
        m *= 2;
        if 2 * m > opts.max_intervals {
            return Err(Error::NonConvergence {
                what: "phase-grid oracle",
                detail: format!("grid too coarse at {m} intervals"),
            });
        }
        coarse = fine;
        fine = solve(2 * m, true);
        let current = richardson(&coarse.values, &fine.values);
        if max_abs_diff(&previous, &current) < opts.tolerance {
            let vectors = fine.vectors.expect("requested");
            let rows = vectors[0].len();
            let eigenvectors = DMatrix::from_fn(rows, n_levels, |r, c| vectors[c][r]);
            return Ok(EnergySpectrum {
                frequencies: current,
                eigenvectors,
            });
        }
        previous = current;
    }
}

/// |<i| n |j>| from the phase-grid discretization, Richardson-extrapolated
/// and checked by grid doubling like [`phase_grid_oracle`].
pub fn phase_grid_charge_element(
    params: &FluxoniumParams,
    flux: &FluxConfig,
    i: usize,
    j: usize,
) -> Result<f64> {
    params.validate()?;
    flux.validate()?;
    if i == j {
        return Err(Error::IndexOutOfRange(format!("need i != j, got ({i}, {j})")));
    }
    let opts = PhaseGridOptions::default();
    let n_levels = i.max(j) + 1;
    let off = flux.total_offset();
    let element = |m: usize| {
        let sol = solve_grid(params, off, opts.half_width, m, n_levels, true);
        let v = sol.vectors.expect("requested");
        grid_charge_element(&v[i], &v[j], sol.spacing)
    };
    let mut m = opts.initial_intervals;
    let mut coarse = element(m);
    let mut fine = element(2 * m);
    let mut previous = (4.0 * fine - coarse) / 3.0;
    loop {
        m *= 2;
        if 2 * m > opts.max_intervals {
            return Err(Error::NonConvergence {
                what: "phase-grid charge element",
                detail: format!("grid too coarse at {m} intervals"),
            });
        }
        coarse = fine;
        fine = element(2 * m);
        let current = (4.0 * fine - coarse) / 3.0;
        if (current - previous).abs() < opts.tolerance {
            return Ok(current);
        }
        previous = current;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_limit() {
        let p = FluxoniumParams::new(0.0, 1.32, 0.81).unwrap();
        let spec = phase_grid_oracle(&p, &FluxConfig::new(0.4, 0.0), 3).unwrap();
        assert!((spec.f01() - (8.0f64 * 1.32 * 0.81).sqrt()).abs() < 1e-6);
        let n01 = phase_grid_charge_element(&FluxoniumParams::new(0.0, 1.0, 1.0).unwrap(), &FluxConfig::new(0.0, 0.0), 0, 1)
            .unwrap();
        assert!((n01 - (1.0f64 / 32.0).powf(0.25)).abs() < 1e-6);
    }

    #[test]
    fn levels_strictly_increase_at_sweet_spot() {
        let p = FluxoniumParams::new(3.54, 1.32, 0.81).unwrap();
        let spec = phase_grid_oracle(&p, &FluxConfig::new(0.0, PI), 6).unwrap();
        assert!(spec.frequencies.windows(2).all(|w| w[0] < w[1]));
        assert!(spec.orthonormality_residual() < 1e-10);
    }
}
