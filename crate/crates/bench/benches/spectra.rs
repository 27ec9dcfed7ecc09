use std::f64::consts::PI;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use fluxonium_core::coherence::{coherence_budget, NoiseModel};
use fluxonium_core::qubit::{phase_grid_oracle, transmon_spectrum, FluxoniumSolver};
use fluxonium_core::{FluxConfig, FluxoniumParams, SolverConfig, TransmonParams};

fn device1() -> FluxoniumParams {
    FluxoniumParams::new(3.54, 1.32, 0.81).unwrap()
}

fn fluxonium(c: &mut Criterion) {
    let p = device1();
    let mut g = c.benchmark_group("fluxonium_spectrum");
    for dim in [60, 120, 200] {
        let cfg = SolverConfig {
            basis_dim: dim,
            verify_convergence: false,
            ..SolverConfig::default()
        };
        let s = FluxoniumSolver::new(&p, &cfg).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(dim), &s, |b, s| {
            b.iter(|| s.spectrum(black_box(PI + 0.1)))
        });
    }
    g.finish();

    c.bench_function("solver_with_basis_check", |b| {
        b.iter(|| FluxoniumSolver::new(black_box(&p), &SolverConfig::default()).unwrap())
    });
    c.bench_function("sweet_spot", |b| {
        let s = FluxoniumSolver::new(&p, &SolverConfig::default()).unwrap();
        b.iter(|| s.sweet_spot(black_box(PI), (-1.0, 1.0)).unwrap())
    });
}

fn oracle(c: &mut Criterion) {
    let p = device1();
    let mut g = c.benchmark_group("phase_grid_oracle");
    g.sample_size(10);
    g.bench_function("half_flux", |b| {
        b.iter(|| phase_grid_oracle(&p, &FluxConfig::from_offset(black_box(PI)), 3).unwrap())
    });
    g.finish();
}

fn transmon(c: &mut Criterion) {
    let t = TransmonParams::new(30.0, 4.0, 0.32, 0.0).unwrap();
    let cfg = SolverConfig::default();
    c.bench_function("transmon_spectrum", |b| {
        b.iter(|| transmon_spectrum(&t, black_box(1.0), &cfg).unwrap())
    });
}

fn budget(c: &mut Criterion) {
    let p = device1();
    let deltas: Vec<f64> = (0..31).map(|k| -0.3 + 0.02 * k as f64).collect();
    let mut g = c.benchmark_group("coherence_budget");
    g.sample_size(20);
    g.bench_function("31_points", |b| {
        b.iter(|| {
            coherence_budget(&p, &NoiseModel::device_1(), black_box(&deltas), &SolverConfig::default())
                .unwrap()
        })
    });
    g.finish();
}

criterion_group!(benches, fluxonium, oracle, transmon, budget);
criterion_main!(benches);
