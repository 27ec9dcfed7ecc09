use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fluxonium_core::coherence::{coherence_budget, NoiseModel};
use fluxonium_core::fit::{
    fit_exp_decay, fit_exp_gauss_decay, fit_noise_parameters, fit_ramsey_decay, CoherencePoint,
    NoiseFitConfig, RamseyOptions,
};
use fluxonium_core::{DecayTrace, FluxoniumParams, SolverConfig};

fn trace(n: usize, dt: f64, f: impl Fn(f64) -> f64) -> DecayTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples = (0..n)
        .map(|k| {
            let t = dt * k as f64;
            (t, f(t) + 0.004 * (rng.random::<f64>() - 0.5))
        })
        .collect();
    DecayTrace::new(samples).unwrap()
}

fn decays(c: &mut Criterion) {
    let t1 = trace(101, 1.0, |t| 0.9 * (-t / 30.0).exp() + 0.05);
    c.bench_function("fit_exp_decay", |b| b.iter(|| fit_exp_decay(black_box(&t1)).unwrap()));

    let echo = trace(101, 1.0, |t| {
        0.45 * (-t / 40.0 - (t / 60.0) * (t / 60.0)).exp() + 0.5
    });
    c.bench_function("fit_exp_gauss_decay", |b| {
        b.iter(|| fit_exp_gauss_decay(black_box(&echo)).unwrap())
    });

    let ramsey = trace(201, 0.2, |t| {
        0.45 * (-t / 12.0).exp() * (2.5 * t + 0.3).cos() + 0.5
    });
    let opts = RamseyOptions { delta_omega: None };
    c.bench_function("fit_ramsey_decay", |b| {
        b.iter(|| fit_ramsey_decay(black_box(&ramsey), &opts).unwrap())
    });
}

fn noise(c: &mut Criterion) {
    let p = FluxoniumParams::new(3.54, 1.32, 0.81).unwrap();
    let cfg = SolverConfig::default();
    let deltas: Vec<f64> = (0..13).map(|k| -0.3 + 0.05 * k as f64).collect();
    let points: Vec<CoherencePoint> = coherence_budget(&p, &NoiseModel::device_1(), &deltas, &cfg)
        .unwrap()
        .into_iter()
        .map(|b| CoherencePoint {
            delta_phi_ext: b.delta_phi_ext,
            t1: 1.0 / b.gamma1,
            t2e: 1.0 / b.gamma2_echo,
            t2r: 1.0 / b.gamma2_ramsey,
        })
        .collect();
    let fc = NoiseFitConfig::default();
    let mut g = c.benchmark_group("fit_noise_parameters");
    g.sample_size(20);
    g.bench_function("13_points", |b| {
        b.iter(|| fit_noise_parameters(black_box(&points), &p, &fc, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, decays, noise);
criterion_main!(benches);
