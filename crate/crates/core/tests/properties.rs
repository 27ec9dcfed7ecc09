use std::f64::consts::PI;

use proptest::prelude::*;

use fluxonium_core::fit::lm::{minimize, LmOptions};
use fluxonium_core::fit::fit_parabola_sweet_spot;
use fluxonium_core::fluxtrap::{deviation, nearest_fluxoid, ring_state, trap_phase};
use fluxonium_core::qubit::wrap_phase;
use fluxonium_core::RingParams;

proptest! {
    #[test]
    fn wrap_phase_lands_in_range_and_preserves_angle(phi in -1e3f64..1e3) {
        let w = wrap_phase(phi);
        prop_assert!((0.0..2.0 * PI).contains(&w));
        let turns = (phi - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn deviation_is_bounded_and_consistent(phi in -50f64..50.0) {
        let d = deviation(phi);
        prop_assert!(d > -0.5 * PI && d <= 0.5 * PI);
        // phi - d is a multiple of pi
        let k = (phi - d) / PI;
        prop_assert!((k - k.round()).abs() < 1e-9);
    }

    #[test]
    fn nearest_fluxoid_minimizes_ring_energy(
        x in -20f64..20.0,
        lk in 1e-12f64..1e-8,
        lg in 1e-12f64..1e-8,
    ) {
        let ring = RingParams::new(lk, lg).unwrap();
        let sel = nearest_fluxoid(x);
        let (_, e) = ring_state(sel.n, x, &ring).unwrap();
        for m in [sel.n - 1, sel.n + 1] {
            let (_, em) = ring_state(m, x, &ring).unwrap();
            prop_assert!(e <= em);
        }
        prop_assert_eq!(trap_phase(sel.n), if sel.n.rem_euclid(2) == 1 { PI } else { 0.0 });
    }

    #[test]
    fn half_integer_ties_pick_smaller_magnitude(k in -1000i64..1000) {
        let x = k as f64 + 0.5;
        let sel = nearest_fluxoid(x);
        prop_assert!(sel.tie);
        let other = if sel.n == k { k + 1 } else { k };
        prop_assert!(sel.n == k || sel.n == k + 1);
        prop_assert!(sel.n.abs() < other.abs() || (sel.n.abs() == other.abs() && sel.n < other));
    }

    #[test]
    fn lm_cost_never_increases(a in 0.5f64..3.0, b in -2f64..2.0, x0 in -1f64..1.0) {
        let xs: Vec<f64> = (0..20).map(|k| k as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| a * (b * x).sin() + 0.3).collect();
        let f = |p: &[f64]| {
            Ok(xs.iter().zip(&ys).map(|(x, y)| p[0] * (p[1] * x).sin() + p[2] - y).collect())
        };
        let out = minimize(f, &[1.0, x0, 0.0], &LmOptions::default()).unwrap();
        for w in out.cost_history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        prop_assert!(out.cost <= out.cost_history[0]);
    }

    #[test]
    fn bounded_lm_stays_inside_bounds(start in 0.0f64..1.0) {
        // unconstrained optimum at 2 lies outside [0, 1]
        let f = |p: &[f64]| Ok(vec![p[0] - 2.0, 0.1 * (p[0] - 2.0)]);
        let out = minimize(f, &[start], &LmOptions::default().with_bounds(vec![(0.0, 1.0)])).unwrap();
        prop_assert!((0.0..=1.0).contains(&out.x[0]));
        prop_assert!((out.x[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn parabola_fit_ignores_point_order(perm in Just((0..9).collect::<Vec<usize>>()).prop_shuffle()) {
        let pts: Vec<(f64, f64)> = (0..9)
            .map(|k| {
                let x = k as f64 * 0.4 - 1.3;
                (x, 0.7 * (x - 0.2) * (x - 0.2) + 1.1 + 0.01 * (k as f64 * 1.7).sin())
            })
            .collect();
        let shuffled: Vec<(f64, f64)> = perm.iter().map(|&i| pts[i]).collect();
        let a = fit_parabola_sweet_spot(&pts).unwrap();
        let b = fit_parabola_sweet_spot(&shuffled).unwrap();
        let (va, vb) = (a.value("vertex_control").unwrap(), b.value("vertex_control").unwrap());
        prop_assert!((va - vb).abs() < 1e-12, "{} vs {}", va, vb);
    }

    #[test]
    fn parabola_vertex_is_recovered(v in -100f64..100.0, a in 1e-4f64..1.0, c in 0.5f64..5.0) {
        let pts: Vec<(f64, f64)> = (-5..=5)
            .map(|k| {
                let x = v + 3.0 * k as f64;
                (x, a * (x - v) * (x - v) + c)
            })
            .collect();
        let fit = fit_parabola_sweet_spot(&pts).unwrap();
        let got = fit.value("vertex_control").unwrap();
        prop_assert!((got - v).abs() < 1e-6 * (1.0 + v.abs()), "{} vs {}", got, v);
    }
}
