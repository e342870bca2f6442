mod common;

use common::{constant_solution_jet, krylov_by_series, rk_integrate};
use proptest::prelude::*;
use q4embed::kernel::krylov_series;
use q4embed::{
    db_propagate, krylov_eval, propagate, transfer_matrix, Piece, PiecewisePotential, StateVector4,
    TransferMatrix4,
};

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn derivative_matrix_at_origin_is_identity() {
    for c in [-10.0, -1.0, 0.0, 1.0, 10.0] {
        let k = krylov_eval(0.0, c).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(
                    k.derivative(i, j),
                    if i == j { 1.0 } else { 0.0 },
                    "c={c} i={i} j={j}"
                );
            }
        }
    }
}

#[test]
fn zero_stiffness_gives_monomials() {
    let k = krylov_eval(1.0, 0.0).unwrap();
    assert_eq!(k.k, [1.0, 1.0, 0.5, 1.0 / 6.0]);
}

#[test]
fn unit_stiffness_matches_hyperbolic_forms() {
    let k = krylov_eval(1.0, 1.0).unwrap();
    let k3 = (1f64.sinh() - 1f64.sin()) / 2.0;
    let k0 = (1f64.cosh() + 1f64.cos()) / 2.0;
    assert!((k.k3() - k3).abs() < 1e-9);
    assert!((k.k0() - k0).abs() < 1e-9);
    assert!((k.k3() - 0.1668652).abs() < 1e-7);
    assert!((k.k0() - 1.0416914).abs() < 1e-7);
}

#[test]
fn negative_stiffness_matches_series() {
    let want = krylov_by_series(1.0, -1.0)[3];
    let k = krylov_eval(1.0, -1.0).unwrap();
    assert!((k.k3() - want).abs() < 1e-6);
    assert!((k.k3() - want).abs() < 1e-14);
    // 1/3! − 1/7! + 1/11!
    assert!((want - 0.16646828).abs() < 1e-8);
}

#[test]
fn positive_stiffness_closed_forms_and_derivatives() {
    for b in [0.5, 1.0, 4.0] {
        let s: f64 = f64::powf(b, 0.25);
        for i in 1..=50 {
            let x = 0.1 * i as f64;
            let t = s * x;
            let closed = [
                0.5 * (t.cosh() + t.cos()),
                0.5 * (t.sinh() + t.sin()) / s,
                0.5 * (t.cosh() - t.cos()) / (s * s),
                0.5 * (t.sinh() - t.sin()) / (s * s * s),
            ];
            let lib = krylov_eval(x, b).unwrap();
            let series = krylov_series(x, b);
            // K3 and its first three derivatives are K3, K2, K1, K0
            for j in 0..4 {
                let scale = closed[j].abs().max(1.0);
                assert!(
                    (lib.k[j] - closed[j]).abs() < 1e-10 * scale,
                    "B={b} x={x} j={j}"
                );
                assert!(
                    (series[j] - closed[j]).abs() < 1e-10 * scale,
                    "series B={b} x={x} j={j}"
                );
                assert!(lib.k[j] > 0.0);
            }
        }
    }
}

#[test]
fn transfer_matrix_examples() {
    let id = transfer_matrix(0.0, 2.5).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            assert_eq!(id.entries[i][j], if i == j { 1.0 } else { 0.0 });
        }
    }
    assert!((transfer_matrix(0.7, 3.0).unwrap().determinant() - 1.0).abs() < 1e-10);

    let m1 = transfer_matrix(0.3, 3.0).unwrap().entries;
    let m2 = transfer_matrix(0.4, 3.0).unwrap().entries;
    let full = transfer_matrix(0.7, 3.0).unwrap().entries;
    for i in 0..4 {
        for j in 0..4 {
            let prod: f64 = (0..4).map(|k| m2[i][k] * m1[k][j]).sum();
            assert!((prod - full[i][j]).abs() < 1e-9);
        }
    }
}

#[test]
fn saturation_is_reported_for_oversized_direct_evaluation() {
    assert!(krylov_eval(20.0, 1.0).is_err());
    assert!(transfer_matrix(20.0, 1.0).is_err());
    // spanning substeps instead
    let long = TransferMatrix4::spanning(20.0, 1.0).unwrap();
    let k0 = 0.5 * (20f64.cosh() + 20f64.cos());
    assert!(rel(long.entries[0][0], k0) < 1e-12);
    assert!((long.determinant() - 1.0).abs() < 1e-10 * long.entries[0][0].powi(2));
}

#[test]
fn constants_survive_free_propagation() {
    let pot = PiecewisePotential::constant(0.0);
    let end = propagate(&pot, &StateVector4::new(0.0, [1.0, 0.0, 0.0, 0.0]), 2.0).unwrap();
    assert_eq!(end.jet, [1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn two_piece_propagation_matches_runge_kutta() {
    let pot = PiecewisePotential::new(vec![
        Piece {
            left: 0.0,
            right: 2.0,
            value: 1.0,
        },
        Piece {
            left: 2.0,
            right: f64::INFINITY,
            value: -1.0,
        },
    ])
    .unwrap();
    let start = StateVector4::new(0.0, [1.0; 4]);
    let end = propagate(&pot, &start, 3.0).unwrap();
    let q = |x: f64| if x < 2.0 { 1.0 } else { -1.0 };
    let oracle = rk_integrate(q, &[2.0], [1.0; 4], 0.0, 3.0, 1e-12);
    for i in 0..4 {
        assert!(
            rel(end.jet[i], oracle[i]) < 1e-7,
            "component {i}: {} vs {}",
            end.jet[i],
            oracle[i]
        );
    }
}

#[test]
fn exponential_is_reproduced() {
    let k0: f64 = 1.3;
    let pot = PiecewisePotential::constant(-k0.powi(4));
    let end = propagate(&pot, &StateVector4::exponential(k0, -1.0), 2.0).unwrap();
    let e = (k0 * 2.0).exp();
    let want = [e, k0 * e, k0 * k0 * e, k0.powi(3) * e];
    for i in 0..4 {
        assert!(rel(end.jet[i], want[i]) < 1e-9);
    }
}

#[test]
fn propagation_rejects_backward_targets() {
    let pot = PiecewisePotential::constant(0.0);
    assert!(propagate(&pot, &StateVector4::new(1.0, [1.0; 4]), 0.5).is_err());
}

#[test]
fn sensitivity_vanishes_at_start() {
    let s = db_propagate(1.0, &StateVector4::new(0.0, [1.0, 1.0, -1.0, -1.0]), 0.0).unwrap();
    assert_eq!(s.d, [0.0; 4]);
    assert!(db_propagate(0.0, &StateVector4::new(0.0, [1.0; 4]), 1.0).is_err());
    assert!(db_propagate(-1.0, &StateVector4::new(0.0, [1.0; 4]), 1.0).is_err());
}

#[test]
fn sensitivity_matches_finite_differences() {
    let jet = [1.0, 1.0, -1.0, -1.0];
    let start = StateVector4::new(0.0, jet);
    let eps = 1e-5;
    for (b, x) in [(1.0, 1.0), (0.5, 0.7), (2.0, 0.4), (1.0, 0.25)] {
        let s = db_propagate(b, &start, x).unwrap();
        let up = constant_solution_jet(b + eps, jet, x);
        let dn = constant_solution_jet(b - eps, jet, x);
        for i in 0..4 {
            let fd = (up[i] - dn[i]) / (2.0 * eps);
            assert!(
                rel(s.d[i], fd) < 1e-5,
                "B={b} x={x} i={i}: {} vs {fd}",
                s.d[i]
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_chain(x in 0.05f64..4.0, c in -40.0f64..40.0) {
        prop_assume!(c.abs().powf(0.25) * x <= 8.0);
        let k = krylov_eval(x, c).unwrap();
        let h = 1e-3 / c.abs().powf(0.25).max(1.0);
        let at = |t: f64| krylov_eval(t, c).unwrap().k;
        let (m2, m1, p1, p2) = (at(x - 2.0 * h), at(x - h), at(x + h), at(x + 2.0 * h));
        let scale = k.k.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(c.abs() * k.k3().abs());
        for j in 0..4 {
            let fd = (m2[j] - 8.0 * m1[j] + 8.0 * p1[j] - p2[j]) / (12.0 * h);
            let want = if j == 0 { c * k.k3() } else { k.k[j - 1] };
            prop_assert!((fd - want).abs() <= 1e-7 * want.abs().max(1e-3 * scale), "j={} fd={} want={}", j, fd, want);
        }
    }

    #[test]
    fn composition(h1 in 0.0f64..3.0, h2 in 0.0f64..3.0, c in -20.0f64..20.0) {
        prop_assume!(c.abs().powf(0.25) * (h1 + h2) <= 8.0);
        let a = transfer_matrix(h1, c).unwrap();
        let b = transfer_matrix(h2, c).unwrap();
        let whole = transfer_matrix(h1 + h2, c).unwrap();
        let comp = b.compose(&a);
        let scale = whole.entries.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((comp.entries[i][j] - whole.entries[i][j]).abs() < 1e-9 * scale);
            }
        }
    }

    #[test]
    fn unimodular(h in 0.0f64..2.0, c in -10.0f64..10.0) {
        prop_assert!((transfer_matrix(h, c).unwrap().determinant() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn kernel_positivity(x in 1e-3f64..6.0, b in 1e-3f64..20.0) {
        let k = krylov_eval(x.min(8.0 / b.powf(0.25)), b).unwrap();
        prop_assert!(k.k.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn continuity_through_zero_stiffness(x in -3.0f64..3.0, c in -1e-9f64..1e-9) {
        let k = krylov_eval(x, c).unwrap();
        let mono = [1.0, x, x * x / 2.0, x.powi(3) / 6.0];
        for j in 0..4 {
            prop_assert!((k.k[j] - mono[j]).abs() < 1e-8);
        }
    }
}
