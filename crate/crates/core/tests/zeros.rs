mod common;

use common::{constant_solution_jet, dense_scan_first_zero};
use proptest::prelude::*;
use q4embed::zeros::{derivative_lower_bound_min, first_zeros, z_race_auto, zero_curves};
use q4embed::{
    find_b_star, find_brackets, first_zero, observation1_zeros, propagate, z_race,
    zero_sensitivities, PiecewisePotential, RaceVerdict, StateVector4,
};

const SCAN: f64 = 1e-5;

fn flagship() -> StateVector4 {
    StateVector4::new(0.0, [1.0, 1.0, -1.0, -1.0])
}

/// All four first zeros of `u^{(j)}` for `u'''' = c·u`, by dense scan.
fn scan_all(c: f64, jet: [f64; 4], hi: f64) -> [Option<f64>; 4] {
    std::array::from_fn(|j| {
        dense_scan_first_zero(|x| constant_solution_jet(c, jet, x)[j], 0.0, hi, SCAN)
    })
}

/// Newton polish of a zero of `u^{(j)}` using the series oracle.
fn polish(c: f64, jet: [f64; 4], j: usize, mut x: f64) -> f64 {
    for _ in 0..20 {
        let v = constant_solution_jet(c, jet, x);
        let d = if j == 3 { c * v[0] } else { v[j + 1] };
        let step = v[j] / d;
        x -= step;
        if step.abs() < 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    x
}

#[test]
fn constant_derivative_has_no_zero() {
    let pot = PiecewisePotential::constant(0.0);
    let z = first_zero(
        1,
        &pot,
        &StateVector4::new(0.0, [1.0, 1.0, 0.0, 0.0]),
        20.0,
        0.01,
    )
    .unwrap();
    assert!(!z.is_found());
    assert_eq!(z.horizon, 20.0);
}

#[test]
fn third_derivative_zero_matches_scan() {
    let jet = [1.0; 4];
    let pot = PiecewisePotential::constant(1.0);
    let z = first_zero(3, &pot, &StateVector4::new(0.0, jet), 20.0, 20.0 / 4096.0).unwrap();
    let want =
        dense_scan_first_zero(|x| constant_solution_jet(-1.0, jet, x)[3], 0.0, 20.0, SCAN).unwrap();
    assert!((z.position.unwrap() - want).abs() < 1e-6);
}

#[test]
fn first_zero_rejects_bad_order_and_horizon() {
    let pot = PiecewisePotential::constant(1.0);
    let s = StateVector4::new(0.0, [1.0; 4]);
    assert!(first_zero(4, &pot, &s, 5.0, 0.1).is_err());
    assert!(first_zero(0, &pot, &s, -1.0, 0.1).is_err());
}

#[test]
fn observation_ordering_unit_barrier() {
    let ord = observation1_zeros(1.0, &StateVector4::new(0.0, [1.0; 4])).unwrap();
    assert!(ord.is_strict());
    assert!(ord.x3 > 0.0);
    let scan = scan_all(-1.0, [1.0; 4], 20.0);
    for (got, want) in [ord.x0, ord.x1, ord.x2, ord.x3].iter().zip(scan) {
        assert!((got - want.unwrap()).abs() < 1e-6);
    }
}

#[test]
fn observation_zeros_rescale_with_barrier() {
    let unit = observation1_zeros(1.0, &StateVector4::new(0.0, [1.0; 4])).unwrap();
    let big = observation1_zeros(16.0, &StateVector4::new(0.0, [1.0; 4])).unwrap();
    assert!(big.x0 < unit.x0 && big.x1 < unit.x1 && big.x2 < unit.x2 && big.x3 < unit.x3);
    // x ↦ 2x maps A=16 with jet (1, 2, 4, 8) onto A=1 with jet (1, 1, 1, 1)
    let scaled = observation1_zeros(16.0, &StateVector4::new(0.0, [1.0, 2.0, 4.0, 8.0])).unwrap();
    for (s, u) in [
        (scaled.x0, unit.x0),
        (scaled.x1, unit.x1),
        (scaled.x2, unit.x2),
        (scaled.x3, unit.x3),
    ] {
        assert!((2.0 * s - u).abs() < 1e-9);
    }
}

#[test]
fn observation_rejects_non_positive_data() {
    assert!(observation1_zeros(1.0, &StateVector4::new(0.0, [1.0, 0.0, 1.0, 1.0])).is_err());
    assert!(observation1_zeros(0.0, &StateVector4::new(0.0, [1.0; 4])).is_err());
}

#[test]
fn race_extremes_agree_with_scan() {
    let jet = flagship().jet;
    let big = z_race_auto(100.0, &flagship(), None).unwrap();
    assert_eq!(big.verdict, RaceVerdict::Z3First);
    let h = big.z3.horizon;
    let z3 =
        dense_scan_first_zero(|x| constant_solution_jet(100.0, jet, x)[3], 0.0, h, SCAN).unwrap();
    assert!((big.z3.position.unwrap() - z3).abs() < 1e-6);
    // u' never vanishes within the horizon: the scan oracle sees no sign change
    assert!(
        dense_scan_first_zero(|x| constant_solution_jet(100.0, jet, x)[1], 0.0, h, 1e-4).is_none()
    );

    let small = z_race_auto(0.001, &flagship(), None).unwrap();
    assert_eq!(small.verdict, RaceVerdict::Z1First);
    let z1 = dense_scan_first_zero(|x| constant_solution_jet(0.001, jet, x)[1], 0.0, 50.0, SCAN)
        .unwrap();
    assert!((small.z1.position.unwrap() - z1).abs() < 1e-6);
    if let Some(p3) = small.z3.position {
        assert!(p3 > z1);
    }
}

#[test]
fn race_rejects_wrong_sign_pattern() {
    assert!(z_race(1.0, &StateVector4::new(0.0, [1.0; 4]), 10.0).is_err());
    assert!(z_race(-1.0, &flagship(), 10.0).is_err());
    assert!(find_b_star(&StateVector4::new(0.0, [1.0, 1.0, 0.0, -1.0]), None).is_err());
}

#[test]
fn brackets_verified_by_race() {
    let (sharp, flat) = find_brackets(&flagship(), None).unwrap();
    assert!(flat < sharp);
    assert_eq!(
        z_race_auto(sharp, &flagship(), None).unwrap().verdict,
        RaceVerdict::Z3First
    );
    assert_eq!(
        z_race_auto(2.0 * sharp, &flagship(), None).unwrap().verdict,
        RaceVerdict::Z3First
    );
    assert_eq!(
        z_race_auto(flat, &flagship(), None).unwrap().verdict,
        RaceVerdict::Z1First
    );
    assert!(derivative_lower_bound_min(&flagship(), sharp) > 0.0);
}

#[test]
fn continuation_solves_the_race() {
    let start = flagship();
    let br = find_b_star(&start, None).unwrap();
    assert!(br.b_flat < br.b_star && br.b_star < br.b_sharp);
    assert!((br.z1 - br.z3).abs() < 1e-10 * br.z1.max(1.0));
    assert_eq!(
        z_race_auto(br.b_star, &start, None).unwrap().verdict,
        RaceVerdict::TieWithinTol
    );

    let at = propagate(&PiecewisePotential::constant(-br.b_star), &start, br.z_star).unwrap();
    assert!(at.u1().abs() < 1e-8 && at.u3().abs() < 1e-8, "{:?}", at.jet);
    // cross-check with the series oracle
    let o = constant_solution_jet(br.b_star, start.jet, br.z_star);
    assert!(o[1].abs() < 1e-8 && o[3].abs() < 1e-8);

    if let Some(b1) = br.b1 {
        assert!(br.b_star < b1 && b1 < br.b_sharp);
        let r = z_race_auto(b1 * (1.0 - 1e-3), &start, None).unwrap();
        let pot = PiecewisePotential::constant(-b1 * (1.0 - 1e-3));
        let h = r.z1.horizon;
        let z = first_zeros(&pot, &start, h, (h - start.x) / 4096.0).unwrap();
        let (z1, z2, z3) = (z[1].or_infinity(), z[2].or_infinity(), z[3].or_infinity());
        assert!(
            z3 < z1 && z1 < z2 && z2.is_finite(),
            "z3={z3} z1={z1} z2={z2}"
        );
    }
}

#[test]
fn flagship_race_is_solved_by_cos_plus_sin() {
    // u = cos x + sin x solves u'''' = u with u' = u''' = 0 at π/4
    let br = find_b_star(&flagship(), None).unwrap();
    assert!((br.b_star - 1.0).abs() < 1e-8, "B* = {}", br.b_star);
    assert!(
        (br.z_star - std::f64::consts::FRAC_PI_4).abs() < 1e-8,
        "z* = {}",
        br.z_star
    );
}

#[test]
fn race_verdict_is_monotone_around_the_solution() {
    let start = flagship();
    let br = find_b_star(&start, None).unwrap();
    for d in [1e-2, 1e-4, 1e-6, 1e-8] {
        assert_eq!(
            z_race_auto(br.b_star * (1.0 - d), &start, None)
                .unwrap()
                .verdict,
            RaceVerdict::Z1First
        );
        assert_eq!(
            z_race_auto(br.b_star * (1.0 + d), &start, None)
                .unwrap()
                .verdict,
            RaceVerdict::Z3First
        );
    }
    let curve = zero_curves(&start, br.b_flat, br.b_sharp, 24).unwrap();
    let mut seen_z3_first = false;
    for p in curve {
        let v = z_race_auto(p.b, &start, None).unwrap().verdict;
        if v == RaceVerdict::Z3First {
            seen_z3_first = true;
        } else {
            assert!(!seen_z3_first, "verdict flipped back at B = {}", p.b);
        }
    }
    assert!(seen_z3_first);
}

/// Bracket-interior `B` where both `z₁` and `z₃` exist.
fn interior_samples(count: usize) -> Vec<f64> {
    let start = flagship();
    let (sharp, flat) = find_brackets(&start, None).unwrap();
    let mut out = Vec::new();
    let total = 64;
    for i in 1..total {
        let b = flat * (sharp / flat).powf(i as f64 / total as f64);
        let r = z_race_auto(b, &start, None).unwrap();
        if r.z1.is_found() && r.z3.is_found() {
            out.push(b);
        }
    }
    assert!(
        out.len() >= count,
        "only {} interior samples with both zeros",
        out.len()
    );
    let stride = out.len() / count;
    out.into_iter().step_by(stride).take(count).collect()
}

#[test]
fn zero_sensitivities_match_finite_differences() {
    let start = flagship();
    let jet = start.jet;
    for b in interior_samples(10) {
        let s = zero_sensitivities(b, &start).unwrap();
        assert!(s.dz1_db > 0.0, "dz1/dB = {} at B = {b}", s.dz1_db);
        assert!(s.dz3_db < 0.0, "dz3/dB = {} at B = {b}", s.dz3_db);
        let eps = 1e-6 * b;
        let r = z_race_auto(b, &start, None).unwrap();
        let (z1, z3) = (r.z1.position.unwrap(), r.z3.position.unwrap());
        let fd1 = (polish(b + eps, jet, 1, z1) - polish(b - eps, jet, 1, z1)) / (2.0 * eps);
        let fd3 = (polish(b + eps, jet, 3, z3) - polish(b - eps, jet, 3, z3)) / (2.0 * eps);
        assert!(
            ((s.dz1_db - fd1) / fd1).abs() < 1e-4,
            "B={b}: {} vs {fd1}",
            s.dz1_db
        );
        assert!(
            ((s.dz3_db - fd3) / fd3).abs() < 1e-4,
            "B={b}: {} vs {fd3}",
            s.dz3_db
        );
    }
}

#[test]
fn not_found_is_stable_under_refinement() {
    let pot = PiecewisePotential::constant(-100.0);
    let start = flagship();
    let z = first_zero(1, &pot, &start, 5.0, 5.0 / 4096.0).unwrap();
    let finer = first_zero(1, &pot, &start, 5.0, 5.0 / 8192.0).unwrap();
    assert!(!z.is_found() && !finer.is_found());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn observation_ordering_holds(
        a in 0.5f64..4.0,
        jet in prop::array::uniform4(0.2f64..3.0),
    ) {
        let ord = observation1_zeros(a, &StateVector4::new(0.0, jet)).unwrap();
        prop_assert!(ord.is_strict());
        let scan = scan_all(-a, jet, ord.x0 + 0.5);
        for (got, want) in [ord.x0, ord.x1, ord.x2, ord.x3].iter().zip(scan) {
            prop_assert!((got - want.unwrap()).abs() < 1e-6);
        }
    }
}
