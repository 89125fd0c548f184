//! Cross-module invariants on randomized inputs.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spinbath::bath::{map_coefficients, map_coefficients_cached, subspace_terms, BathParams};
use spinbath::channel::{apply_kraus, evolve_with, kraus_set, DensityMatrix};
use spinbath::generator::canonical_rates_from;
use spinbath::nonmarkov::{rhp_q, trace_distance, StatePair};

fn random_state(rng: &mut impl Rng) -> DensityMatrix {
    // uniform in the Bloch ball
    loop {
        let rx = rng.random_range(-1.0..1.0);
        let ry = rng.random_range(-1.0..1.0);
        let rz = rng.random_range(-1.0..1.0);
        if rx * rx + ry * ry + rz * rz <= 1.0 {
            return DensityMatrix::from_bloch(rx, ry, rz).unwrap();
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unitality_and_choi_positivity_hold_everywhere(
        n in 1u32..=25,
        alpha in -0.5f64..0.5,
        t in 0.0f64..100.0,
    ) {
        let params = BathParams::new(n, alpha, 1.0).unwrap();
        let c = map_coefficients(&params, t).unwrap();
        prop_assert!((c.a + c.b - 1.0).abs() < 1e-12);
        prop_assert!((c.da + c.db).abs() < 1e-10);
        prop_assert!(c.b >= -1e-14);
        prop_assert!(c.a <= 1.0 + 1e-12 && c.a >= -1e-12);
        prop_assert!(c.a >= c.c.norm() - 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences(
        n in 1u32..=20,
        alpha in -0.4f64..0.4,
        t in 0.01f64..60.0,
    ) {
        let params = BathParams::new(n, alpha, 1.0).unwrap();
        let h = 1e-5;
        let c = map_coefficients(&params, t).unwrap();
        let plus = map_coefficients(&params, t + h).unwrap();
        let minus = map_coefficients(&params, t - h).unwrap();
        prop_assert!((c.da - (plus.a - minus.a) / (2.0 * h)).abs() < 1e-6);
        prop_assert!((c.db - (plus.b - minus.b) / (2.0 * h)).abs() < 1e-6);
        prop_assert!((c.dc.re - (plus.c.re - minus.c.re) / (2.0 * h)).abs() < 1e-6);
        prop_assert!((c.dc.im - (plus.c.im - minus.c.im) / (2.0 * h)).abs() < 1e-6);
    }

    #[test]
    fn q_total_is_never_negative(
        n in 1u32..=20,
        alpha in 0.005f64..0.3,
        t in 0.0f64..150.0,
    ) {
        let params = BathParams::new(n, alpha, 1.0).unwrap();
        let coeffs = map_coefficients(&params, t).unwrap();
        if let Ok(rates) = canonical_rates_from(&coeffs, params.eps_degeneracy()) {
            let q = rhp_q(&rates);
            prop_assert!(q.q_dis >= 0.0);
            prop_assert!(q.q_deph >= 0.0);
            prop_assert!(q.q_total() >= 0.0);
        }
    }

    #[test]
    fn kraus_phase_is_quadrant_correct(
        n in 1u32..=20,
        alpha in -0.3f64..0.3,
        t in 0.0f64..120.0,
    ) {
        let params = BathParams::new(n, alpha, 1.0).unwrap();
        let coeffs = map_coefficients(&params, t).unwrap();
        let set = kraus_set(&coeffs).unwrap();
        let rebuilt = Complex64::from_polar(coeffs.c.norm(), set.theta());
        prop_assert!((rebuilt - coeffs.c).norm() < 1e-12);
    }
}

#[test]
fn outputs_stay_physical_for_random_inputs() {
    // 1000 random (state, time) pairs: trace preserved, output PSD, and the
    // Kraus route agrees with the direct action.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let params = BathParams::new(20, 0.03, 1.0).unwrap();
    let terms = subspace_terms(&params);
    for k in 0..1000 {
        let rho0 = random_state(&mut rng);
        let t = rng.random_range(0.0..200.0);
        let coeffs = map_coefficients_cached(&params, &terms, t).unwrap();
        let out = evolve_with(&coeffs, &rho0);
        assert!(
            (out.rho11() + out.rho22() - 1.0).abs() < 1e-12,
            "trace at case {k}"
        );
        let det = out.rho11() * out.rho22() - out.rho12().norm_sqr();
        assert!(det >= -1e-12, "positivity at case {k}: det = {det:e}");
        let via_kraus = apply_kraus(&kraus_set(&coeffs).unwrap(), &rho0);
        assert!(out.trace_distance(&via_kraus) < 1e-12);
    }
}

#[test]
fn trace_distance_contracts_from_origin() {
    // D(Phi_t[rho1], Phi_t[rho2]) <= D(rho1, rho2) for 100 pairs x 100 times.
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let params = BathParams::new(20, 0.03, 1.0).unwrap();
    let terms = subspace_terms(&params);
    for _ in 0..100 {
        let pair = StatePair::new(random_state(&mut rng), random_state(&mut rng));
        let d0 = (pair.a * pair.a + pair.b.norm_sqr()).sqrt();
        for _ in 0..100 {
            let t = rng.random_range(0.0..200.0);
            let coeffs = map_coefficients_cached(&params, &terms, t).unwrap();
            let d = trace_distance(&coeffs, &pair);
            assert!(d <= d0 + 1e-12, "contraction violated: D({t}) = {d} > {d0}");
        }
    }
}

#[test]
fn state_pair_differences_are_reproducible() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let r1 = random_state(&mut rng);
        let r2 = random_state(&mut rng);
        let pair = StatePair::new(r1, r2);
        assert_eq!(pair.a, r1.rho11() - r2.rho11());
        assert_eq!(pair.b, r1.rho12() - r2.rho12());
    }
}
