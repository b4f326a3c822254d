mod common;

use std::f64::consts::E;

use bht_core::quadrature::{integrate_adaptive, pv_symmetric, QuadConfig};
use common::gaussian_hilbert;
use proptest::prelude::*;

#[test]
fn gaussian_slice_matches_dawson_oracle_up_to_the_window() {
    // h(t) = e^{−(1−t)²}: h'(0) = 2/e, h'''(0) = −4/e. The excluded window
    // (−ε, ε) carries 2h'(0)ε + h'''(0)ε³/9 of the principal value.
    let h = |t: f64| (-(1.0 - t) * (1.0 - t)).exp();
    let eps = 1e-4;
    let v = pv_symmetric(h, eps, 8.0, &QuadConfig::default()).unwrap().value;
    let window = 2.0 * (2.0 / E) * eps + (-4.0 / E) * eps.powi(3) / 9.0;
    assert!((v - (gaussian_hilbert(1.0) - window)).abs() < 1e-6, "{v}");
}

#[test]
fn tighter_tolerance_does_not_move_away_from_oracle() {
    let h = |t: f64| (-(1.0 - t) * (1.0 - t)).exp();
    let exact = gaussian_hilbert(1.0) - 2.0 * (2.0 / E) * 1e-6;
    let mut last = f64::INFINITY;
    for rel in [1e-6, 1e-8, 1e-10, 1e-12] {
        let cfg = QuadConfig::new(rel, 1e-15, 4000).unwrap();
        let err = (pv_symmetric(h, 1e-6, 10.0, &cfg).unwrap().value - exact).abs();
        assert!(err <= last.max(1e-12), "rel_tol {rel}: {err} > {last}");
        last = err;
    }
}

proptest! {
    #[test]
    fn interval_additivity(a in -3.0f64..0.0, len1 in 0.1f64..3.0, len2 in 0.1f64..3.0, w in 0.5f64..2.0) {
        let h = |t: f64| (-(t / w) * (t / w)).exp() * (3.0 * t).cos();
        let cfg = QuadConfig::default();
        let (b, c) = (a + len1, a + len1 + len2);
        let left = integrate_adaptive(h, a, b, &cfg).unwrap();
        let right = integrate_adaptive(h, b, c, &cfg).unwrap();
        let whole = integrate_adaptive(h, a, c, &cfg).unwrap();
        let budget = left.err_est + right.err_est + whole.err_est + 1e-14;
        prop_assert!((left.value + right.value - whole.value).abs() <= budget);
    }

    #[test]
    fn even_integrands_have_zero_principal_value(c in 0.1f64..3.0, eps in 1e-6f64..0.5) {
        let h = |t: f64| 1.0 / (1.0 + c * t * t);
        let v = pv_symmetric(h, eps, 50.0, &QuadConfig::default()).unwrap().value;
        prop_assert_eq!(v, 0.0);
    }
}
