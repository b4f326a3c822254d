use std::f64::consts::PI;

use bht_core::bht::{bht_regularized, inversion_step, BhtParams};
use bht_core::catalog::{make_function, Function, FunctionSpec, GridSignal};
use bht_core::dual::{leibniz_residual, norm_probe, weak_limit_residual, TestPairing};
use bht_core::fit::fit_rate;
use bht_core::quadrature::{integrate_partition, QuadConfig};
use num_complex::Complex64;

fn func(spec: FunctionSpec) -> Function {
    make_function(&spec).unwrap()
}

fn gaussian() -> Function {
    func(FunctionSpec::gaussian(0.0, 1.0))
}

fn one() -> Function {
    func(FunctionSpec::constant(1.0))
}

fn pairing() -> TestPairing {
    TestPairing::new(
        FunctionSpec::smooth_bump(0.0, 2.0),
        2.0,
        QuadConfig::new(1e-8, 1e-12, 2000).unwrap(),
    )
    .unwrap()
}

#[test]
fn leibniz_first_order() {
    for (f, g) in [(one(), one()), (gaussian(), one())] {
        let p = BhtParams::for_pair(&f, &g, 0.4, 2.0, 0.05).unwrap();
        let c = leibniz_residual(&f, &g, 0.4, &p, 1).unwrap();
        assert!(c.residual < 1e-4 && !c.inconclusive, "{c:?}");
    }
}

#[test]
fn leibniz_second_order() {
    let (f, g) = (gaussian(), gaussian());
    let p = BhtParams::for_pair(&f, &g, 0.0, 2.0, 0.05).unwrap();
    let c = leibniz_residual(&f, &g, 0.0, &p, 2).unwrap();
    assert!(c.residual < 1e-3 && !c.inconclusive, "{c:?}");
}

#[test]
fn leibniz_with_polynomial_factor_and_negative_alpha() {
    let f = func(FunctionSpec::GaussianDerivative {
        center: 0.2,
        width: 0.7,
        order: 1,
    });
    let g = func(FunctionSpec::Polynomial {
        coefficients: vec![1.0, 0.5, -0.2],
    });
    let p = BhtParams::for_pair(&f, &g, -0.3, -0.5, 0.05).unwrap();
    for m in [1, 2] {
        let c = leibniz_residual(&f, &g, -0.3, &p, m).unwrap();
        // Central differences carry h²/12·H⁽ᵐ⁺²⁾; this pair is large and narrow,
        // so the bound is relative.
        assert!(
            c.residual < 1e-4 * c.binomial_sum.norm() && !c.inconclusive,
            "m {m}: {c:?}"
        );
    }
}

#[test]
fn weak_residual_of_trivial_pairs() {
    let zero = func(FunctionSpec::constant(0.0));
    let q = QuadConfig::default();
    let v = weak_limit_residual(&zero, &gaussian(), &pairing(), 2.0, 0.01, &q)
        .unwrap()
        .value;
    assert_eq!(v, Complex64::new(0.0, 0.0));
    for &eps in &[0.1, 0.01, 0.001] {
        let v = weak_limit_residual(&one(), &one(), &pairing(), 2.0, eps, &q)
            .unwrap()
            .value;
        assert!(v.norm() < 1e-9, "eps {eps}: {v}");
    }
}

#[test]
fn weak_residual_decays_linearly() {
    let (f, g) = (gaussian(), gaussian());
    let ladder = [1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3];
    let q = QuadConfig::default();
    let mags: Vec<f64> = ladder
        .iter()
        .map(|&e| {
            weak_limit_residual(&f, &g, &pairing(), 2.0, e, &q)
                .unwrap()
                .value
                .norm()
        })
        .collect();
    assert!(mags.windows(2).all(|w| w[1] < w[0]), "{mags:?}");
    let rate = fit_rate(&ladder, &mags).unwrap();
    assert!(rate.slope >= 0.9, "{rate:?}");
}

#[test]
fn weak_residual_is_the_pairing_of_the_inversion_bracket() {
    let (f, g) = (gaussian(), func(FunctionSpec::lorentzian(0.3, 1.0)));
    let tp = pairing();
    let q = QuadConfig::default();
    let eps = 0.01;
    let v = weak_limit_residual(&f, &g, &tp, 0.7, eps, &q).unwrap().value;

    // Same radius rule: the larger of the two support ends.
    let r = bht_core::bht::pair_radius(f.spec(), g.spec(), -2.0, 0.7).max(bht_core::bht::pair_radius(
        f.spec(),
        g.spec(),
        2.0,
        0.7,
    ));
    let p = BhtParams::new(0.7, eps, r, q).unwrap();
    // H − T + iπfg = −iπ[(i/π)(H − T) − fg]
    let bracket = |x: f64| {
        let out = inversion_step(&f, &g, x, &p).unwrap().value;
        (out - f.eval(x) * g.eval(x)) * Complex64::new(0.0, -PI) * tp.psi().eval(x)
    };
    let w = integrate_partition(
        &bracket,
        &[-2.0, 0.0, 2.0],
        &QuadConfig::new(1e-8, 1e-12, 2000).unwrap(),
    )
    .unwrap()
    .value;
    assert!((v - w).norm() < 1e-10, "{v} vs {w}");
}

fn sampled(scale: f64) -> Function {
    let samples: Vec<f64> = (0..=400)
        .map(|i| {
            let t = -5.0 + 0.025 * i as f64;
            scale * (-t * t).exp()
        })
        .collect();
    func(FunctionSpec::Sampled(GridSignal::new(samples, -5.0, 0.025).unwrap()))
}

#[test]
fn norm_probe_is_grid_stable_and_homogeneous() {
    let (f, g) = (gaussian(), gaussian());
    let q = QuadConfig::default();
    let coarse = norm_probe(&f, &g, 2.0, 2.0, 2.0, 201, &q).unwrap();
    let fine = norm_probe(&f, &g, 2.0, 2.0, 2.0, 401, &q).unwrap();
    assert!(coarse.ratio.is_finite() && coarse.ratio > 0.0);
    assert!(
        (coarse.ratio - fine.ratio).abs() < 0.01 * fine.ratio,
        "{coarse:?} {fine:?}"
    );

    let a = norm_probe(&sampled(1.0), &g, 2.0, 2.0, 2.0, 101, &q).unwrap();
    let b = norm_probe(&sampled(2.0), &g, 2.0, 2.0, 2.0, 101, &q).unwrap();
    assert!((a.ratio - b.ratio).abs() < 1e-6 * a.ratio, "{} vs {}", a.ratio, b.ratio);

    let zero = func(FunctionSpec::constant(0.0));
    assert_eq!(norm_probe(&zero, &g, 2.0, 2.0, 2.0, 51, &q).unwrap().ratio, 0.0);
}

#[test]
fn regularized_transform_is_bilinear() {
    let n = 401;
    let grid = |c: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let t = -5.0 + 0.025 * i as f64;
                (-(t - c) * (t - c)).exp()
            })
            .collect()
    };
    let (s1, s2) = (grid(0.3), grid(-0.5));
    let (a, b) = (1.5, -0.75);
    let combo: Vec<f64> = s1.iter().zip(&s2).map(|(u, v)| a * u + b * v).collect();
    let mk = |s: Vec<f64>| func(FunctionSpec::Sampled(GridSignal::new(s, -5.0, 0.025).unwrap()));
    let (f1, f2, fc) = (mk(s1), mk(s2), mk(combo));
    let g = func(FunctionSpec::lorentzian(0.0, 1.0));
    let p = BhtParams::new(2.0, 0.01, 10.0, QuadConfig::tight()).unwrap();
    let lhs = bht_regularized(&fc, &g, 0.2, &p).unwrap().value;
    let rhs =
        bht_regularized(&f1, &g, 0.2, &p).unwrap().value * a + bht_regularized(&f2, &g, 0.2, &p).unwrap().value * b;
    assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
}
