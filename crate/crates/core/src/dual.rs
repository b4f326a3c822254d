//! Scalar checks of the distributional statements: the Leibniz rule for
//! x-derivatives of `H_{α,ε}`, the weak form of the inversion limit, and an
//! empirical ratio for the `L^{p₁} × L^{p₂} → L^p` bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bht::{bht_regularized, bht_truncated, pair_radius, validate_alpha, BhtParams, ComplexEstimate};
use crate::catalog::{make_function, Function, FunctionSpec};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_partition, Estimate, QuadConfig, REL_ROUNDING};

/// Pointwise level used to size the x-window of the norm probe.
const PROBE_REACH_TOL: f64 = 1e-12;
/// `ε` standing in for the principal value in the norm probe.
const PROBE_PV_EPS: f64 = 1e-8;

/// A smooth, compactly supported test function `ψ` for dual pairings.
#[derive(Debug, Clone)]
pub struct TestPairing {
    psi: Function,
    center: f64,
    support_radius: f64,
    pairing_quad: QuadConfig,
}

impl TestPairing {
    /// Checks that `ψ` vanishes at 16 points just outside `center ± support_radius`.
    pub fn new(psi: FunctionSpec, support_radius: f64, pairing_quad: QuadConfig) -> Result<Self> {
        if !(support_radius > 0.0) || !support_radius.is_finite() {
            return Err(Error::Parameter(format!(
                "support radius must be positive and finite, got {support_radius}"
            )));
        }
        pairing_quad.validate()?;
        let center = psi.center();
        let psi = make_function(&psi)?;
        for k in 1..=8 {
            let d = support_radius * (1.0 + 0.5f64.powi(k * 3));
            for x in [center - d, center + d] {
                let v = psi.eval(x);
                if v != 0.0 {
                    return Err(Error::Parameter(format!(
                        "test function {} is {v} at {x}, outside its stated support",
                        psi.spec()
                    )));
                }
            }
        }
        Ok(TestPairing {
            psi,
            center,
            support_radius,
            pairing_quad,
        })
    }

    pub fn psi(&self) -> &Function {
        &self.psi
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.support_radius, self.center + self.support_radius)
    }
}

/// Finite difference of `x ↦ H_{α,ε}(f,g)(x)` against the binomial sum of
/// `H_{α,ε}(f^{(k)}, g^{(m−k)})(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeibnizCheck {
    pub order: u32,
    pub step: f64,
    pub finite_difference: Complex64,
    pub binomial_sum: Complex64,
    /// `|finite_difference − binomial_sum|`.
    pub residual: f64,
    /// Quadrature and rounding error carried into the finite difference.
    pub rounding: f64,
    /// Set when the residual is below the rounding estimate and that estimate
    /// is not small, so the comparison says nothing.
    pub inconclusive: bool,
}

/// Checks `(d/dx)^m H_{α,ε}(f,g) = Σ_k C(m,k) H_{α,ε}(f^{(k)}, g^{(m−k)})` at `x`
/// for `m ∈ {1, 2}`, with a five-point central difference of step `ε/10`. All evaluations
/// share the truncation radius of `p`.
pub fn leibniz_residual(f: &Function, g: &Function, x: f64, p: &BhtParams, m: u32) -> Result<LeibnizCheck> {
    if !(1..=2).contains(&m) {
        return Err(Error::Parameter(format!("derivative order must be 1 or 2, got {m}")));
    }
    p.validate()?;
    let h = p.eps / 10.0;
    let at = |y: f64| bht_regularized(f, g, y, p);
    let size = |e: &ComplexEstimate| e.err_re + e.err_im + REL_ROUNDING * e.value.norm();

    // Five-point central stencils: truncation error O(h⁴).
    let (p1, m1, p2, m2) = (at(x + h)?, at(x - h)?, at(x + 2.0 * h)?, at(x - 2.0 * h)?);
    let (fd, rounding) = if m == 1 {
        (
            (-p2.value + (p1.value - m1.value) * 8.0 + m2.value) / (12.0 * h),
            (size(&p2) + 8.0 * (size(&p1) + size(&m1)) + size(&m2)) / (12.0 * h),
        )
    } else {
        let mid = at(x)?;
        (
            (-p2.value + (p1.value + m1.value) * 16.0 - mid.value * 30.0 - m2.value) / (12.0 * h * h),
            (size(&p2) + 16.0 * (size(&p1) + size(&m1)) + 30.0 * size(&mid) + size(&m2)) / (12.0 * h * h),
        )
    };

    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..=m {
        let fk = make_function(&f.spec().derivative(k)?)?;
        let gk = make_function(&g.spec().derivative(m - k)?)?;
        let binom = if k == 0 || k == m { 1.0 } else { m as f64 };
        // d/dx g(x + αt) = g'(x + αt): no factor of α.
        sum += bht_regularized(&fk, &gk, x, p)?.value * binom;
    }

    let residual = (fd - sum).norm();
    Ok(LeibnizCheck {
        order: m,
        step: h,
        finite_difference: fd,
        binomial_sum: sum,
        residual,
        rounding,
        inconclusive: rounding > residual && rounding > 1e-6 * fd.norm().max(1.0),
    })
}

/// `H_{α,ε} − T_ε + iπ f g` at `x`, where `T_ε` is the truncation at the same `ε`.
pub fn weak_bracket(f: &Function, g: &Function, x: f64, p: &BhtParams) -> Result<Complex64> {
    let reg = bht_regularized(f, g, x, p)?.value;
    let trunc = bht_truncated(f, g, x, p)?.value;
    Ok(Complex64::new(reg.re - trunc, reg.im + PI * f.eval(x) * g.eval(x)))
}

/// `∫ [H_{α,ε}(f,g) − T_ε(f,g) + iπ fg](x) ψ(x) dx` over the support of `ψ`.
///
/// One truncation radius, large enough for every `x` in the support, is used
/// throughout so the integrand is smooth in `x`.
pub fn weak_limit_residual(
    f: &Function,
    g: &Function,
    psi: &TestPairing,
    alpha: f64,
    eps: f64,
    quad: &QuadConfig,
) -> Result<Estimate<Complex64>> {
    validate_alpha(alpha)?;
    let (lo, hi) = psi.support();
    let radius = pair_radius(f.spec(), g.spec(), lo, alpha).max(pair_radius(f.spec(), g.spec(), hi, alpha));
    let p = BhtParams::new(alpha, eps, radius, *quad)?;

    let integrand = |x: f64| -> Result<Complex64> {
        let w = psi.psi().eval(x);
        if w == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(weak_bracket(f, g, x, &p)? * w)
    };
    // integrate_partition wants an infallible integrand; park the first error.
    let failure = std::cell::RefCell::new(None);
    let safe = |x: f64| match integrand(x) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let mut points = vec![lo, psi.center, hi];
    points.dedup();
    let est = integrate_partition(&safe, &points, &psi.pairing_quad);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    est
}

/// Empirical `‖H_α(f,g)‖_p / (‖f‖_{p₁} ‖g‖_{p₂})`; reported, never asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormProbe {
    pub p: f64,
    pub window: f64,
    pub grid_points: usize,
    pub norm_h: f64,
    pub norm_f: f64,
    pub norm_g: f64,
    pub ratio: f64,
}

fn lp_norm(f: &Function, p: f64, quad: &QuadConfig) -> Result<f64> {
    let reach = f
        .spec()
        .reach(PROBE_REACH_TOL)
        .ok_or_else(|| Error::Parameter(format!("{} does not decay", f.spec())))?;
    let c = f.spec().center();
    let mut points = vec![c - reach];
    let mut singular: Vec<f64> = f
        .spec()
        .singular_points()
        .into_iter()
        .filter(|s| (s - c).abs() < reach)
        .collect();
    singular.sort_by(f64::total_cmp);
    points.extend(singular);
    points.push(c + reach);
    points.dedup();
    let est = integrate_partition(&|x: f64| f.eval(x).abs().powf(p), &points, quad)?;
    Ok(est.value.powf(1.0 / p))
}

/// `H_α(f,g)` on a uniform grid of `grid_points` over `[−W, W]`,
/// `W = (1+|α|)·max(|c_f| + reach_f, |c_g| + reach_g)`, with the principal value
/// approximated by the truncation at `ε = 1e−8`.
pub fn norm_probe(
    f: &Function,
    g: &Function,
    alpha: f64,
    p1: f64,
    p2: f64,
    grid_points: usize,
    quad: &QuadConfig,
) -> Result<NormProbe> {
    validate_alpha(alpha)?;
    if !(p1 >= 1.0 && p2 >= 1.0 && p1.is_finite() && p2.is_finite()) {
        return Err(Error::Parameter(format!(
            "p1 and p2 must be finite and at least 1, got {p1}, {p2}"
        )));
    }
    let p = 1.0 / (1.0 / p1 + 1.0 / p2);
    if !(p > 2.0 / 3.0) {
        return Err(Error::Parameter(format!("target exponent {p} must exceed 2/3")));
    }
    if grid_points < 3 {
        return Err(Error::Parameter("norm probe needs at least 3 grid points".into()));
    }
    let extent = |s: &FunctionSpec| {
        s.reach(PROBE_REACH_TOL)
            .map(|r| s.center().abs() + r)
            .ok_or_else(|| Error::Parameter(format!("norm probe needs decaying inputs; {s} does not decay")))
    };
    let window = (1.0 + alpha.abs()) * extent(f.spec())?.max(extent(g.spec())?);

    let norm_f = lp_norm(f, p1, quad)?;
    let norm_g = lp_norm(g, p2, quad)?;
    let dx = 2.0 * window / (grid_points - 1) as f64;
    let mut sum = 0.0;
    for i in 0..grid_points {
        let x = -window + i as f64 * dx;
        let params = BhtParams::new(alpha, PROBE_PV_EPS, pair_radius(f.spec(), g.spec(), x, alpha), *quad)?;
        let v = bht_truncated(f, g, x, &params)?.value.abs().powf(p);
        let w = if i == 0 || i == grid_points - 1 { 0.5 } else { 1.0 };
        sum += w * v;
    }
    let norm_h = (sum * dx).powf(1.0 / p);
    let ratio = if norm_h == 0.0 { 0.0 } else { norm_h / (norm_f * norm_g) };
    Ok(NormProbe {
        p,
        window,
        grid_points,
        norm_h,
        norm_f,
        norm_g,
        ratio,
    })
}
