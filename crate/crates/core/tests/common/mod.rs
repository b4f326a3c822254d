//! Independent reference computations shared by the integration tests.
//!
//! Nothing here calls into the crate's quadrature: the brute-force integrals use
//! composite Simpson sums on explicitly graded meshes, and the Dawson function
//! is summed from its Taylor series.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `D(x) = e^{−x²} ∫₀^x e^{s²} ds = Σ (−1)ⁿ 2ⁿ x^{2n+1} / (2n+1)!!`.
pub fn dawson(x: f64) -> f64 {
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        n += 1.0;
        term *= -2.0 * x * x / (2.0 * n + 1.0);
        sum += term;
    }
    sum
}

/// `pv ∫ e^{−(x−t)²} dt/t = 2√π·D(x)`.
pub fn gaussian_hilbert(x: f64) -> f64 {
    2.0 * PI.sqrt() * dawson(x)
}

/// Composite Simpson on `[a, b]` with `n` (even) intervals.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Panels `[lo, 2lo], [2lo, 4lo], …` up to `hi`, each integrated by Simpson.
pub fn graded_simpson<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, per_panel: usize) -> f64 {
    let mut total = 0.0;
    let mut a = lo;
    while a < hi {
        let b = (2.0 * a).min(hi);
        total += simpson(f, a, b, per_panel);
        a = b;
    }
    total
}

/// Two-sided brute force `∫_{δ≤|t|≤R} k(t) dt`, each side summed separately
/// with no symmetry folding.
pub fn two_sided<F: Fn(f64) -> f64>(k: &F, delta: f64, radius: f64, per_panel: usize) -> f64 {
    let right = graded_simpson(k, delta, radius, per_panel);
    let left = graded_simpson(&|s: f64| k(-s), delta, radius, per_panel);
    right + left
}

/// Brute-force truncated BHT `∫_{ε≤|t|≤R} h(t)/t dt`.
pub fn truncated<F: Fn(f64) -> f64>(h: &F, eps: f64, radius: f64) -> f64 {
    two_sided(&|t: f64| h(t) / t, eps, radius, 400)
}

/// Brute-force regularized BHT `∫_{|t|≤R} h(t)/(t+iε) dt` as `(re, im)`, with the
/// imaginary tail beyond `R` charged at `h(±R)`.
pub fn regularized<F: Fn(f64) -> f64>(h: &F, eps: f64, radius: f64) -> (f64, f64) {
    // Uniform Simpson covers the core |t| < ε/64 where the kernel is smooth.
    let core = eps / 64.0;
    let re_k = |t: f64| h(t) * t / (t * t + eps * eps);
    let im_k = |t: f64| h(t) * eps / (t * t + eps * eps);
    let re = simpson(&re_k, -core, core, 200) + two_sided(&re_k, core, radius, 400);
    let im = simpson(&im_k, -core, core, 200) + two_sided(&im_k, core, radius, 400);
    let closure = (h(radius) + h(-radius)) * (eps / radius).atan();
    (re, -(im + closure))
}

pub fn gauss(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        let u = (x - c) / w;
        (-u * u).exp()
    }
}

pub fn bump(c: f64, s: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        let u = (x - c) / s;
        let q = 1.0 - u * u;
        if q > 0.0 {
            (1.0 - 1.0 / q).exp()
        } else {
            0.0
        }
    }
}

pub fn lorentz(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |x| {
        let u = (x - c) / w;
        1.0 / (1.0 + u * u)
    }
}
