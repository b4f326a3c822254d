//! Truncated, principal-value and regularized bilinear Hilbert transforms
//!
//! ```text
//! H_α(f,g)(x)     = pv ∫ f(x−t) g(x+αt) dt/t
//! H_{α,ε}(f,g)(x) =    ∫ f(x−t) g(x+αt) dt/(t+iε)
//! ```
//!
//! together with the inversion `f(x)g(x) = (i/π)(lim_ε H_{α,ε} − H_α)` and the
//! kernel pairings that drive its proof.
//!
//! Every integral is taken over `|t| ≤ R` and folded onto `[0, R]` through
//! `h(t) ± h(−t)`, with `h(t) = f(x−t)g(x+αt)`, so the `O(1/ε)` halves of the
//! odd kernels cancel analytically rather than in floating point. Even kernels
//! get a tail closure: the mass of the kernel beyond `R` is charged at the
//! boundary values `h(±R)`. For decaying inputs this is negligible; for
//! asymptotically constant ones it makes `H_{α,ε}(1,1) = −iπ` exact.

pub mod kernel;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use kernel::{lemma6_phi, majorant_psi, numeric_majorant, KernelKind, KernelSpec, Parity};

use crate::catalog::{Function, FunctionSpec};
use crate::error::{Error, Result};
use crate::fit::{extrapolate, fit_rate, misfit_acceptable, ExtrapolationModel, RateFit, ZERO_FLOOR};
use crate::quadrature::{
    geometric_mesh, insert_breakpoints, integrate_partition, pv_symmetric_with_breaks, Estimate, QuadConfig,
};

/// `α` must stay this far from the degenerate values 0 and −1.
pub const ALPHA_MARGIN: f64 = 1e-9;
/// Truncation radius when neither factor decays.
pub const DEFAULT_RADIUS: f64 = 1e3;
/// Pointwise level below which a decaying factor is treated as zero when sizing `R`.
pub const REACH_TOL: f64 = 1e-13;
/// Largest imaginary residue an inversion may leave after extrapolation.
pub const IMAG_TOL: f64 = 1e-6;

pub fn validate_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha.abs() <= ALPHA_MARGIN || (alpha + 1.0).abs() <= ALPHA_MARGIN {
        return Err(Error::Parameter(format!(
            "alpha must be finite and away from 0 and -1, got {alpha}"
        )));
    }
    Ok(())
}

/// Dilation `α`, regularization `ε`, truncation radius `R` and quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BhtParams {
    pub alpha: f64,
    pub eps: f64,
    pub radius: f64,
    pub quad: QuadConfig,
}

impl BhtParams {
    pub fn new(alpha: f64, eps: f64, radius: f64, quad: QuadConfig) -> Result<Self> {
        let p = BhtParams {
            alpha,
            eps,
            radius,
            quad,
        };
        p.validate()?;
        Ok(p)
    }

    /// Parameters with `R` sized by [`pair_radius`] and default quadrature.
    pub fn for_pair(f: &Function, g: &Function, x: f64, alpha: f64, eps: f64) -> Result<Self> {
        Self::new(
            alpha,
            eps,
            pair_radius(f.spec(), g.spec(), x, alpha),
            QuadConfig::default(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        validate_alpha(self.alpha)?;
        if !(self.eps > 0.0) || !(self.eps < self.radius) || !self.radius.is_finite() {
            return Err(Error::Parameter(format!(
                "need 0 < eps < R, got eps {} and R {}",
                self.eps, self.radius
            )));
        }
        self.quad.validate()
    }

    /// Same parameters at a different `ε`.
    pub fn at_eps(&self, eps: f64) -> Result<Self> {
        Self::new(self.alpha, eps, self.radius, self.quad)
    }
}

/// Radius beyond which `h(t) = f(x−t)g(x+αt)` is below [`REACH_TOL`] because a
/// decaying factor has left its support; [`DEFAULT_RADIUS`] when neither decays.
pub fn pair_radius(f: &FunctionSpec, g: &FunctionSpec, x: f64, alpha: f64) -> f64 {
    let rf = f.reach(REACH_TOL).map(|r| (x - f.center()).abs() + r);
    let rg = g.reach(REACH_TOL).map(|r| ((x - g.center()).abs() + r) / alpha.abs());
    let r = match (rf, rg) {
        (Some(a), Some(b)) => a.min(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => DEFAULT_RADIUS,
    };
    r.max(1.0)
}

/// Strictly decreasing, positive `ε` values with at least five entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EpsLadder(Vec<f64>);

impl EpsLadder {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 5 {
            return Err(Error::Parameter(format!(
                "an eps ladder needs at least 5 entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::Parameter(
                "eps ladder entries must be positive and finite".into(),
            ));
        }
        if values.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Parameter("eps ladder must be strictly decreasing".into()));
        }
        Ok(EpsLadder(values))
    }

    /// `first · ratio^k` for `k = 0..n`.
    pub fn geometric(first: f64, ratio: f64, n: usize) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Parameter(format!(
                "ladder ratio must lie in (0, 1), got {ratio}"
            )));
        }
        Self::new((0..n).map(|k| first * ratio.powi(k as i32)).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl Default for EpsLadder {
    /// `ε_k = 0.1 · 2^{−k}`, `k = 0..9`.
    fn default() -> Self {
        EpsLadder((0..10).map(|k| 0.1 * 0.5f64.powi(k)).collect())
    }
}

impl TryFrom<Vec<f64>> for EpsLadder {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EpsLadder> for Vec<f64> {
    fn from(l: EpsLadder) -> Self {
        l.0
    }
}

/// A complex integral with separate error estimates for each component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub value: Complex64,
    pub err_re: f64,
    pub err_im: f64,
}

/// Values along an `ε` ladder and their extrapolation to `ε = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<V> {
    pub eps_ladder: Vec<f64>,
    pub values: Vec<V>,
    /// Quadrature error estimate per step (summed over components for complex values).
    pub err_estimates: Vec<f64>,
    /// The `ε → 0` limit; `None` when the fit is flagged.
    pub extrapolated: Option<V>,
    /// Log–log fit of `|value − extrapolated|` against `ε`, when it is not degenerate.
    pub fitted_rate: Option<RateFit>,
    /// `|value − model|` per step.
    pub residuals: Vec<f64>,
    pub misfit: f64,
    pub flagged: bool,
}

impl ConvergenceReport<f64> {
    pub fn from_estimates(ladder: &EpsLadder, steps: &[Estimate]) -> Result<Self> {
        let values: Vec<f64> = steps.iter().map(|s| s.value).collect();
        let fit = extrapolate(ladder.as_slice(), &values, ExtrapolationModel::LinearQuadratic)?;
        let fitted_rate = rate_against(ladder, values.iter().map(|v| (v - fit.limit).abs()));
        Ok(ConvergenceReport {
            eps_ladder: ladder.as_slice().to_vec(),
            err_estimates: steps.iter().map(|s| s.err_est).collect(),
            extrapolated: fit.reliable.then_some(fit.limit),
            fitted_rate,
            residuals: fit.residuals.iter().map(|r| r.abs()).collect(),
            misfit: fit.misfit,
            flagged: !fit.reliable,
            values,
        })
    }
}

impl ConvergenceReport<Complex64> {
    /// Extrapolates the real and imaginary parts independently; reliability is
    /// judged on the complex residuals against the complex steps.
    pub fn from_estimates(ladder: &EpsLadder, steps: &[ComplexEstimate]) -> Result<Self> {
        let values: Vec<Complex64> = steps.iter().map(|s| s.value).collect();
        let re: Vec<f64> = values.iter().map(|v| v.re).collect();
        let im: Vec<f64> = values.iter().map(|v| v.im).collect();
        let fit_re = extrapolate(ladder.as_slice(), &re, ExtrapolationModel::LinearQuadratic)?;
        let fit_im = extrapolate(ladder.as_slice(), &im, ExtrapolationModel::LinearQuadratic)?;
        let limit = Complex64::new(fit_re.limit, fit_im.limit);
        let residuals: Vec<f64> = fit_re
            .residuals
            .iter()
            .zip(&fit_im.residuals)
            .map(|(a, b)| a.hypot(*b))
            .collect();
        let misfit = residuals.iter().fold(0.0f64, |m, r| m.max(*r));
        let diffs = values.windows(2).map(|w| (w[1] - w[0]).norm()).collect();
        let size = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let reliable = limit.re.is_finite() && limit.im.is_finite() && misfit_acceptable(misfit, diffs, size);
        Ok(ConvergenceReport {
            eps_ladder: ladder.as_slice().to_vec(),
            err_estimates: steps.iter().map(|s| s.err_re + s.err_im).collect(),
            extrapolated: reliable.then_some(limit),
            fitted_rate: rate_against(ladder, values.iter().map(|v| (v - limit).norm())),
            residuals,
            misfit,
            flagged: !reliable,
            values,
        })
    }
}

fn rate_against(ladder: &EpsLadder, gaps: impl Iterator<Item = f64>) -> Option<RateFit> {
    let gaps: Vec<f64> = gaps.collect();
    if gaps.iter().all(|g| *g < ZERO_FLOOR) {
        return None;
    }
    fit_rate(ladder.as_slice(), &gaps).ok()
}

/// `h(t) = f(x−t)g(x+αt)` and the distances `|t|` at which it is not smooth.
struct Slice<'a> {
    f: &'a Function,
    g: &'a Function,
    x: f64,
    alpha: f64,
}

impl<'a> Slice<'a> {
    fn new(f: &'a Function, g: &'a Function, x: f64, alpha: f64) -> Self {
        Slice { f, g, x, alpha }
    }

    fn h(&self, t: f64) -> f64 {
        self.f.eval(self.x - t) * self.g.eval(self.x + self.alpha * t)
    }

    fn breaks(&self) -> Vec<f64> {
        let from_f = self.f.spec().singular_points().into_iter().map(|s| (self.x - s).abs());
        let from_g = self
            .g
            .spec()
            .singular_points()
            .into_iter()
            .map(|s| ((s - self.x) / self.alpha).abs());
        from_f.chain(from_g).filter(|b| *b > 0.0).collect()
    }

    /// Partition of `[0, R]` graded toward 0 on the scale `ε`.
    fn mesh(&self, eps: f64, radius: f64, extra: &[f64]) -> Vec<f64> {
        let mut breaks = self.breaks();
        breaks.extend_from_slice(extra);
        insert_breakpoints(geometric_mesh(0.0, 0.25 * eps.min(radius), radius), &breaks)
    }
}

/// `∫_{ε ≤ |t| ≤ R} f(x−t)g(x+αt) dt/t`.
pub fn bht_truncated(f: &Function, g: &Function, x: f64, p: &BhtParams) -> Result<Estimate> {
    p.validate()?;
    let s = Slice::new(f, g, x, p.alpha);
    pv_symmetric_with_breaks(|t| s.h(t), p.eps, p.radius, &s.breaks(), &p.quad)
}

/// [`bht_truncated`] along `ladder` (replacing `base.eps`), extrapolated to `ε = 0`.
pub fn bht_pv(
    f: &Function,
    g: &Function,
    x: f64,
    base: &BhtParams,
    ladder: &EpsLadder,
) -> Result<ConvergenceReport<f64>> {
    check_joint_point(f, g, x)?;
    let steps = ladder
        .as_slice()
        .iter()
        .map(|&e| bht_truncated(f, g, x, &base.at_eps(e)?))
        .collect::<Result<Vec<_>>>()?;
    ConvergenceReport::<f64>::from_estimates(ladder, &steps)
}

/// Rejects points the catalog marks as non-Lebesgue points of `f` or `g`.
pub fn check_joint_point(f: &Function, g: &Function, x: f64) -> Result<()> {
    if f.spec().is_bad_point(x) || g.spec().is_bad_point(x) {
        return Err(Error::Parameter(format!(
            "x = {x} is a known non-Lebesgue point of {} or {}",
            f.spec(),
            g.spec()
        )));
    }
    Ok(())
}

/// `∫_{|t| ≤ R} f(x−t)g(x+αt) dt/(t+iε)` with the tail closure on the imaginary part.
pub fn bht_regularized(f: &Function, g: &Function, x: f64, p: &BhtParams) -> Result<ComplexEstimate> {
    p.validate()?;
    let s = Slice::new(f, g, x, p.alpha);
    let (eps, r) = (p.eps, p.radius);
    let mesh = s.mesh(eps, r, &[]);

    let odd = |t: f64| (s.h(t) - s.h(-t)) * t / (t * t + eps * eps);
    let even = |t: f64| (s.h(t) + s.h(-t)) * eps / (t * t + eps * eps);
    let re = integrate_partition(&odd, &mesh, &p.quad)?;
    let im = integrate_partition(&even, &mesh, &p.quad)?;
    let closure = (s.h(r) + s.h(-r)) * (eps / r).atan();

    Ok(ComplexEstimate {
        value: Complex64::new(re.value, -(im.value + closure)),
        err_re: re.err_est,
        err_im: im.err_est,
    })
}

/// `∫ [h(t) − f(x)g(x)] ε/(t²+ε²) dt`, with the same tail closure as the
/// imaginary part of [`bht_regularized`].
pub fn poisson_residual(f: &Function, g: &Function, x: f64, p: &BhtParams) -> Result<Estimate> {
    p.validate()?;
    let s = Slice::new(f, g, x, p.alpha);
    let (eps, r) = (p.eps, p.radius);
    let h0 = s.h(0.0);
    let bracket = |t: f64| (s.h(t) + s.h(-t) - 2.0 * h0) * eps / (t * t + eps * eps);
    let est = integrate_partition(&bracket, &s.mesh(eps, r, &[]), &p.quad)?;
    let closure = (s.h(r) + s.h(-r) - 2.0 * h0) * (eps / r).atan();
    Ok(est.map(|v| v + closure))
}

/// `∫ h(t) t/(t²+ε²) dt − ∫_{ε≤|t|} h(t)/t dt`, computed directly as the pairing
/// of `h` with the dilated Lemma 6 kernel, which has no tail beyond `R` to close.
pub fn lemma6_gap(f: &Function, g: &Function, x: f64, p: &BhtParams) -> Result<Estimate> {
    p.validate()?;
    let s = Slice::new(f, g, x, p.alpha);
    let k = KernelSpec::lemma6();
    let pairing = |t: f64| (s.h(t) - s.h(-t)) * k.phi_scaled(t, p.eps);
    integrate_partition(&pairing, &s.mesh(p.eps, p.radius, &[p.eps]), &p.quad)
}

/// `∫ f(x−t)g(x+αt) φ_ε(t) dt` for the kernel `k`, with its tail mass beyond
/// `±R` charged at `h(±R)`.
pub fn mollifier_pair(f: &Function, g: &Function, x: f64, k: &KernelSpec, p: &BhtParams) -> Result<Estimate> {
    p.validate()?;
    let s = Slice::new(f, g, x, p.alpha);
    let eps = p.eps;
    let kinks: Vec<f64> = k.kinks().iter().map(|u| u * eps).collect();
    let folded = |t: f64| s.h(t) * k.phi_scaled(t, eps) + s.h(-t) * k.phi_scaled(-t, eps);
    let est = integrate_partition(&folded, &s.mesh(eps, p.radius, &kinks), &p.quad)?;
    let (plus, minus) = k.tail_masses(eps, p.radius)?;
    let closure = s.h(p.radius) * plus + s.h(-p.radius) * minus;
    Ok(est.map(|v| v + closure))
}

/// Outcome of the inversion formula along an `ε` ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InversionReport {
    /// Real part of the extrapolated output, the estimate of `f(x)g(x)`.
    pub recovered: Option<f64>,
    /// `|Im|` of the extrapolated output, which must vanish.
    pub imaginary_residue: f64,
    /// Set when the fit is flagged or the imaginary residue exceeds [`IMAG_TOL`].
    pub failed: bool,
    /// `(i/π)(H_{α,ε} − T_ε)` per step, `T_ε` the truncation at the same `ε`.
    pub report: ConvergenceReport<Complex64>,
}

/// One ladder step of the inversion: `(i/π)(H_{α,ε} − T_ε)`.
pub fn inversion_step(f: &Function, g: &Function, x: f64, p: &BhtParams) -> Result<ComplexEstimate> {
    let reg = bht_regularized(f, g, x, p)?;
    let trunc = bht_truncated(f, g, x, p)?;
    // (i/π)(a + ib − T) = (−b + i(a − T))/π
    Ok(ComplexEstimate {
        value: Complex64::new(-reg.value.im, reg.value.re - trunc.value) / PI,
        err_re: reg.err_im / PI,
        err_im: (reg.err_re + trunc.err_est) / PI,
    })
}

/// `f(x)g(x) = (i/π)(lim_ε H_{α,ε} − H_α)`, evaluated with the regularized and
/// truncated pieces at the same `ε` on every step.
pub fn invert_product(
    f: &Function,
    g: &Function,
    x: f64,
    base: &BhtParams,
    ladder: &EpsLadder,
) -> Result<InversionReport> {
    check_joint_point(f, g, x)?;
    let steps = ladder
        .as_slice()
        .iter()
        .map(|&e| inversion_step(f, g, x, &base.at_eps(e)?))
        .collect::<Result<Vec<_>>>()?;
    InversionReport::from_steps(ladder, &steps)
}

impl InversionReport {
    /// Extrapolates precomputed [`inversion_step`] outputs.
    pub fn from_steps(ladder: &EpsLadder, steps: &[ComplexEstimate]) -> Result<Self> {
        let report = ConvergenceReport::<Complex64>::from_estimates(ladder, steps)?;
        let imaginary_residue = report.extrapolated.map_or(f64::INFINITY, |v| v.im.abs());
        Ok(InversionReport {
            recovered: report.extrapolated.map(|v| v.re),
            imaginary_residue,
            failed: report.flagged || imaginary_residue > IMAG_TOL,
            report,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::make_function;

    fn func(spec: FunctionSpec) -> Function {
        make_function(&spec).unwrap()
    }

    #[test]
    fn alpha_margin() {
        assert!(validate_alpha(0.0).is_err());
        assert!(validate_alpha(-1.0 + 1e-10).is_err());
        assert!(validate_alpha(1e-8).is_ok());
        assert!(BhtParams::new(2.0, 0.5, 0.4, QuadConfig::default()).is_err());
    }

    #[test]
    fn ladder_validation() {
        assert!(EpsLadder::new(vec![0.1, 0.05, 0.05, 0.01, 0.001]).is_err());
        assert!(EpsLadder::new(vec![0.1, 0.05, 0.01, 0.001]).is_err());
        assert_eq!(EpsLadder::default().len(), 10);
        let l: EpsLadder = serde_json::from_str("[0.1,0.05,0.02,0.01,0.005]").unwrap();
        assert_eq!(l.as_slice()[4], 0.005);
        assert!(serde_json::from_str::<EpsLadder>("[0.1,0.2,0.3,0.4,0.5]").is_err());
    }

    #[test]
    fn constants_regularize_to_minus_i_pi() {
        let one = func(FunctionSpec::constant(1.0));
        for &eps in &[0.1, 1e-3, 1e-6] {
            let p = BhtParams::for_pair(&one, &one, 0.3, 2.0, eps).unwrap();
            let v = bht_regularized(&one, &one, 0.3, &p).unwrap().value;
            assert_eq!(v.re, 0.0);
            assert!((v.im + PI).abs() < 1e-12, "{}", v.im);
            assert_eq!(bht_truncated(&one, &one, 0.3, &p).unwrap().value, 0.0);
            assert_eq!(poisson_residual(&one, &one, 0.3, &p).unwrap().value, 0.0);
        }
    }

    #[test]
    fn truncated_linear_integrand() {
        let f = func(FunctionSpec::Polynomial {
            coefficients: vec![0.0, 1.0],
        });
        let one = func(FunctionSpec::constant(1.0));
        let p = BhtParams::new(1.0, 0.1, 2.0, QuadConfig::default()).unwrap();
        let v = bht_truncated(&f, &one, 0.0, &p).unwrap().value;
        assert!((v + 3.8).abs() < 1e-12);
    }

    #[test]
    fn pair_radius_uses_decaying_factor() {
        let gauss = FunctionSpec::gaussian(0.0, 1.0);
        let one = FunctionSpec::constant(1.0);
        let r = pair_radius(&gauss, &one, 1.0, 2.0);
        assert!(r > 6.0 && r < 10.0, "{r}");
        assert_eq!(pair_radius(&one, &one, 0.0, 2.0), DEFAULT_RADIUS);
        // g(x + αt) leaves its support sooner for larger |α|.
        assert!(pair_radius(&one, &gauss, 0.0, 4.0) < pair_radius(&one, &gauss, 0.0, 0.5));
    }

    #[test]
    fn inversion_of_constants_is_exact() {
        let one = func(FunctionSpec::constant(1.0));
        let p = BhtParams::for_pair(&one, &one, 0.0, -0.5, 0.1).unwrap();
        let inv = invert_product(&one, &one, 0.0, &p, &EpsLadder::default()).unwrap();
        assert!(!inv.failed);
        assert!((inv.recovered.unwrap() - 1.0).abs() < 1e-12);
        assert!(inv.imaginary_residue < 1e-12);
    }

    #[test]
    fn bad_point_is_rejected_by_pv() {
        let jump = func(FunctionSpec::sign_jump(0.0));
        let one = func(FunctionSpec::constant(1.0));
        let p = BhtParams::new(2.0, 0.1, 10.0, QuadConfig::default()).unwrap();
        assert!(bht_pv(&jump, &one, 0.0, &p, &EpsLadder::default()).is_err());
    }

    #[test]
    fn sign_jump_poisson_residual_is_minus_pi() {
        let jump = func(FunctionSpec::sign_jump(0.0));
        let one = func(FunctionSpec::constant(1.0));
        for &eps in &[1e-2, 1e-3] {
            let p = BhtParams::new(2.0, eps, 10.0, QuadConfig::default()).unwrap();
            let v = poisson_residual(&jump, &one, 0.0, &p).unwrap().value;
            assert!((v + PI).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn poisson_pairing_of_constants_is_one() {
        let one = func(FunctionSpec::constant(1.0));
        let k = KernelSpec::poisson();
        for &eps in &[0.1, 1e-4] {
            let p = BhtParams::for_pair(&one, &one, 0.2, 0.7, eps).unwrap();
            let v = mollifier_pair(&one, &one, 0.2, &k, &p).unwrap().value;
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }
}
