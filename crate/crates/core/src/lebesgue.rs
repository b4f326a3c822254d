//! p-Lebesgue-point diagnostics.
//!
//! `θ_p(f, x, r) = (1/r) ∫_{|t|<r} |f(x−t) − f(x)|^p dt`; `x` is a p-Lebesgue
//! point of `f` when `θ_p → 0` as `r → 0`. Profiles of `θ_p` over a radius
//! ladder are classified by their final value and log–log slope, and the
//! product lemmas are checked by evaluating both sides of each inequality used
//! in their proofs.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::catalog::RealFn;
use crate::error::{Error, Result};
use crate::fit::{fit_rate, ZERO_FLOOR};
use crate::quadrature::{geometric_mesh, insert_breakpoints, integrate_partition, Estimate, QuadConfig};

/// Profile exponent standing in for `p = ∞`.
pub const INFINITY_SURROGATE_P: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    LebesguePoint,
    NotLebesgue,
    Inconclusive,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::LebesguePoint => "lebesgue_point",
            Classification::NotLebesgue => "not_lebesgue",
            Classification::Inconclusive => "inconclusive",
        }
    }
}

/// Classification thresholds for [`lebesgue_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// A Lebesgue point needs a final `θ` below this ...
    pub lebesgue_theta: f64,
    /// ... and a log–log slope above this.
    pub lebesgue_slope: f64,
    /// A flat profile has `|slope|` below this ...
    pub flat_slope: f64,
    /// ... and a final `θ` above this.
    pub flat_theta: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            lebesgue_theta: 1e-3,
            lebesgue_slope: 0.2,
            flat_slope: 0.05,
            flat_theta: 1e-2,
        }
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("radius must be positive and finite, got {r}")))
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "exponent must be finite and at least 1, got {p}"
        )))
    }
}

/// `(1/r) ∫_{|t|<r} w(t) dt`, folded onto `[0, r]`, with the mesh graded toward
/// `t = 0` and broken at the distances `|x − s|` of the singular points `s`.
fn window_mean(w: impl Fn(f64) -> f64, x: f64, r: f64, singular: &[f64], quad: &QuadConfig) -> Result<Estimate> {
    let breaks: Vec<f64> = singular.iter().map(|s| (x - s).abs()).collect();
    let mesh = insert_breakpoints(geometric_mesh(0.0, r / 1024.0, r), &breaks);
    let folded = |t: f64| w(t) + w(-t);
    let est = integrate_partition(&folded, &mesh, quad)?;
    Ok(Estimate {
        value: est.value / r,
        err_est: est.err_est / r,
        subdivisions: est.subdivisions,
    })
}

/// `θ_p(f, x, r)`.
pub fn theta<F: RealFn + ?Sized>(f: &F, x: f64, r: f64, p: f64, quad: &QuadConfig) -> Result<Estimate> {
    check_radius(r)?;
    check_exponent(p)?;
    let f0 = f.eval(x);
    window_mean(|t| (f.eval(x - t) - f0).abs().powf(p), x, r, &f.singular_points(), quad)
}

/// Pointwise product of several functions.
pub struct ProductFn<'a>(pub Vec<&'a dyn RealFn>);

impl RealFn for ProductFn<'_> {
    fn eval(&self, x: f64) -> f64 {
        self.0.iter().map(|f| f.eval(x)).product()
    }

    fn singular_points(&self) -> Vec<f64> {
        self.0.iter().flat_map(|f| f.singular_points()).collect()
    }
}

/// `θ_p` over a decreasing radius ladder with its log–log slope and classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaProfile {
    pub p: f64,
    pub x: f64,
    pub radii: Vec<f64>,
    /// `NaN` where the quadrature failed.
    pub theta: Vec<f64>,
    pub fitted_slope: Option<f64>,
    pub r_squared: Option<f64>,
    pub classification: Classification,
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.len() < 6 {
        return Err(Error::Parameter(format!(
            "a radius ladder needs at least 6 entries, got {}",
            radii.len()
        )));
    }
    radii.iter().try_for_each(|r| check_radius(*r))?;
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Parameter("radius ladder must be strictly decreasing".into()));
    }
    Ok(())
}

/// `r_k = first · 2^{−k}`, `k = 0..n`.
pub fn halving_radii(first: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| first * 0.5f64.powi(k as i32)).collect()
}

/// `θ_p(f, x, r)` for each radius; a quadrature failure at any radius makes the
/// profile inconclusive rather than an error.
pub fn lebesgue_profile<F: RealFn + ?Sized>(
    f: &F,
    x: f64,
    p: f64,
    radii: &[f64],
    thresholds: &Thresholds,
    quad: &QuadConfig,
) -> Result<ThetaProfile> {
    check_radii(radii)?;
    check_exponent(p)?;
    let mut failed = false;
    let mut values = Vec::with_capacity(radii.len());
    for &r in radii {
        match theta(f, x, r, p, quad) {
            Ok(e) => values.push(e.value),
            Err(e) if e.is_numerical() => {
                failed = true;
                values.push(f64::NAN);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(classify(x, p, radii, values, failed, thresholds))
}

fn classify(x: f64, p: f64, radii: &[f64], theta: Vec<f64>, failed: bool, th: &Thresholds) -> ThetaProfile {
    let mut profile = ThetaProfile {
        p,
        x,
        radii: radii.to_vec(),
        theta,
        fitted_slope: None,
        r_squared: None,
        classification: Classification::Inconclusive,
    };
    if failed {
        return profile;
    }
    let theta = &profile.theta;
    let last = theta[theta.len() - 1];
    if theta.iter().all(|t| *t < ZERO_FLOOR) {
        profile.classification = Classification::LebesguePoint;
        return profile;
    }

    let fit = fit_rate(radii, theta).ok();
    profile.fitted_slope = fit.map(|f| f.slope);
    profile.r_squared = fit.map(|f| f.r_squared);
    let decreasing = theta[theta.len() - 4..]
        .windows(2)
        .all(|w| w[1] < w[0] || w[1] < ZERO_FLOOR);

    profile.classification = match fit {
        Some(f) if decreasing && last < th.lebesgue_theta && f.slope > th.lebesgue_slope => {
            Classification::LebesguePoint
        }
        // Values that sink below the zero floor before the fit has three points.
        None if decreasing && last < ZERO_FLOOR => Classification::LebesguePoint,
        Some(f) if f.slope.abs() < th.flat_slope && last > th.flat_theta => Classification::NotLebesgue,
        _ => Classification::Inconclusive,
    };
    profile
}

/// `2^{1−p₂/p₁} θ_{p₁}^{p₂/p₁} − θ_{p₂}`, non-negative by Hölder for `p₂ ≤ p₁`.
pub fn check_nesting<F: RealFn + ?Sized>(
    f: &F,
    x: f64,
    r: f64,
    p1: f64,
    p2: f64,
    quad: &QuadConfig,
) -> Result<Estimate> {
    check_exponent(p1)?;
    check_exponent(p2)?;
    if p2 > p1 {
        return Err(Error::Parameter(format!(
            "nesting needs p2 <= p1, got p1 {p1}, p2 {p2}"
        )));
    }
    let t1 = theta(f, x, r, p1, quad)?;
    let t2 = theta(f, x, r, p2, quad)?;
    let a = p2 / p1;
    let c = 2f64.powf(1.0 - a);
    let bound = c * t1.value.powf(a);
    // d/dθ (c θ^a) = c a θ^{a−1}; near θ = 0 fall back to the bound itself.
    let slope_err = if t1.value > 0.0 {
        (c * a * t1.value.powf(a - 1.0) * t1.err_est).min(c * t1.err_est.powf(a))
    } else {
        c * t1.err_est.powf(a)
    };
    Ok(Estimate {
        value: bound - t2.value,
        err_est: slope_err + t2.err_est,
        subdivisions: t1.subdivisions + t2.subdivisions,
    })
}

/// Which product lemma an exponent pair falls under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductRegime {
    /// `1/p₁ + 1/p₂ = 1`: the product is in `A¹`.
    Conjugate,
    /// `1/p₁ + 1/p₂ = 1/p₃ < 1`: the product is in `A^{p₃}`.
    Holder,
}

/// Both sides of each inequality in the proof that `fg` inherits Lebesgue points.
///
/// With `d_f(t) = f(x−t) − f(x)` the proof splits `fg(x−t) − fg(x)` into two
/// pieces `I` and `J` and bounds each by `θ`s of the factors. Margins are
/// `bound − actual` and should be non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductMargins {
    pub regime: ProductRegime,
    pub p3: f64,
    /// `θ_{p₃}(fg)`.
    pub theta_product: f64,
    pub i_actual: f64,
    pub i_bound: f64,
    pub j_actual: f64,
    pub j_bound: f64,
    /// `2^{p₃−1}(I + J) − θ_{p₃}(fg)`.
    pub split_margin: f64,
    /// For the Hölder regime, `bound − I` with the bound written as
    /// `θ_{p₁}(f)^{p₃/p₁} + 2^{p₃/p₁}|f(x)|^{p₃}` (times the `g` factor). This
    /// form is not a valid bound for `p₃ > 1`; reported, not asserted.
    pub i_margin_unsplit_form: Option<f64>,
    /// Largest quadrature error estimate among the integrals involved.
    pub err_est: f64,
}

impl ProductMargins {
    pub fn i_margin(&self) -> f64 {
        self.i_bound - self.i_actual
    }

    pub fn j_margin(&self) -> f64 {
        self.j_bound - self.j_actual
    }

    pub fn min_margin(&self) -> f64 {
        self.i_margin().min(self.j_margin()).min(self.split_margin)
    }
}

fn product_regime(p1: f64, p2: f64) -> Result<(ProductRegime, f64)> {
    check_exponent(p1)?;
    check_exponent(p2)?;
    let s = 1.0 / p1 + 1.0 / p2;
    if (s - 1.0).abs() <= 1e-12 {
        Ok((ProductRegime::Conjugate, 1.0))
    } else if s < 1.0 {
        Ok((ProductRegime::Holder, 1.0 / s))
    } else {
        Err(Error::Parameter(format!(
            "1/p1 + 1/p2 = {s} exceeds 1 (p1 {p1}, p2 {p2})"
        )))
    }
}

/// Margins for `f ∈ A^{p₁}`, `g ∈ A^{p₂}` at `x` and radius `r`.
pub fn check_product<F, G>(f: &F, g: &G, x: f64, r: f64, p1: f64, p2: f64, quad: &QuadConfig) -> Result<ProductMargins>
where
    F: RealFn + ?Sized,
    G: RealFn + ?Sized,
{
    check_radius(r)?;
    let (regime, p3) = product_regime(p1, p2)?;
    let mut singular = f.singular_points();
    singular.extend(g.singular_points());
    let (f0, g0) = (f.eval(x), g.eval(x));
    let mean = |w: &dyn Fn(f64) -> f64| window_mean(w, x, r, &singular, quad);

    let k = mean(&|t| (f.eval(x - t) * g.eval(x - t) - f0 * g0).abs().powf(p3))?;
    let tf1 = theta(f, x, r, p1, quad)?;
    let tg2 = theta(g, x, r, p2, quad)?;
    let mut err = k.err_est.max(tf1.err_est).max(tg2.err_est);

    let margins = match regime {
        ProductRegime::Conjugate => {
            // fg(x−t) − fg(x) = d_f(t) g(x−t) + f(x) d_g(t)
            let i = mean(&|t| (f.eval(x - t) - f0).abs() * g.eval(x - t).abs())?;
            let j = mean(&|t| (g.eval(x - t) - g0).abs())?;
            err = err.max(i.err_est).max(j.err_est);
            let g_part = tg2.value.powf(1.0 / p2);
            ProductMargins {
                regime,
                p3,
                theta_product: k.value,
                i_actual: i.value,
                i_bound: tf1.value.powf(1.0 / p1) * (g_part + g0.abs() * 2f64.powf(1.0 / p2)),
                j_actual: f0.abs() * j.value,
                j_bound: f0.abs() * 2f64.powf(1.0 - 1.0 / p2) * g_part,
                split_margin: i.value + f0.abs() * j.value - k.value,
                i_margin_unsplit_form: None,
                err_est: err,
            }
        }
        ProductRegime::Holder => {
            // fg(x−t) − fg(x) = f(x−t) d_g(t) + g(x) d_f(t)
            let i = mean(&|t| ((g.eval(x - t) - g0) * f.eval(x - t)).abs().powf(p3))?;
            let tf3 = theta(f, x, r, p3, quad)?;
            err = err.max(i.err_est).max(tf3.err_est);
            let g_part = tg2.value.powf(p3 / p2);
            let j_actual = g0.abs().powf(p3) * tf3.value;
            let unsplit = tf1.value.powf(p3 / p1) + 2f64.powf(p3 / p1) * f0.abs().powf(p3);
            ProductMargins {
                regime,
                p3,
                theta_product: k.value,
                i_actual: i.value,
                i_bound: (tf1.value.powf(1.0 / p1) + 2f64.powf(1.0 / p1) * f0.abs()).powf(p3) * g_part,
                j_actual,
                j_bound: g0.abs().powf(p3) * 2f64.powf(1.0 - p3 / p1) * tf1.value.powf(p3 / p1),
                split_margin: 2f64.powf(p3 - 1.0) * (i.value + j_actual) - k.value,
                i_margin_unsplit_form: Some(unsplit * g_part - i.value),
                err_est: err,
            }
        }
    };
    Ok(margins)
}

/// Exponents `p₁, …, p_n` and the chain `1/q_k = 1/q_{k−1} + 1/p_{k+1}`,
/// `q₀ = p₁`, in exact rational arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentChain {
    pub ps: Vec<Ratio<i64>>,
    /// `q₁, …, q_{n−1}`.
    pub qs: Vec<Ratio<i64>>,
}

impl ExponentChain {
    pub fn new(ps: &[f64]) -> Result<Self> {
        if ps.len() < 2 {
            return Err(Error::Parameter(format!(
                "a product chain needs at least 2 factors, got {}",
                ps.len()
            )));
        }
        let ps: Vec<Ratio<i64>> = ps.iter().map(|&p| exact_ratio(p)).collect::<Result<_>>()?;
        let one = Ratio::from_integer(1);
        let total: Ratio<i64> = ps.iter().map(|p| p.recip()).sum();
        if total > one {
            return Err(Error::Parameter(format!("sum of 1/p_i is {total}, which exceeds 1")));
        }
        let mut qs = Vec::with_capacity(ps.len() - 1);
        let mut q = ps[0];
        for p in &ps[1..] {
            q = (q.recip() + p.recip()).recip();
            qs.push(q);
        }
        Ok(ExponentChain { ps, qs })
    }

    /// `q_{n−1}`, the exponent for the full product.
    pub fn final_exponent(&self) -> Ratio<i64> {
        self.qs[self.qs.len() - 1]
    }

    /// Pairs `(q_{k−1}, p_{k+1})` used at each reduction step.
    pub fn steps(&self) -> Vec<(Ratio<i64>, Ratio<i64>)> {
        let mut prev = self.ps[0];
        self.ps[1..]
            .iter()
            .zip(&self.qs)
            .map(|(p, q)| {
                let s = (prev, *p);
                prev = *q;
                s
            })
            .collect()
    }
}

fn exact_ratio(p: f64) -> Result<Ratio<i64>> {
    check_exponent(p)?;
    let r = Ratio::<i64>::approximate_float(p)
        .filter(|r| (ratio_to_f64(*r) - p).abs() <= 1e-12 * p && *r.denom() <= 1000)
        .ok_or_else(|| Error::Parameter(format!("exponent {p} is not a simple rational")))?;
    Ok(r)
}

pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Lebesgue-point check for `F = Π f_i` along the exponent chain.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiProductReport {
    pub chain: ExponentChain,
    /// `θ_{q_{n−1}}(F)` over the radius ladder.
    pub profile: ThetaProfile,
    /// Smallest product-lemma margin over the ladder, one per reduction step.
    pub step_margins: Vec<f64>,
    /// Largest quadrature error among the step checks.
    pub err_est: f64,
    pub decays: bool,
}

/// Reduces `f₁⋯f_n` pairwise as `F_{k+1} = F_k · f_{k+1}` with `F_k ∈ A^{q_{k−1}}`
/// and checks each step with [`check_product`], then profiles `θ_{q_{n−1}}(F)`.
pub fn check_multi_product(
    fs: &[&dyn RealFn],
    ps: &[f64],
    x: f64,
    radii: &[f64],
    thresholds: &Thresholds,
    quad: &QuadConfig,
) -> Result<MultiProductReport> {
    if fs.len() != ps.len() {
        return Err(Error::Parameter(format!(
            "{} functions but {} exponents",
            fs.len(),
            ps.len()
        )));
    }
    check_radii(radii)?;
    let chain = ExponentChain::new(ps)?;

    let mut step_margins = Vec::new();
    let mut err_est: f64 = 0.0;
    for (k, (q_prev, p_next)) in chain.steps().into_iter().enumerate() {
        let partial = ProductFn(fs[..=k].to_vec());
        let mut worst = f64::INFINITY;
        for &r in radii {
            let m = check_product(
                &partial,
                fs[k + 1],
                x,
                r,
                ratio_to_f64(q_prev),
                ratio_to_f64(p_next),
                quad,
            )?;
            worst = worst.min(m.min_margin());
            err_est = err_est.max(m.err_est);
        }
        step_margins.push(worst);
    }

    let full = ProductFn(fs.to_vec());
    let profile = lebesgue_profile(&full, x, ratio_to_f64(chain.final_exponent()), radii, thresholds, quad)?;
    let decays = profile.classification == Classification::LebesguePoint;
    Ok(MultiProductReport {
        chain,
        profile,
        step_margins,
        err_est,
        decays,
    })
}

/// Surrogate for `x ∈ A^∞_f`: the `p = 8` profile classifies as a Lebesgue point
/// and the sampled oscillation `max_{|t|<r} |f(x−t) − f(x)|` shrinks with `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfinityCheck {
    pub profile: ThetaProfile,
    pub oscillation: Vec<f64>,
    pub member: bool,
}

/// Samples per side of the window for [`infinity_surrogate`].
const OSCILLATION_SAMPLES: usize = 256;

pub fn infinity_surrogate<F: RealFn + ?Sized>(
    f: &F,
    x: f64,
    radii: &[f64],
    thresholds: &Thresholds,
    quad: &QuadConfig,
) -> Result<InfinityCheck> {
    let profile = lebesgue_profile(f, x, INFINITY_SURROGATE_P, radii, thresholds, quad)?;
    let f0 = f.eval(x);
    let oscillation: Vec<f64> = radii
        .iter()
        .map(|&r| {
            (1..=OSCILLATION_SAMPLES)
                .map(|i| r * i as f64 / (OSCILLATION_SAMPLES as f64 + 1.0))
                .flat_map(|t| [(f.eval(x - t) - f0).abs(), (f.eval(x + t) - f0).abs()])
                .fold(0.0, f64::max)
        })
        .collect();
    let n = oscillation.len();
    let shrinking = oscillation[n - 4..]
        .windows(2)
        .all(|w| w[1] < w[0] || w[1] < ZERO_FLOOR);
    let member = profile.classification == Classification::LebesguePoint
        && shrinking
        && oscillation[n - 1] < thresholds.flat_theta;
    Ok(InfinityCheck {
        profile,
        oscillation,
        member,
    })
}
