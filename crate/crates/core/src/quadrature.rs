//! Adaptive Gauss–Kronrod integration tuned for the principal-value integrands
//! of the bilinear Hilbert transform.
//!
//! The engine is a globally adaptive 10/21-point Gauss–Kronrod scheme: the
//! interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol * |value|)`. Callers that know where
//! their integrand varies on a small scale (the `ε` boundary layer of the
//! regularized kernels) seed the partition with [`geometric_mesh`].

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative rounding carried by a computed integral on top of its error estimate.
pub const REL_ROUNDING: f64 = 1e2 * f64::EPSILON;

/// Tolerances and budget for one adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadConfig {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self> {
        let cfg = QuadConfig {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Settings used by the consistency checks that compare two routes to 1e-12.
    pub fn tight() -> Self {
        QuadConfig {
            rel_tol: 1e-13,
            abs_tol: 1e-14,
            max_subdivisions: 8000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::Parameter(format!(
                "quadrature tolerances must be positive (rel_tol {}, abs_tol {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::Parameter("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Result of an integration: the value and its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<V = f64> {
    pub value: V,
    pub err_est: f64,
    pub subdivisions: usize,
}

impl<V> Estimate<V> {
    pub fn map<W>(self, f: impl FnOnce(V) -> W) -> Estimate<W> {
        Estimate {
            value: f(self.value),
            err_est: self.err_est,
            subdivisions: self.subdivisions,
        }
    }
}

/// Values the integrator can accumulate.
pub trait QuadValue:
    Copy + Debug + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn magnitude(&self) -> f64;

    fn is_finite_value(&self) -> bool;

    /// Scalar carried in an accuracy error: the value itself for reals, the modulus otherwise.
    fn reported(&self) -> f64 {
        self.magnitude()
    }
}

impl QuadValue for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }

    fn reported(&self) -> f64 {
        *self
    }
}

impl QuadValue for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }

    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

// Kronrod abscissae; odd indices are the 10-point Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_400,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Debug, Clone, Copy)]
struct Segment<V> {
    a: f64,
    b: f64,
    value: V,
    err: f64,
    splittable: bool,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

fn gauss_kronrod_21<V, F>(h: &F, a: f64, b: f64) -> Result<Segment<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V + ?Sized,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |t: f64| -> Result<V> {
        let v = h(t);
        if v.is_finite_value() {
            Ok(v)
        } else {
            Err(Error::NonFinite(t))
        }
    };

    let f_center = eval(center)?;
    let mut res_k = f_center * WGK[10];
    let mut res_g = V::default();
    let mut res_abs = f_center.magnitude() * WGK[10];
    let mut fv1 = [V::default(); 10];
    let mut fv2 = [V::default(); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_k = res_k + sum * WGK[j];
        if j % 2 == 1 {
            res_g = res_g + sum * WG[j / 2];
        }
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
    }

    let mean = res_k * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).magnitude();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }

    let err = (res_k - res_g).magnitude() * half.abs();
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let tiny = (b - a).abs() <= 1e3 * f64::EPSILON * a.abs().max(b.abs()).max(f64::MIN_POSITIVE);

    Ok(Segment {
        a,
        b,
        value: res_k * half,
        err: rescale_error(err, res_abs, res_asc),
        splittable: !tiny,
    })
}

/// Integrates `h` over `[a, b]`.
pub fn integrate_adaptive<F>(h: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Parameter(format!(
            "integration interval [{a}, {b}] must be finite with a < b"
        )));
    }
    integrate_partition(&h, &[a, b], cfg)
}

/// Integrates over the union of consecutive intervals of `points`, which must be
/// strictly increasing. The points seed the adaptive partition.
pub fn integrate_partition<V, F>(h: &F, points: &[f64], cfg: &QuadConfig) -> Result<Estimate<V>>
where
    V: QuadValue,
    F: Fn(f64) -> V + ?Sized,
{
    cfg.validate()?;
    if points.len() < 2 {
        return Err(Error::Parameter("a partition needs at least two points".into()));
    }
    if points.windows(2).any(|w| !(w[0] < w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::Parameter(
            "partition points must be finite and strictly increasing".into(),
        ));
    }

    let mut segments: Vec<Segment<V>> = points
        .windows(2)
        .map(|w| gauss_kronrod_21(h, w[0], w[1]))
        .collect::<Result<_>>()?;
    let budget = cfg.max_subdivisions.max(segments.len());

    loop {
        let total = segments.iter().fold(V::default(), |acc, s| acc + s.value);
        let err: f64 = segments.iter().map(|s| s.err).sum();
        let tol = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if err <= tol {
            return Ok(Estimate {
                value: total,
                err_est: err,
                subdivisions: segments.len(),
            });
        }

        // Largest splittable error; ties resolve to the leftmost segment.
        let worst = segments.iter().enumerate().filter(|(_, s)| s.splittable).fold(
            None,
            |best: Option<(usize, f64)>, (i, s)| match best {
                Some((_, e)) if e >= s.err => best,
                _ => Some((i, s.err)),
            },
        );

        let Some((idx, _)) = worst.filter(|_| segments.len() < budget) else {
            return Err(Error::Accuracy {
                value: total.reported(),
                err_est: err,
                subdivisions: segments.len(),
            });
        };

        let seg = segments[idx];
        let mid = 0.5 * (seg.a + seg.b);
        if !(seg.a < mid && mid < seg.b) {
            segments[idx].splittable = false;
            continue;
        }
        let left = gauss_kronrod_21(h, seg.a, mid)?;
        let right = gauss_kronrod_21(h, mid, seg.b)?;
        segments[idx] = left;
        segments.insert(idx + 1, right);
    }
}

/// Partition `lo, first, 2·first, 4·first, …, hi` that grades geometrically
/// toward `lo`. `first` must lie in `(lo, hi]` or equal `lo`.
pub fn geometric_mesh(lo: f64, first: f64, hi: f64) -> Vec<f64> {
    let mut pts = vec![lo];
    let mut p = first;
    while p < hi {
        if p > lo && hi - p > 1e-12 * hi.abs() {
            pts.push(p);
        }
        p *= 2.0;
    }
    pts.push(hi);
    pts
}

/// `∫_{ε ≤ |t| ≤ R} h(t)/t dt`, evaluated through the odd part
/// `∫_ε^R (h(t) − h(−t))/t dt` so the two `O(1/ε)` halves never cancel numerically.
pub fn pv_symmetric<F>(h: F, eps: f64, radius: f64, cfg: &QuadConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    pv_symmetric_with_breaks(h, eps, radius, &[], cfg)
}

/// [`pv_symmetric`] with extra partition points, given as positive distances
/// `|t|` at which `h(t)` or `h(−t)` is not smooth.
pub fn pv_symmetric_with_breaks<F>(h: F, eps: f64, radius: f64, breaks: &[f64], cfg: &QuadConfig) -> Result<Estimate>
where
    F: Fn(f64) -> f64,
{
    if !(eps > 0.0) || !(eps < radius) || !radius.is_finite() {
        return Err(Error::Parameter(format!(
            "principal value needs 0 < eps < R (eps {eps}, R {radius})"
        )));
    }
    let integrand = |t: f64| (h(t) - h(-t)) / t;
    let mesh = insert_breakpoints(geometric_mesh(eps, eps, radius), breaks);
    integrate_partition(&integrand, &mesh, cfg)
}

/// Adds the points of `breaks` that fall strictly inside the span of `mesh`,
/// keeping the result sorted and free of near-duplicates.
pub fn insert_breakpoints(mut mesh: Vec<f64>, breaks: &[f64]) -> Vec<f64> {
    let (lo, hi) = (mesh[0], mesh[mesh.len() - 1]);
    mesh.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    mesh.sort_by(f64::total_cmp);
    let scale = 1e-12 * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
    mesh.dedup_by(|b, a| *b - *a <= scale);
    if mesh[mesh.len() - 1] < hi {
        // Dedup may have absorbed the endpoint into a breakpoint just below it.
        let n = mesh.len();
        mesh[n - 1] = hi;
    }
    mesh
}

/// Decay class of an integrand's tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decay {
    /// `|f(t)| ≤ exp(−(t/width)²)`.
    Gaussian { width: f64 },
    /// `|f(t)| ≤ |t|^{−power}` for `|t| ≥ 1`.
    Rational { power: f64 },
    /// `f(t) = 0` for `|t| > support`.
    Compact { support: f64 },
}

/// Radius `R` beyond which the analytic tail bound of `decay` is below `tol`,
/// plus a unit margin for the evaluation offset.
///
/// Gaussian tails use the pointwise bound `exp(−(R/width)²) < tol`; rational
/// tails use `∫_R^∞ t^{−power} dt = R^{1−power}/(power−1) < tol`.
pub fn tail_radius(decay: Decay, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tail tolerance must be positive, got {tol}")));
    }
    let core = match decay {
        Decay::Gaussian { width } => {
            if !(width > 0.0) {
                return Err(Error::Parameter(format!(
                    "gaussian width must be positive, got {width}"
                )));
            }
            width * (-tol.ln()).max(0.0).sqrt()
        }
        Decay::Rational { power } => {
            if !(power > 1.0) {
                return Err(Error::NonIntegrableTail(power));
            }
            let q = power - 1.0;
            (q * tol).powf(-1.0 / q)
        }
        Decay::Compact { support } => {
            if !(support >= 0.0) {
                return Err(Error::Parameter(format!(
                    "support radius must be non-negative, got {support}"
                )));
            }
            support
        }
    };
    Ok(core + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_on_unit_interval() {
        let r = integrate_adaptive(|t| t, 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((r.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gaussian_over_symmetric_window() {
        let r = integrate_adaptive(|t| (-t * t).exp(), -8.0, 8.0, &QuadConfig::default()).unwrap();
        assert!((r.value - PI.sqrt()).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn lorentzian_to_large_radius() {
        let pts = geometric_mesh(0.0, 1e-3, 1e6);
        let h = |t: f64| 1.0 / (1.0 + t * t);
        let r: Estimate = integrate_partition(&h, &pts, &QuadConfig::default()).unwrap();
        // atan(1e6) = π/2 − 1e−6 to first order.
        assert!((r.value - PI / 2.0).abs() < 1e-6 + 1e-9);
    }

    #[test]
    fn pv_of_even_function_vanishes() {
        let r = pv_symmetric(|_| 1.0, 1e-3, 5.0, &QuadConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
        let r = pv_symmetric(|t: f64| (-t * t).exp(), 1e-6, 8.0, &QuadConfig::default()).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn pv_of_identity() {
        let r = pv_symmetric(|t| t, 0.1, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - 3.8).abs() < 1e-13);
    }

    #[test]
    fn pv_rejects_eps_beyond_radius() {
        assert!(matches!(
            pv_symmetric(|t| t, 2.0, 2.0, &QuadConfig::default()),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn budget_exhaustion_reports_best_estimate() {
        let cfg = QuadConfig::new(1e-14, 1e-300, 3).unwrap();
        let err = integrate_adaptive(|t: f64| t.abs().sqrt(), -1.0, 1.0, &cfg).unwrap_err();
        match err {
            Error::Accuracy { value, .. } => assert!((value - 4.0 / 3.0).abs() < 1e-2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jump_converges_with_bisection() {
        let step = |t: f64| if t >= 0.3 { 1.0 } else { -1.0 };
        let r = integrate_adaptive(step, 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((r.value - 0.4).abs() < 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate_adaptive(
            |t| if t > 0.5 { f64::NAN } else { 1.0 },
            0.0,
            1.0,
            &QuadConfig::default(),
        );
        assert!(matches!(r, Err(Error::NonFinite(_))));
    }

    #[test]
    fn complex_integrand() {
        let h = |t: f64| Complex64::new(t, 1.0);
        let r: Estimate<Complex64> = integrate_partition(&h, &[0.0, 2.0], &QuadConfig::default()).unwrap();
        assert!((r.value - Complex64::new(2.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn tail_radius_cases() {
        assert_eq!(tail_radius(Decay::Compact { support: 3.0 }, 1e-9).unwrap(), 4.0);
        assert!(tail_radius(Decay::Gaussian { width: 1.0 }, 1e-12).unwrap() >= 6.0);
        assert!(tail_radius(Decay::Rational { power: 2.0 }, 1e-6).unwrap() >= 1e6);
        assert!(matches!(
            tail_radius(Decay::Rational { power: 1.0 }, 1e-6),
            Err(Error::NonIntegrableTail(_))
        ));
        assert!(tail_radius(Decay::Gaussian { width: 1.0 }, 0.0).is_err());
    }

    #[test]
    fn mesh_is_increasing_and_closed() {
        let m = geometric_mesh(0.0, 0.01, 8.0);
        assert_eq!(m[0], 0.0);
        assert_eq!(*m.last().unwrap(), 8.0);
        assert!(m.windows(2).all(|w| w[0] < w[1]));
        let m = geometric_mesh(0.5, 0.5, 0.75);
        assert_eq!(m, vec![0.5, 0.75]);
    }
}
