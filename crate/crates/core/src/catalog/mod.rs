//! Test-function corpus: closed-form analytic entries and sampled signals.
//!
//! A [`FunctionSpec`] is plain data (it round-trips through the run-config
//! format); [`make_function`] validates it and returns an evaluable
//! [`Function`]. Metadata methods on the spec report smoothness, `L^p`
//! membership and the points where the p-Lebesgue property fails.

mod grid;

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use grid::GridSignal;

use crate::error::{Error, Result};
use crate::quadrature::{tail_radius, Decay};

/// Anything evaluable pointwise on ℝ.
pub trait RealFn {
    fn eval(&self, x: f64) -> f64;

    /// Points where the function is not smooth, if known.
    fn singular_points(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64> RealFn for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// Highest oscillation frequency (cycles per unit) the quadrature is validated for.
pub const MAX_FREQUENCY: f64 = 16.0;

// max_v |d/dv exp(1 − 1/(1 − v²))|, attained near v ≈ 0.7598.
const BUMP_SLOPE: f64 = 2.170_357_09;

/// Lipschitz constant of `exp(−u²)` in `u`: `√(2/e)`.
const GAUSSIAN_SLOPE: f64 = 0.857_763_884_960_706_8;

/// Lipschitz constant of `1/(1+u²)` in `u`: `3√3/8`.
const LORENTZIAN_SLOPE: f64 = 0.649_519_052_838_329;

fn zero() -> f64 {
    0.0
}

fn one() -> f64 {
    1.0
}

/// Catalog entry. Parameters are named after their role; defaults give the
/// unit-scale, origin-centered member of each family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `exp(−((x − center)/width)²)`.
    Gaussian {
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// `order`-th derivative of the gaussian entry, in closed form.
    GaussianDerivative {
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        order: u32,
    },
    /// `1/(1 + ((x − center)/width)²)`.
    Lorentzian {
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        width: f64,
    },
    /// `exp(1 − 1/(1 − u²))` for `|u| < 1`, `u = (x − center)/support`; zero outside.
    SmoothBump {
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        support: f64,
    },
    /// Gaussian envelope times `cos(2π·frequency·(x − center))`.
    Oscillatory {
        #[serde(default = "zero")]
        center: f64,
        #[serde(default = "one")]
        width: f64,
        frequency: f64,
    },
    /// `+1` for `x ≥ center`, `−1` otherwise (right-continuous representative).
    SignJump {
        #[serde(default = "zero")]
        center: f64,
    },
    /// `|x − center|^exponent`, `exponent ∈ (0, 1]`.
    PowerCusp {
        #[serde(default = "zero")]
        center: f64,
        exponent: f64,
    },
    /// `Σ coefficients[k]·x^k`.
    Polynomial { coefficients: Vec<f64> },
    /// Sampled signal, zero outside the grid.
    Sampled(GridSignal),
    /// Sampled signal read from a two-column CSV file.
    SampledCsv { path: String },
}

/// Regularity class of a catalog entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Smoothness {
    Analytic,
    Lipschitz { constant: f64 },
    Holder { exponent: f64 },
    Discontinuous,
}

/// Exponents at which `L^p` membership is reported.
pub const MEMBERSHIP_EXPONENTS: [f64; 5] = [1.0, 2.0, 4.0, 8.0, f64::INFINITY];

impl FunctionSpec {
    pub fn gaussian(center: f64, width: f64) -> Self {
        FunctionSpec::Gaussian { center, width }
    }

    pub fn constant(value: f64) -> Self {
        FunctionSpec::Constant { value }
    }

    pub fn smooth_bump(center: f64, support: f64) -> Self {
        FunctionSpec::SmoothBump { center, support }
    }

    pub fn lorentzian(center: f64, width: f64) -> Self {
        FunctionSpec::Lorentzian { center, width }
    }

    pub fn sign_jump(center: f64) -> Self {
        FunctionSpec::SignJump { center }
    }

    pub fn smoothness(&self) -> Smoothness {
        match self {
            FunctionSpec::Constant { .. }
            | FunctionSpec::Gaussian { .. }
            | FunctionSpec::GaussianDerivative { .. }
            | FunctionSpec::Lorentzian { .. }
            | FunctionSpec::Oscillatory { .. }
            | FunctionSpec::Polynomial { .. } => Smoothness::Analytic,
            FunctionSpec::SmoothBump { support, .. } => Smoothness::Lipschitz {
                constant: BUMP_SLOPE / support,
            },
            FunctionSpec::SignJump { .. } => Smoothness::Discontinuous,
            FunctionSpec::PowerCusp { exponent, .. } => {
                if *exponent >= 1.0 {
                    Smoothness::Lipschitz { constant: 1.0 }
                } else {
                    Smoothness::Holder { exponent: *exponent }
                }
            }
            FunctionSpec::Sampled(s) => sampled_smoothness(s),
            // Unknown until loaded; make_function refines it.
            FunctionSpec::SampledCsv { .. } => Smoothness::Discontinuous,
        }
    }

    /// Global Lipschitz constant where one exists in closed form.
    pub fn lipschitz_constant(&self) -> Option<f64> {
        match self {
            FunctionSpec::Constant { .. } => Some(0.0),
            FunctionSpec::Gaussian { width, .. } => Some(GAUSSIAN_SLOPE / width),
            FunctionSpec::Lorentzian { width, .. } => Some(LORENTZIAN_SLOPE / width),
            FunctionSpec::Oscillatory { width, frequency, .. } => Some(GAUSSIAN_SLOPE / width + 2.0 * PI * frequency),
            FunctionSpec::Polynomial { coefficients } => match coefficients.len() {
                0 | 1 => Some(0.0),
                2 => Some(coefficients[1].abs()),
                _ if coefficients[2..].iter().all(|c| *c == 0.0) => Some(coefficients[1].abs()),
                _ => None,
            },
            _ => match self.smoothness() {
                Smoothness::Lipschitz { constant } => Some(constant),
                _ => None,
            },
        }
    }

    /// `(p, f ∈ L^p(ℝ))` for each exponent in [`MEMBERSHIP_EXPONENTS`].
    pub fn membership(&self) -> Vec<(f64, bool)> {
        MEMBERSHIP_EXPONENTS.iter().map(|&p| (p, self.in_lp(p))).collect()
    }

    fn in_lp(&self, p: f64) -> bool {
        match self {
            FunctionSpec::Constant { value } => *value == 0.0 || p.is_infinite(),
            FunctionSpec::Gaussian { .. }
            | FunctionSpec::GaussianDerivative { .. }
            | FunctionSpec::Lorentzian { .. }
            | FunctionSpec::SmoothBump { .. }
            | FunctionSpec::Oscillatory { .. }
            | FunctionSpec::Sampled(_)
            | FunctionSpec::SampledCsv { .. } => true,
            FunctionSpec::SignJump { .. } => p.is_infinite(),
            FunctionSpec::PowerCusp { .. } => false,
            FunctionSpec::Polynomial { coefficients } => {
                let degree = coefficients.iter().rposition(|c| *c != 0.0);
                match degree {
                    None => true,
                    Some(0) => p.is_infinite(),
                    Some(_) => false,
                }
            }
        }
    }

    /// Points that fail to be p-Lebesgue points for every finite `p`.
    pub fn known_bad_points(&self) -> Vec<f64> {
        match self {
            FunctionSpec::SignJump { center } => vec![*center],
            FunctionSpec::Sampled(s) => {
                let mut pts = Vec::new();
                if s.samples()[0] != 0.0 {
                    pts.push(s.x0());
                }
                if *s.samples().last().unwrap() != 0.0 {
                    pts.push(s.x_end());
                }
                pts
            }
            _ => Vec::new(),
        }
    }

    /// Points where the function is not smooth; used as quadrature breakpoints.
    pub fn singular_points(&self) -> Vec<f64> {
        match self {
            FunctionSpec::SignJump { center } | FunctionSpec::PowerCusp { center, .. } => {
                vec![*center]
            }
            FunctionSpec::SmoothBump { center, support } => {
                vec![center - support, center + support]
            }
            FunctionSpec::Sampled(s) => vec![s.x0(), s.x_end()],
            _ => Vec::new(),
        }
    }

    /// Whether `x` is flagged as a non-Lebesgue point.
    pub fn is_bad_point(&self, x: f64) -> bool {
        self.known_bad_points().iter().any(|&b| (b - x).abs() <= 1e-12)
    }

    pub fn center(&self) -> f64 {
        match self {
            FunctionSpec::Gaussian { center, .. }
            | FunctionSpec::GaussianDerivative { center, .. }
            | FunctionSpec::Lorentzian { center, .. }
            | FunctionSpec::SmoothBump { center, .. }
            | FunctionSpec::Oscillatory { center, .. }
            | FunctionSpec::SignJump { center }
            | FunctionSpec::PowerCusp { center, .. } => *center,
            FunctionSpec::Sampled(s) => 0.5 * (s.x0() + s.x_end()),
            _ => 0.0,
        }
    }

    /// Tail class around [`center`](Self::center), if the function decays.
    pub fn decay(&self) -> Option<Decay> {
        match self {
            FunctionSpec::Gaussian { width, .. }
            | FunctionSpec::GaussianDerivative { width, .. }
            | FunctionSpec::Oscillatory { width, .. } => Some(Decay::Gaussian { width: *width }),
            FunctionSpec::Lorentzian { .. } => Some(Decay::Rational { power: 2.0 }),
            FunctionSpec::SmoothBump { support, .. } => Some(Decay::Compact { support: *support }),
            FunctionSpec::Sampled(s) => Some(Decay::Compact {
                support: 0.5 * (s.x_end() - s.x0()),
            }),
            FunctionSpec::Constant { value } if *value == 0.0 => Some(Decay::Compact { support: 0.0 }),
            _ => None,
        }
    }

    /// Distance from the center beyond which `|f| < tol` pointwise, or `None`
    /// for non-decaying entries.
    pub fn reach(&self, tol: f64) -> Option<f64> {
        match (self, self.decay()?) {
            (FunctionSpec::Lorentzian { width, .. }, _) => Some(width * tol.powf(-0.5) + 1.0),
            (FunctionSpec::GaussianDerivative { width, order, .. }, _) => {
                // |H_n(u)| ≤ (2|u| + 2n)^n; solve u² − n·ln(2u + 2n) = ln(1/tol) by iteration.
                let target = (-tol.ln()).max(0.0);
                let n = *order as f64;
                let mut u = target.sqrt().max(1.0);
                for _ in 0..50 {
                    u = (target + n * (2.0 * u + 2.0 * n).ln()).sqrt();
                }
                Some(width * u + 1.0)
            }
            (_, decay) => tail_radius(decay, tol).ok(),
        }
    }

    /// Closed-form derivative of the given order.
    pub fn derivative(&self, order: u32) -> Result<FunctionSpec> {
        if order == 0 {
            return Ok(self.clone());
        }
        match self {
            FunctionSpec::Constant { .. } => Ok(FunctionSpec::Constant { value: 0.0 }),
            FunctionSpec::Gaussian { center, width } => Ok(FunctionSpec::GaussianDerivative {
                center: *center,
                width: *width,
                order,
            }),
            FunctionSpec::GaussianDerivative {
                center,
                width,
                order: base,
            } => Ok(FunctionSpec::GaussianDerivative {
                center: *center,
                width: *width,
                order: base + order,
            }),
            FunctionSpec::Polynomial { coefficients } => {
                let mut c = coefficients.clone();
                for _ in 0..order {
                    c = c.iter().enumerate().skip(1).map(|(k, v)| k as f64 * v).collect();
                }
                if c.is_empty() {
                    c.push(0.0);
                }
                Ok(FunctionSpec::Polynomial { coefficients: c })
            }
            other => Err(Error::Parameter(format!(
                "no closed-form derivative available for {other}"
            ))),
        }
    }
}

fn sampled_smoothness(s: &GridSignal) -> Smoothness {
    let samples = s.samples();
    if samples[0] != 0.0 || samples[samples.len() - 1] != 0.0 {
        Smoothness::Discontinuous
    } else {
        Smoothness::Lipschitz {
            constant: s.interpolant_lipschitz(),
        }
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Constant { value } => write!(f, "constant({})", fmt_num(*value)),
            FunctionSpec::Gaussian { center, width } => {
                write!(f, "gaussian(c={};w={})", fmt_num(*center), fmt_num(*width))
            }
            FunctionSpec::GaussianDerivative { center, width, order } => write!(
                f,
                "gaussian_derivative(c={};w={};n={order})",
                fmt_num(*center),
                fmt_num(*width)
            ),
            FunctionSpec::Lorentzian { center, width } => {
                write!(f, "lorentzian(c={};w={})", fmt_num(*center), fmt_num(*width))
            }
            FunctionSpec::SmoothBump { center, support } => {
                write!(f, "smooth_bump(c={};s={})", fmt_num(*center), fmt_num(*support))
            }
            FunctionSpec::Oscillatory {
                center,
                width,
                frequency,
            } => write!(
                f,
                "oscillatory(c={};w={};nu={})",
                fmt_num(*center),
                fmt_num(*width),
                fmt_num(*frequency)
            ),
            FunctionSpec::SignJump { center } => write!(f, "sign_jump(c={})", fmt_num(*center)),
            FunctionSpec::PowerCusp { center, exponent } => {
                write!(f, "power_cusp(c={};beta={})", fmt_num(*center), fmt_num(*exponent))
            }
            FunctionSpec::Polynomial { coefficients } => {
                let c: Vec<String> = coefficients.iter().map(|v| fmt_num(*v)).collect();
                write!(f, "polynomial({})", c.join(";"))
            }
            FunctionSpec::Sampled(s) => write!(
                f,
                "sampled(n={};x0={};dx={})",
                s.samples().len(),
                fmt_num(s.x0()),
                fmt_num(s.dx())
            ),
            FunctionSpec::SampledCsv { path } => write!(f, "sampled_csv({path})"),
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Constant(f64),
    Gaussian { center: f64, width: f64 },
    GaussianDerivative { center: f64, width: f64, order: u32 },
    Lorentzian { center: f64, width: f64 },
    Bump { center: f64, support: f64 },
    Oscillatory { center: f64, width: f64, omega: f64 },
    SignJump(f64),
    Cusp { center: f64, exponent: f64 },
    Polynomial(Vec<f64>),
    Sampled(GridSignal),
}

/// A validated, evaluable catalog entry.
#[derive(Debug, Clone)]
pub struct Function {
    spec: FunctionSpec,
    repr: Repr,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parameter(format!("{name} must be finite, got {v}")))
    }
}

/// Validates `spec` and returns its evaluable form.
pub fn make_function(spec: &FunctionSpec) -> Result<Function> {
    let repr = match spec {
        FunctionSpec::Constant { value } => Repr::Constant(finite("value", *value)?),
        FunctionSpec::Gaussian { center, width } => Repr::Gaussian {
            center: finite("center", *center)?,
            width: positive("width", *width)?,
        },
        FunctionSpec::GaussianDerivative { center, width, order } => Repr::GaussianDerivative {
            center: finite("center", *center)?,
            width: positive("width", *width)?,
            order: *order,
        },
        FunctionSpec::Lorentzian { center, width } => Repr::Lorentzian {
            center: finite("center", *center)?,
            width: positive("width", *width)?,
        },
        FunctionSpec::SmoothBump { center, support } => Repr::Bump {
            center: finite("center", *center)?,
            support: positive("support", *support)?,
        },
        FunctionSpec::Oscillatory {
            center,
            width,
            frequency,
        } => {
            if !(*frequency >= 0.0 && *frequency <= MAX_FREQUENCY) {
                return Err(Error::Parameter(format!(
                    "frequency must lie in [0, {MAX_FREQUENCY}], got {frequency}"
                )));
            }
            Repr::Oscillatory {
                center: finite("center", *center)?,
                width: positive("width", *width)?,
                omega: 2.0 * PI * frequency,
            }
        }
        FunctionSpec::SignJump { center } => Repr::SignJump(finite("center", *center)?),
        FunctionSpec::PowerCusp { center, exponent } => {
            if !(*exponent > 0.0 && *exponent <= 1.0) {
                return Err(Error::Parameter(format!(
                    "cusp exponent must lie in (0, 1], got {exponent}"
                )));
            }
            Repr::Cusp {
                center: finite("center", *center)?,
                exponent: *exponent,
            }
        }
        FunctionSpec::Polynomial { coefficients } => {
            if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
                return Err(Error::Parameter(
                    "polynomial needs at least one finite coefficient".into(),
                ));
            }
            Repr::Polynomial(coefficients.clone())
        }
        FunctionSpec::Sampled(s) => {
            s.validate()?;
            Repr::Sampled(s.clone())
        }
        FunctionSpec::SampledCsv { path } => {
            let signal = GridSignal::from_csv_path(path)?;
            return Ok(Function {
                spec: FunctionSpec::Sampled(signal.clone()),
                repr: Repr::Sampled(signal),
            });
        }
    };
    Ok(Function {
        spec: spec.clone(),
        repr,
    })
}

fn hermite(n: u32, u: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * u);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * u * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

impl Function {
    /// The spec this function was built from (a loaded CSV reports as `Sampled`).
    pub fn spec(&self) -> &FunctionSpec {
        &self.spec
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.repr {
            Repr::Constant(c) => *c,
            Repr::Gaussian { center, width } => {
                let u = (x - center) / width;
                (-u * u).exp()
            }
            Repr::GaussianDerivative { center, width, order } => {
                let u = (x - center) / width;
                let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
                sign * hermite(*order, u) * (-u * u).exp() / width.powi(*order as i32)
            }
            Repr::Lorentzian { center, width } => {
                let u = (x - center) / width;
                1.0 / (1.0 + u * u)
            }
            Repr::Bump { center, support } => {
                let u = (x - center) / support;
                let q = 1.0 - u * u;
                if q > 0.0 {
                    (1.0 - 1.0 / q).exp()
                } else {
                    0.0
                }
            }
            Repr::Oscillatory { center, width, omega } => {
                let u = (x - center) / width;
                (-u * u).exp() * (omega * (x - center)).cos()
            }
            Repr::SignJump(c) => {
                if x >= *c {
                    1.0
                } else {
                    -1.0
                }
            }
            Repr::Cusp { center, exponent } => (x - center).abs().powf(*exponent),
            Repr::Polynomial(c) => c.iter().rev().fold(0.0, |acc, v| acc * x + v),
            Repr::Sampled(s) => s.eval_extended(x),
        }
    }
}

impl RealFn for Function {
    fn eval(&self, x: f64) -> f64 {
        Function::eval(self, x)
    }

    fn singular_points(&self) -> Vec<f64> {
        self.spec.singular_points()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(spec: FunctionSpec) -> Function {
        make_function(&spec).unwrap()
    }

    #[test]
    fn trivial_values() {
        assert_eq!(f(FunctionSpec::gaussian(0.0, 1.0)).eval(0.0), 1.0);
        assert_eq!(f(FunctionSpec::sign_jump(0.0)).eval(0.0), 1.0);
        assert_eq!(f(FunctionSpec::sign_jump(0.0)).eval(-1e-300), -1.0);
        let cusp = f(FunctionSpec::PowerCusp {
            center: 0.0,
            exponent: 0.5,
        });
        assert_eq!(cusp.eval(4.0), 2.0);
        let poly = f(FunctionSpec::Polynomial {
            coefficients: vec![1.0, 0.0, 2.0],
        });
        assert_eq!(poly.eval(3.0), 19.0);
        assert_eq!(f(FunctionSpec::smooth_bump(0.0, 3.0)).eval(0.0), 1.0);
        assert_eq!(f(FunctionSpec::smooth_bump(0.0, 3.0)).eval(3.0), 0.0);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(make_function(&FunctionSpec::gaussian(0.0, 0.0)).is_err());
        assert!(make_function(&FunctionSpec::smooth_bump(0.0, -1.0)).is_err());
        assert!(make_function(&FunctionSpec::PowerCusp {
            center: 0.0,
            exponent: 1.5
        })
        .is_err());
        assert!(make_function(&FunctionSpec::Oscillatory {
            center: 0.0,
            width: 1.0,
            frequency: 20.0
        })
        .is_err());
        assert!(make_function(&FunctionSpec::Polynomial { coefficients: vec![] }).is_err());
    }

    #[test]
    fn membership_matches_kind() {
        let constant = FunctionSpec::constant(2.0).membership();
        assert!(constant.iter().all(|&(p, m)| m == p.is_infinite()));
        assert!(FunctionSpec::gaussian(0.0, 1.0).membership().iter().all(|&(_, m)| m));
        assert!(FunctionSpec::constant(0.0).membership().iter().all(|&(_, m)| m));
        let cusp = FunctionSpec::PowerCusp {
            center: 0.0,
            exponent: 0.5,
        };
        assert!(cusp.membership().iter().all(|&(_, m)| !m));
    }

    #[test]
    fn bad_points() {
        assert_eq!(FunctionSpec::sign_jump(0.5).known_bad_points(), vec![0.5]);
        assert!(FunctionSpec::gaussian(0.0, 1.0).known_bad_points().is_empty());
        let cusp = FunctionSpec::PowerCusp {
            center: 0.0,
            exponent: 0.5,
        };
        assert!(!cusp.is_bad_point(0.0));
    }

    #[test]
    fn gaussian_derivatives_match_finite_differences() {
        let g = f(FunctionSpec::gaussian(0.3, 1.3));
        for order in 1..=3u32 {
            let d = f(FunctionSpec::gaussian(0.3, 1.3).derivative(order).unwrap());
            let lower = f(FunctionSpec::gaussian(0.3, 1.3).derivative(order - 1).unwrap());
            let h = 1e-5;
            for &x in &[-1.0, 0.1, 0.7, 2.0] {
                let fd = (lower.eval(x + h) - lower.eval(x - h)) / (2.0 * h);
                assert!((fd - d.eval(x)).abs() < 1e-8, "order {order} at {x}");
            }
        }
        assert_eq!(g.eval(0.3), 1.0);
    }

    #[test]
    fn polynomial_derivative() {
        let p = FunctionSpec::Polynomial {
            coefficients: vec![1.0, 2.0, 3.0],
        };
        assert_eq!(
            p.derivative(1).unwrap(),
            FunctionSpec::Polynomial {
                coefficients: vec![2.0, 6.0]
            }
        );
        assert_eq!(
            p.derivative(3).unwrap(),
            FunctionSpec::Polynomial {
                coefficients: vec![0.0]
            }
        );
        assert!(FunctionSpec::sign_jump(0.0).derivative(1).is_err());
    }

    #[test]
    fn reach_bounds_the_tail() {
        let tol = 1e-12;
        for spec in [
            FunctionSpec::gaussian(0.5, 1.5),
            FunctionSpec::lorentzian(-1.0, 2.0),
            FunctionSpec::smooth_bump(0.2, 2.0),
            FunctionSpec::Oscillatory {
                center: 0.0,
                width: 1.0,
                frequency: 3.0,
            },
            FunctionSpec::GaussianDerivative {
                center: 0.0,
                width: 1.0,
                order: 2,
            },
        ] {
            let r = spec.reach(tol).unwrap();
            let func = f(spec.clone());
            for k in 0..50 {
                let d = r * (1.0 + k as f64 * 0.1);
                assert!(func.eval(spec.center() + d).abs() < tol, "{spec} at {d}");
                assert!(func.eval(spec.center() - d).abs() < tol, "{spec} at -{d}");
            }
        }
        assert!(FunctionSpec::constant(1.0).reach(tol).is_none());
    }

    #[test]
    fn config_round_trip() {
        let spec = FunctionSpec::Oscillatory {
            center: 0.0,
            width: 1.0,
            frequency: 2.0,
        };
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<FunctionSpec>(&text).unwrap(), spec);
        let parsed: FunctionSpec = serde_json::from_str(r#"{"kind":"gaussian"}"#).unwrap();
        assert_eq!(parsed, FunctionSpec::gaussian(0.0, 1.0));
    }

    fn lipschitz_specs() -> Vec<FunctionSpec> {
        vec![
            FunctionSpec::gaussian(0.2, 0.7),
            FunctionSpec::lorentzian(0.0, 0.5),
            FunctionSpec::smooth_bump(0.0, 1.5),
            FunctionSpec::Oscillatory {
                center: 0.0,
                width: 1.0,
                frequency: 2.0,
            },
            FunctionSpec::constant(3.0),
            FunctionSpec::PowerCusp {
                center: 0.0,
                exponent: 1.0,
            },
            FunctionSpec::Polynomial {
                coefficients: vec![1.0, -2.0],
            },
            FunctionSpec::Sampled(GridSignal::new(vec![0.0, 0.5, 1.0, 0.25, -0.5, 0.0], -1.0, 0.4).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn catalog_lipschitz_claims_hold(x in -4.0f64..4.0, y in -4.0f64..4.0) {
            for spec in lipschitz_specs() {
                let l = spec.lipschitz_constant().unwrap();
                let func = f(spec.clone());
                let diff = (func.eval(x) - func.eval(y)).abs();
                prop_assert!(diff <= l * (x - y).abs() + 1e-12, "{} fails at ({}, {})", spec, x, y);
            }
        }
    }
}
