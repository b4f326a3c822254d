//! Approximate-identity kernels `φ`, their dilations `φ_ε(t) = φ(t/ε)/ε` and
//! radial decreasing majorants `ψ(x) = sup_{|t| ≥ |x|} |φ(t)|`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::catalog::GridSignal;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_partition, QuadConfig};

/// Symmetry of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Odd,
    Even,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// `t/(t²+1) − 1/t` for `|t| ≥ 1`, `t/(t²+1)` for `|t| < 1`.
    Lemma6,
    /// `1/(π(1+t²))`.
    Poisson,
    /// Tabulated `φ`, zero outside the table.
    CustomTable(GridSignal),
}

/// A kernel together with its total integral `∫φ` and parity tag.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    kind: KernelKind,
    integral: f64,
    parity: Parity,
}

/// The odd kernel whose dilation turns the truncated Hilbert kernel into the
/// regularized one: `φ_ε(t) = t/(t²+ε²) − 𝟙{|t|≥ε}/t`. `φ(0) = 0` by continuity.
pub fn lemma6_phi(t: f64) -> f64 {
    let inner = t / (t * t + 1.0);
    if t.abs() >= 1.0 {
        inner - 1.0 / t
    } else {
        inner
    }
}

fn lemma6_psi(x: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 {
        0.5
    } else {
        1.0 / (a * (a * a + 1.0))
    }
}

fn poisson_phi(t: f64) -> f64 {
    1.0 / (PI * (1.0 + t * t))
}

impl KernelSpec {
    pub fn lemma6() -> Self {
        KernelSpec {
            kind: KernelKind::Lemma6,
            integral: 0.0,
            parity: Parity::Odd,
        }
    }

    pub fn poisson() -> Self {
        KernelSpec {
            kind: KernelKind::Poisson,
            integral: 1.0,
            parity: Parity::Even,
        }
    }

    /// Tabulated kernel; `∫φ` is computed once by quadrature over the table.
    pub fn custom_table(table: GridSignal) -> Result<Self> {
        table.validate()?;
        let phi = |t: f64| table.eval_extended(t);
        let pts = table_breakpoints(&table);
        let integral = integrate_partition(&phi, &pts, &QuadConfig::default())?.value;
        let parity = detect_parity(&table);
        Ok(KernelSpec {
            kind: KernelKind::CustomTable(table),
            integral,
            parity,
        })
    }

    pub fn from_kind(kind: KernelKind) -> Result<Self> {
        match kind {
            KernelKind::Lemma6 => Ok(Self::lemma6()),
            KernelKind::Poisson => Ok(Self::poisson()),
            KernelKind::CustomTable(t) => Self::custom_table(t),
        }
    }

    pub fn kind(&self) -> &KernelKind {
        &self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            KernelKind::Lemma6 => "lemma6",
            KernelKind::Poisson => "poisson",
            KernelKind::CustomTable(_) => "custom_table",
        }
    }

    /// `∫_ℝ φ`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn phi(&self, t: f64) -> f64 {
        match &self.kind {
            KernelKind::Lemma6 => lemma6_phi(t),
            KernelKind::Poisson => poisson_phi(t),
            KernelKind::CustomTable(table) => table.eval_extended(t),
        }
    }

    /// `φ_ε(t) = φ(t/ε)/ε`, written in closed form where one exists.
    pub fn phi_scaled(&self, t: f64, eps: f64) -> f64 {
        match &self.kind {
            KernelKind::Lemma6 => {
                let inner = t / (t * t + eps * eps);
                if t.abs() >= eps {
                    -eps * eps / (t * (t * t + eps * eps))
                } else {
                    inner
                }
            }
            KernelKind::Poisson => eps / (PI * (t * t + eps * eps)),
            KernelKind::CustomTable(table) => table.eval_extended(t / eps) / eps,
        }
    }

    /// Radial decreasing majorant `ψ(x)`.
    pub fn psi(&self, x: f64) -> Result<f64> {
        match &self.kind {
            KernelKind::Lemma6 => Ok(lemma6_psi(x)),
            KernelKind::Poisson => Ok(poisson_phi(x)),
            KernelKind::CustomTable(_) => numeric_majorant(|t| self.phi(t), x),
        }
    }

    /// Points (in units of `t/ε`, positive) where `φ` is not smooth.
    pub(crate) fn kinks(&self) -> Vec<f64> {
        match &self.kind {
            KernelKind::Lemma6 => vec![1.0],
            KernelKind::Poisson => Vec::new(),
            KernelKind::CustomTable(table) => {
                let mut k: Vec<f64> = [table.x0(), table.x_end()]
                    .iter()
                    .map(|v| v.abs())
                    .filter(|v| *v > 0.0)
                    .collect();
                k.sort_by(f64::total_cmp);
                k.dedup();
                k
            }
        }
    }

    /// `(∫_R^∞ φ_ε, ∫_{−∞}^{−R} φ_ε)` for `R > 0`.
    pub fn tail_masses(&self, eps: f64, radius: f64) -> Result<(f64, f64)> {
        match &self.kind {
            KernelKind::Poisson => {
                let m = (eps / radius).atan() / PI;
                Ok((m, m))
            }
            KernelKind::Lemma6 => {
                let outer = |r: f64| -0.5 * (eps * eps / (r * r)).ln_1p();
                let m = if radius >= eps {
                    outer(radius)
                } else {
                    // ∫_R^ε t/(t²+ε²) dt plus the outer branch from ε.
                    0.5 * (2.0 * eps * eps / (radius * radius + eps * eps)).ln() + outer(eps)
                };
                Ok((m, -m))
            }
            KernelKind::CustomTable(table) => {
                let phi = |u: f64| table.eval_extended(u);
                let u = radius / eps;
                let cfg = QuadConfig::default();
                let plus = if u < table.x_end() {
                    integrate_partition(&phi, &[u.max(table.x0()), table.x_end()], &cfg)?.value
                } else {
                    0.0
                };
                let minus = if -u > table.x0() {
                    integrate_partition(&phi, &[table.x0(), (-u).min(table.x_end())], &cfg)?.value
                } else {
                    0.0
                };
                Ok((plus, minus))
            }
        }
    }

    /// Checks the majorant against `|φ|` on a log-spaced validation grid:
    /// `ψ` even, non-increasing in `|x|`, and `ψ(x) ≥ |φ(t)|` whenever `|t| ≥ |x|`.
    pub fn validate(&self) -> Result<()> {
        let expected = match self.kind {
            KernelKind::Lemma6 => Some((0.0, Parity::Odd)),
            KernelKind::Poisson => Some((1.0, Parity::Even)),
            KernelKind::CustomTable(_) => None,
        };
        if let Some((a, parity)) = expected {
            if self.integral != a || self.parity != parity {
                return Err(Error::Parameter(format!(
                    "{} kernel must have integral {a} and {parity:?} parity",
                    self.name()
                )));
            }
        }

        let mut grid = vec![0.0];
        grid.extend((0..=72).map(|k| 10f64.powf(-3.0 + k as f64 / 12.0)));
        let psi: Vec<f64> = grid.iter().map(|&x| self.psi(x)).collect::<Result<_>>()?;
        let slack = match self.kind {
            KernelKind::CustomTable(_) => 1e-6 * psi[0],
            _ => 1e-15,
        };
        for (i, &x) in grid.iter().enumerate() {
            if (self.psi(-x)? - psi[i]).abs() > slack {
                return Err(Error::Parameter(format!("majorant is not even at {x}")));
            }
            if i > 0 && psi[i] > psi[i - 1] + slack {
                return Err(Error::Parameter(format!("majorant increases at {x}")));
            }
            for &t in &grid[i..] {
                let m = self.phi(t).abs().max(self.phi(-t).abs());
                if m > psi[i] + slack {
                    return Err(Error::Parameter(format!(
                        "majorant {} at {x} is below |φ({t})| = {m}",
                        psi[i]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `ψ(x)` for the given kernel.
pub fn majorant_psi(k: &KernelSpec, x: f64) -> Result<f64> {
    k.psi(x)
}

fn table_breakpoints(table: &GridSignal) -> Vec<f64> {
    vec![table.x0(), table.x_end()]
}

fn detect_parity(table: &GridSignal) -> Parity {
    let probes: Vec<f64> = (0..=64)
        .map(|k| k as f64 / 64.0 * table.x0().abs().max(table.x_end().abs()))
        .collect();
    let tol = 1e-12 * table.samples().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let even = probes
        .iter()
        .all(|&t| (table.eval_extended(t) - table.eval_extended(-t)).abs() <= tol);
    let odd = probes
        .iter()
        .all(|&t| (table.eval_extended(t) + table.eval_extended(-t)).abs() <= tol);
    match (even, odd) {
        (true, false) => Parity::Even,
        (false, true) => Parity::Odd,
        _ => Parity::None,
    }
}

/// Numeric `sup_{|t| ≥ |x|} |φ(t)|` over a log-spaced grid with golden-section
/// refinement around the best grid point.
///
/// Fails when `|t·φ(t)|` does not fall below 1e-3 by `|t| = 10⁶`, since the
/// majorant then cannot be integrable.
pub fn numeric_majorant<F: Fn(f64) -> f64>(phi: F, x: f64) -> Result<f64> {
    let mag = |t: f64| phi(t).abs().max(phi(-t).abs());
    let far = [1e6, 1e7, 1e8].iter().map(|&t| t * mag(t)).fold(0.0, f64::max);
    if !(far < 1e-3) {
        return Err(Error::MajorantNotIntegrable(format!("|t·φ(t)| = {far:e} at |t| ≥ 1e6")));
    }

    let t0 = x.abs();
    let mut grid = vec![t0];
    let mut step = 1e-6;
    while t0 + step < 1e8 {
        grid.push(t0 + step);
        step *= 1.02;
    }
    let (best_i, best) =
        grid.iter().map(|&t| mag(t)).enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
        );

    let lo = grid[best_i.saturating_sub(1)];
    let hi = grid[(best_i + 1).min(grid.len() - 1)];
    Ok(best.max(golden_max(&mag, lo, hi)))
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lemma6_branch_values() {
        assert!((lemma6_phi(0.5) - 0.4).abs() < 1e-15);
        assert!((lemma6_phi(2.0) + 0.1).abs() < 1e-15);
        assert_eq!(lemma6_phi(0.0), 0.0);
    }

    #[test]
    fn lemma6_majorant_values() {
        let k = KernelSpec::lemma6();
        assert_eq!(k.psi(0.0).unwrap(), 0.5);
        assert!((k.psi(2.0).unwrap() - 0.1).abs() < 1e-15);
        assert!((k.psi(-2.0).unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn builtin_kernels_validate() {
        KernelSpec::lemma6().validate().unwrap();
        KernelSpec::poisson().validate().unwrap();
    }

    #[test]
    fn numeric_majorant_agrees_with_closed_form() {
        for &x in &[0.0, 0.3, 1.0, 1.7, 4.0, 25.0] {
            let m = numeric_majorant(lemma6_phi, x).unwrap();
            assert!((m - lemma6_psi(x)).abs() < 1e-9 * lemma6_psi(x), "x = {x}: {m}");
        }
    }

    #[test]
    fn non_decaying_kernel_is_rejected() {
        let r = numeric_majorant(|t: f64| 1.0 / (1.0 + t.abs()).sqrt(), 0.0);
        assert!(matches!(r, Err(Error::MajorantNotIntegrable(_))));
    }

    #[test]
    fn scaled_lemma6_matches_definition() {
        for &(t, eps) in &[(0.3, 0.5), (2.0, 0.1), (-0.05, 0.01), (-3.0, 0.7)] {
            let direct = lemma6_phi(t / eps) / eps;
            let k = KernelSpec::lemma6();
            assert!((k.phi_scaled(t, eps) - direct).abs() < 1e-12 * direct.abs().max(1.0));
        }
    }

    #[test]
    fn tail_masses_match_quadrature() {
        let cfg = QuadConfig::tight();
        for k in [KernelSpec::lemma6(), KernelSpec::poisson()] {
            for &(eps, r) in &[(0.1, 3.0), (0.01, 0.5), (0.5, 0.2)] {
                let (plus, minus) = k.tail_masses(eps, r).unwrap();
                let f = |s: f64| {
                    // t = r / s maps (0, 1] onto [r, ∞).
                    let t = r / s;
                    k.phi_scaled(t, eps) * r / (s * s)
                };
                let mut pts = vec![1e-12, 1e-3, 1e-2, 0.1, 1.0];
                if eps > r {
                    pts.insert(4, r / eps);
                }
                let q = integrate_partition(&f, &pts, &cfg).unwrap().value;
                assert!((plus - q).abs() < 1e-10, "{} eps {eps} r {r}: {plus} vs {q}", k.name());
                let expected_minus = match k.parity() {
                    Parity::Odd => -plus,
                    _ => plus,
                };
                assert_eq!(minus, expected_minus);
            }
        }
    }

    #[test]
    fn custom_table_kernel() {
        // Hat function on [-1, 1]: integral 1, even.
        let n = 41;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = -1.0 + i as f64 * 0.05;
                1.0 - t.abs()
            })
            .collect();
        let k = KernelSpec::custom_table(GridSignal::with_order(samples, -1.0, 0.05, 1).unwrap()).unwrap();
        assert!((k.integral() - 1.0).abs() < 1e-9);
        assert_eq!(k.parity(), Parity::Even);
        assert!((k.psi(0.5).unwrap() - 0.5).abs() < 1e-6);
        k.validate().unwrap();
        let (p, m) = k.tail_masses(0.5, 0.25).unwrap();
        assert!((p - 0.125).abs() < 1e-9 && (m - 0.125).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn lemma6_is_odd(t in -50.0f64..50.0) {
            prop_assert_eq!(lemma6_phi(-t), -lemma6_phi(t));
        }

        #[test]
        fn regularized_kernel_identity(t in -10.0f64..10.0, eps in 1e-4f64..1.0) {
            // t/(t²+ε²) − iε/(t²+ε²) = 1/(t+iε)
            let z = num_complex::Complex64::new(t, eps).inv();
            let d = t * t + eps * eps;
            prop_assert!((z.re - t / d).abs() <= 1e-12 * z.norm());
            prop_assert!((z.im + eps / d).abs() <= 1e-12 * z.norm());
        }
    }
}
