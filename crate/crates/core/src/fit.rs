//! Rate fitting and ε → 0 extrapolation over a ladder of sample points.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitudes below this are treated as numerically zero (already converged).
pub const ZERO_FLOOR: f64 = 1e-15;

/// Relative misfit tolerated regardless of the step sizes, covering the
/// rounding of the fit itself.
pub const MISFIT_FLOOR: f64 = 1e-12;

/// Least-squares line through `(ln ε, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Points dropped because their value was below [`ZERO_FLOOR`].
    pub excluded: usize,
}

/// Fits `ln value = intercept + slope·ln ε`.
///
/// Values must be non-negative; those under [`ZERO_FLOOR`] are excluded. Fewer
/// than three usable points is a degenerate fit.
pub fn fit_rate(ladder: &[f64], values: &[f64]) -> Result<RateFit> {
    if ladder.len() != values.len() {
        return Err(Error::Parameter(format!(
            "ladder has {} points but {} values were given",
            ladder.len(),
            values.len()
        )));
    }
    if ladder.len() < 4 {
        return Err(Error::Parameter(format!(
            "rate fit needs at least 4 points, got {}",
            ladder.len()
        )));
    }
    if ladder.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::Parameter("ladder entries must be positive".into()));
    }
    if values.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::Parameter("rate fit expects non-negative magnitudes".into()));
    }

    let pts: Vec<(f64, f64)> = ladder
        .iter()
        .zip(values)
        .filter(|(_, v)| **v >= ZERO_FLOOR)
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    let excluded = ladder.len() - pts.len();
    if pts.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "{excluded} of {} values below the zero floor",
            ladder.len()
        )));
    }

    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("ladder has no spread".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy <= 1e-300 {
        1.0
    } else {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept,
        r_squared,
        excluded,
    })
}

/// Extrapolation model for ε-sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationModel {
    /// `a₀ + a₁ε + a₂ε²`.
    #[default]
    LinearQuadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub limit: f64,
    pub coefficients: [f64; 3],
    /// `value − model` at each ladder point.
    pub residuals: Vec<f64>,
    pub misfit: f64,
    pub reliable: bool,
}

/// Least-squares fit of `a₀ + a₁ε + a₂ε²`; the limit is `a₀`.
///
/// Rows are weighted by `1/ε²` so the fit is driven by the small-ε end of the
/// ladder, where the truncated cubic and higher terms are negligible. The fit
/// is flagged unreliable when the largest residual exceeds ten times the median
/// step between consecutive values (and [`MISFIT_FLOOR`] relative to the data).
pub fn extrapolate(ladder: &[f64], values: &[f64], model: ExtrapolationModel) -> Result<Extrapolation> {
    let ExtrapolationModel::LinearQuadratic = model;
    if ladder.len() != values.len() {
        return Err(Error::Parameter(format!(
            "ladder has {} points but {} values were given",
            ladder.len(),
            values.len()
        )));
    }
    if ladder.len() < 5 {
        return Err(Error::Parameter(format!(
            "extrapolation needs at least 5 points, got {}",
            ladder.len()
        )));
    }
    if ladder.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
        return Err(Error::Parameter("ladder entries must be positive and finite".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("values must be finite".into()));
    }

    let scale = ladder.iter().cloned().fold(0.0, f64::max);
    let n = ladder.len();
    let mut a = DMatrix::from_fn(n, 3, |i, j| {
        let u = ladder[i] / scale;
        u.powi(j as i32) / (u * u)
    });
    // The weighted columns differ in size by orders of magnitude; equilibrate
    // them so the solve is not limited by their ratio.
    let col_scale: Vec<f64> = a.column_iter().map(|col| 1.0 / col.norm()).collect();
    for (j, s) in col_scale.iter().enumerate() {
        a.column_mut(j).scale_mut(*s);
    }
    let svd = a.svd(true, true);
    let weighted_residual = |c: &DVector<f64>| {
        DVector::from_fn(n, |i, _| {
            let u = ladder[i] / scale;
            (values[i] - (c[0] + c[1] * u + c[2] * u * u)) / (u * u)
        })
    };
    // A couple of refinement rounds clean up the remaining rounding.
    let mut c = DVector::zeros(3);
    for _ in 0..3 {
        let dc = svd
            .solve(&weighted_residual(&c), 1e-15)
            .map_err(|e| Error::DegenerateFit(e.to_string()))?;
        c += DVector::from_fn(3, |j, _| dc[j] * col_scale[j]);
    }
    let coefficients = [c[0], c[1] / scale, c[2] / (scale * scale)];

    let residuals: Vec<f64> = ladder
        .iter()
        .zip(values)
        .map(|(e, v)| v - (coefficients[0] + coefficients[1] * e + coefficients[2] * e * e))
        .collect();
    let misfit = residuals.iter().fold(0.0, |m: f64, r| m.max(r.abs()));
    let steps: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let size = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let reliable = coefficients.iter().all(|c| c.is_finite()) && misfit_acceptable(misfit, steps, size);

    Ok(Extrapolation {
        limit: coefficients[0],
        coefficients,
        residuals,
        misfit,
        reliable,
    })
}

/// `misfit ≤ max(10 × median step, MISFIT_FLOOR · max(1, size))`, where `size`
/// is the largest magnitude in the sequence.
pub fn misfit_acceptable(misfit: f64, mut steps: Vec<f64>, size: f64) -> bool {
    steps.sort_by(f64::total_cmp);
    let n = steps.len();
    let median = match n {
        0 => 0.0,
        _ if n % 2 == 1 => steps[n / 2],
        _ => 0.5 * (steps[n / 2 - 1] + steps[n / 2]),
    };
    misfit <= (10.0 * median).max(MISFIT_FLOOR * size.max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ladder() -> Vec<f64> {
        (0..10).map(|k| 0.1 * 0.5f64.powi(k)).collect()
    }

    #[test]
    fn slope_of_powers() {
        let e = ladder();
        let lin = fit_rate(&e, &e).unwrap();
        assert!((lin.slope - 1.0).abs() < 1e-12);
        assert!((lin.r_squared - 1.0).abs() < 1e-12);
        let sq: Vec<f64> = e.iter().map(|x| x * x).collect();
        assert!((fit_rate(&e, &sq).unwrap().slope - 2.0).abs() < 1e-12);
        let flat = vec![0.7; e.len()];
        let f = fit_rate(&e, &flat).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn zeros_are_excluded_then_degenerate() {
        let e = ladder();
        let mut v: Vec<f64> = e.clone();
        v[9] = 0.0;
        let f = fit_rate(&e, &v).unwrap();
        assert_eq!(f.excluded, 1);
        assert!((f.slope - 1.0).abs() < 1e-12);
        assert!(matches!(fit_rate(&e, &[0.0; 10]), Err(Error::DegenerateFit(_))));
        assert!(fit_rate(&e[..3], &e[..3]).is_err());
    }

    #[test]
    fn exact_models_extrapolate_exactly() {
        let e = ladder();
        let v: Vec<f64> = e.iter().map(|x| 3.0 + 2.0 * x).collect();
        let x = extrapolate(&e, &v, ExtrapolationModel::LinearQuadratic).unwrap();
        assert!((x.limit - 3.0).abs() < 1e-13, "{}", x.limit);
        let v: Vec<f64> = e.iter().map(|x| 3.0 + x + 5.0 * x * x).collect();
        let x = extrapolate(&e, &v, ExtrapolationModel::LinearQuadratic).unwrap();
        assert!((x.limit - 3.0).abs() < 1e-12);
        assert!(x.reliable);
        assert!(x.misfit < 1e-12, "{}", x.misfit);
    }

    #[test]
    fn constant_sequence_is_reliable() {
        let e = ladder();
        let x = extrapolate(&e, &[0.0; 10], ExtrapolationModel::LinearQuadratic).unwrap();
        assert_eq!(x.limit, 0.0);
        assert!(x.reliable);
    }

    #[test]
    fn oscillating_sequence_is_flagged() {
        let e = ladder();
        let v: Vec<f64> = (0..10).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let x = extrapolate(&e, &v, ExtrapolationModel::LinearQuadratic).unwrap();
        assert!(!x.reliable);
    }

    #[test]
    fn short_ladder_is_rejected() {
        let e = ladder();
        assert!(extrapolate(&e[..4], &e[..4], ExtrapolationModel::LinearQuadratic).is_err());
    }

    proptest! {
        #[test]
        fn quadratic_data_recovers_constant(a0 in -10.0f64..10.0, a1 in -10.0f64..10.0, a2 in -50.0f64..50.0) {
            let e = ladder();
            let v: Vec<f64> = e.iter().map(|x| a0 + a1 * x + a2 * x * x).collect();
            let x = extrapolate(&e, &v, ExtrapolationModel::LinearQuadratic).unwrap();
            prop_assert!((x.limit - a0).abs() < 1e-11 * (1.0 + a0.abs()));
        }

        #[test]
        fn power_law_slope_is_recovered(c in 0.01f64..100.0, p in 0.2f64..3.0) {
            let e = ladder();
            let v: Vec<f64> = e.iter().map(|x| c * x.powf(p)).collect();
            let f = fit_rate(&e, &v).unwrap();
            prop_assert!((f.slope - p).abs() < 1e-9);
            prop_assert!(f.r_squared > 1.0 - 1e-12);
        }
    }
}
