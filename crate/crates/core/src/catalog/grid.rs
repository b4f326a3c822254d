use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_order() -> usize {
    3
}

/// Uniformly sampled signal with local polynomial interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSignal {
    samples: Vec<f64>,
    x0: f64,
    dx: f64,
    #[serde(default = "default_order")]
    interpolation_order: usize,
}

impl GridSignal {
    pub fn new(samples: Vec<f64>, x0: f64, dx: f64) -> Result<Self> {
        Self::with_order(samples, x0, dx, 3)
    }

    /// `order` is 1 (piecewise linear) or 3 (local cubic).
    pub fn with_order(samples: Vec<f64>, x0: f64, dx: f64, order: usize) -> Result<Self> {
        let s = GridSignal {
            samples,
            x0,
            dx,
            interpolation_order: order,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() < 4 {
            return Err(Error::Parameter(format!(
                "a grid signal needs at least 4 samples, got {}",
                self.samples.len()
            )));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() || !self.x0.is_finite() {
            return Err(Error::Parameter(format!(
                "grid spacing must be positive and finite (x0 {}, dx {})",
                self.x0, self.dx
            )));
        }
        if !matches!(self.interpolation_order, 1 | 3) {
            return Err(Error::Parameter(format!(
                "interpolation order must be 1 or 3, got {}",
                self.interpolation_order
            )));
        }
        if self.samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("grid samples must be finite".into()));
        }
        Ok(())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn interpolation_order(&self) -> usize {
        self.interpolation_order
    }

    pub fn x_end(&self) -> f64 {
        self.node(self.samples.len() - 1)
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Interpolated value at `x`; no extrapolation beyond the grid.
    pub fn eval_offgrid(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.x0, self.x_end());
        if !(x >= lo && x <= hi) {
            return Err(Error::Domain { x, lo, hi });
        }
        let n = self.samples.len();
        let s = (x - self.x0) / self.dx;
        let k = s.round().clamp(0.0, (n - 1) as f64) as usize;
        if self.node(k) == x {
            return Ok(self.samples[k]);
        }

        let i = (s.floor().max(0.0) as usize).min(n - 2);
        if self.interpolation_order == 1 {
            let w = s - i as f64;
            return Ok(self.samples[i] * (1.0 - w) + self.samples[i + 1] * w);
        }

        let start = i.saturating_sub(1).min(n - 4);
        let u = s - start as f64;
        let y = &self.samples[start..start + 4];
        // Lagrange basis on the local nodes 0, 1, 2, 3.
        let l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
        let l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
        let l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
        let l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
        Ok(y[0] * l0 + y[1] * l1 + y[2] * l2 + y[3] * l3)
    }

    /// Zero extension outside the grid; total on ℝ.
    pub fn eval_extended(&self, x: f64) -> f64 {
        self.eval_offgrid(x).unwrap_or(0.0)
    }

    /// Bound on the Lipschitz constant of the interpolant inside the grid.
    ///
    /// For the local cubic the derivative is a combination of first differences
    /// whose absolute weights sum to at most 10/3 (one-sided edge stencils).
    pub fn interpolant_lipschitz(&self) -> f64 {
        let max_slope = self
            .samples
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / self.dx)
            .fold(0.0, f64::max);
        match self.interpolation_order {
            1 => max_slope,
            _ => max_slope * 10.0 / 3.0,
        }
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file =
            std::fs::File::open(path.as_ref()).map_err(|e| Error::Load(format!("{}: {e}", path.as_ref().display())))?;
        Self::from_csv_reader(file)
    }

    /// Reads two-column `x,value` rows. A non-numeric first row is taken as a header.
    /// Spacing must be uniform to a relative deviation below 1e-9.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::Load(format!(
                    "row {}: expected 2 columns, found {}",
                    row + 1,
                    record.len()
                )));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Load(format!("row {}: non-numeric entry", row + 1)));
                }
            }
        }
        if xs.len() < 4 {
            return Err(Error::Load(format!("need at least 4 samples, found {}", xs.len())));
        }
        let n = xs.len();
        let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        if !(dx > 0.0) {
            return Err(Error::Load("x column must be increasing".into()));
        }
        for (i, &x) in xs.iter().enumerate() {
            let expected = xs[0] + i as f64 * dx;
            let dev = (x - expected).abs() / dx;
            if !(dev < 1e-9) {
                return Err(Error::Load(format!(
                    "non-uniform spacing at row {i}: relative deviation {dev:e}"
                )));
            }
        }
        GridSignal::new(ys, xs[0], dx)
    }
}
