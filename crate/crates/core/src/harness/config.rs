//! Run configuration, read from TOML. Every field has a default, and the
//! resolved configuration is echoed into the JSON summary.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bht::{validate_alpha, EpsLadder, KernelKind, KernelSpec};
use crate::catalog::{make_function, Function, FunctionSpec};
use crate::dual::TestPairing;
use crate::error::{Error, Result};
use crate::lebesgue::{halving_radii, ExponentChain, Thresholds};
use crate::quadrature::QuadConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Invert,
    SweepGap,
    SweepPoisson,
    Mollifier,
    Lebesgue,
    ProductLemmas,
    Dual,
    NormProbe,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Invert => "invert",
            Experiment::SweepGap => "sweep_gap",
            Experiment::SweepPoisson => "sweep_poisson",
            Experiment::Mollifier => "mollifier",
            Experiment::Lebesgue => "lebesgue",
            Experiment::ProductLemmas => "product_lemmas",
            Experiment::Dual => "dual",
            Experiment::NormProbe => "norm_probe",
        }
    }

    fn uses_pairs(&self) -> bool {
        !matches!(self, Experiment::Lebesgue)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub f: FunctionSpec,
    pub g: FunctionSpec,
}

/// Pass/fail thresholds applied by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative error allowed in a recovered product or mollifier limit.
    pub recovery_rel: f64,
    /// Absolute error allowed in a recovered product whose target is zero.
    pub recovery_abs: f64,
    /// Absolute error allowed in a mollifier limit.
    pub mollifier_abs: f64,
    /// Largest imaginary residue of an inversion.
    pub imaginary: f64,
    /// Smallest acceptable log–log slope for quantities that must vanish.
    pub slope_min: f64,
    pub r_squared_min: f64,
    /// Sweeps whose magnitudes all stay below this count as converged.
    pub converged_abs: f64,
    /// Lower bound for bound-minus-actual margins.
    pub margin_min: f64,
    /// Final product `θ` must fall below this.
    pub product_theta_max: f64,
    /// At a known bad point the Poisson residual must stay above this for `ε ≤ jump_eps_max`.
    pub jump_floor: f64,
    pub jump_eps_max: f64,
    pub leibniz_m1: f64,
    pub leibniz_m2: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            recovery_rel: 1e-5,
            recovery_abs: 1e-10,
            mollifier_abs: 1e-5,
            imaginary: 1e-6,
            slope_min: 0.9,
            r_squared_min: 0.98,
            converged_abs: 1e-9,
            margin_min: -1e-9,
            product_theta_max: 1e-3,
            jump_floor: 0.1,
            jump_eps_max: 0.01,
            leibniz_m1: 1e-4,
            leibniz_m2: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LebesgueSettings {
    /// Exponents profiled for every function and point.
    pub exponents: Vec<f64>,
    pub thresholds: Thresholds,
    /// Also run the `A^∞` surrogate for every function and point.
    pub infinity: bool,
}

impl Default for LebesgueSettings {
    fn default() -> Self {
        LebesgueSettings {
            exponents: vec![1.0, 2.0],
            thresholds: Thresholds::default(),
            infinity: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProductSettings {
    /// Exponent pairs `(p₁, p₂)` checked for every configured pair of functions.
    pub exponent_pairs: Vec<(f64, f64)>,
    /// Exponent lists for products of all of `functions`; each list must match its length.
    pub chains: Vec<Vec<f64>>,
    /// Random `(x, r, p₁, p₂)` nesting samples per entry of `functions`.
    pub nesting_samples: usize,
}

impl Default for ProductSettings {
    fn default() -> Self {
        ProductSettings {
            exponent_pairs: vec![(2.0, 2.0), (4.0, 4.0)],
            chains: Vec::new(),
            nesting_samples: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualSettings {
    pub psi: FunctionSpec,
    pub support_radius: f64,
    pub pairing_quad: QuadConfig,
    /// `ε` for the Leibniz check.
    pub leibniz_eps: f64,
    pub orders: Vec<u32>,
}

impl Default for DualSettings {
    fn default() -> Self {
        DualSettings {
            psi: FunctionSpec::smooth_bump(0.0, 2.0),
            support_radius: 2.0,
            pairing_quad: QuadConfig {
                rel_tol: 1e-8,
                ..QuadConfig::default()
            },
            leibniz_eps: 0.05,
            orders: vec![1, 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSettings {
    pub p1: f64,
    pub p2: f64,
    pub grid_points: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings {
            p1: 2.0,
            p2: 2.0,
            grid_points: 201,
        }
    }
}

/// One experiment over a Cartesian grid of functions, `α`, `x` and a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub output_path: Option<String>,
    pub pairs: Vec<PairSpec>,
    /// Single functions, for the Lebesgue, nesting and product-chain checks.
    pub functions: Vec<FunctionSpec>,
    pub alpha_list: Vec<f64>,
    pub x_grid: Vec<f64>,
    pub eps_ladder: EpsLadder,
    pub radius_ladder: Vec<f64>,
    pub kernel: KernelKind,
    pub tolerances: Tolerances,
    pub quad: QuadConfig,
    pub lebesgue: LebesgueSettings,
    pub product: ProductSettings,
    pub dual: DualSettings,
    pub probe: ProbeSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            experiment: Experiment::Invert,
            seed: 0,
            output_path: None,
            pairs: Vec::new(),
            functions: Vec::new(),
            alpha_list: vec![2.0],
            x_grid: vec![0.0],
            eps_ladder: EpsLadder::default(),
            radius_ladder: halving_radii(0.2, 10),
            kernel: KernelKind::Poisson,
            tolerances: Tolerances::default(),
            quad: QuadConfig::default(),
            lebesgue: LebesgueSettings::default(),
            product: ProductSettings::default(),
            dual: DualSettings::default(),
            probe: ProbeSettings::default(),
        }
    }
}

/// A pair of validated, evaluable functions.
pub(crate) struct LoadedPair {
    pub f: Function,
    pub g: Function,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks everything that can be checked without running the experiment.
    /// Problems are reported as configuration errors.
    pub fn validate(&self) -> Result<()> {
        self.validate_inner().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })
    }

    fn validate_inner(&self) -> Result<()> {
        let exp = self.experiment;
        if exp.uses_pairs() && self.pairs.is_empty() && exp != Experiment::ProductLemmas {
            return Err(Error::Config(format!(
                "experiment {} needs at least one [[pairs]] entry",
                exp.as_str()
            )));
        }
        if matches!(exp, Experiment::Lebesgue) && self.functions.is_empty() {
            return Err(Error::Config(
                "experiment lebesgue needs at least one entry in functions".into(),
            ));
        }
        if exp == Experiment::ProductLemmas && self.pairs.is_empty() && self.functions.is_empty() {
            return Err(Error::Config(
                "experiment product_lemmas needs pairs or functions".into(),
            ));
        }
        if self.alpha_list.is_empty() || self.x_grid.is_empty() {
            return Err(Error::Config("alpha_list and x_grid must not be empty".into()));
        }
        self.alpha_list.iter().try_for_each(|a| validate_alpha(*a))?;
        if self.x_grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("x_grid entries must be finite".into()));
        }
        if self.radius_ladder.len() < 6
            || self.radius_ladder.iter().any(|r| !(*r > 0.0) || !r.is_finite())
            || self.radius_ladder.windows(2).any(|w| !(w[1] < w[0]))
        {
            return Err(Error::Config(
                "radius_ladder must be strictly decreasing, positive, with at least 6 entries".into(),
            ));
        }
        self.quad.validate()?;
        KernelSpec::from_kind(self.kernel.clone())?.validate()?;
        for p in &self.lebesgue.exponents {
            if !(*p >= 1.0) || !p.is_finite() {
                return Err(Error::Config(format!(
                    "lebesgue exponents must be finite and >= 1, got {p}"
                )));
            }
        }
        for &(p1, p2) in &self.product.exponent_pairs {
            if !(p1 >= 1.0 && p2 >= 1.0) || 1.0 / p1 + 1.0 / p2 > 1.0 + 1e-12 {
                return Err(Error::Config(format!(
                    "exponent pair ({p1}, {p2}) needs p1, p2 >= 1 and 1/p1 + 1/p2 <= 1"
                )));
            }
        }
        for chain in &self.product.chains {
            if chain.len() != self.functions.len() {
                return Err(Error::Config(format!(
                    "exponent chain {chain:?} has {} entries for {} functions",
                    chain.len(),
                    self.functions.len()
                )));
            }
            ExponentChain::new(chain)?;
        }
        if exp == Experiment::Dual {
            TestPairing::new(self.dual.psi.clone(), self.dual.support_radius, self.dual.pairing_quad)?;
            if self.dual.orders.iter().any(|m| !(1..=2).contains(m)) {
                return Err(Error::Config("dual orders must be 1 or 2".into()));
            }
        }
        self.load_pairs()?;
        self.load_functions()?;
        Ok(())
    }

    pub(crate) fn load_pairs(&self) -> Result<Vec<LoadedPair>> {
        self.pairs
            .iter()
            .map(|p| {
                Ok(LoadedPair {
                    f: make_function(&p.f)?,
                    g: make_function(&p.g)?,
                })
            })
            .collect()
    }

    pub(crate) fn load_functions(&self) -> Result<Vec<Function>> {
        self.functions.iter().map(make_function).collect()
    }
}
