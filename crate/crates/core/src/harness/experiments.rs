//! Expansion of each experiment into grid-cell tasks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Experiment, LoadedPair, RunConfig};
use super::report::{CellSummary, ProfileRow, Row};
use super::{CellOutput, Task};
use crate::bht::{
    check_joint_point, inversion_step, lemma6_gap, mollifier_pair, pair_radius, poisson_residual, BhtParams,
    ConvergenceReport, InversionReport, KernelSpec,
};
use crate::catalog::{Function, RealFn};
use crate::dual::{leibniz_residual, norm_probe, weak_limit_residual, TestPairing};
use crate::error::{Error, Result};
use crate::fit::fit_rate;
use crate::lebesgue::{
    check_multi_product, check_nesting, check_product, infinity_surrogate, lebesgue_profile, ratio_to_f64,
    Classification, ThetaProfile,
};
use crate::quadrature::Estimate;

/// Range of the sampled nesting radii, log-uniform.
const NESTING_R: (f64, f64) = (1e-3, 1.0);
/// Largest sampled nesting exponent.
const NESTING_P_MAX: f64 = 8.0;
/// Sampled nesting points extend this far beyond the configured x-grid.
const NESTING_X_PAD: f64 = 1.0;

/// Labels, functions and coordinates shared by the rows of one cell.
#[derive(Debug, Clone)]
struct Key {
    experiment: String,
    f: String,
    g: String,
    alpha: Option<f64>,
    x: Option<f64>,
}

impl Key {
    fn pair(experiment: &str, pair: &LoadedPair, alpha: Option<f64>, x: Option<f64>) -> Self {
        Key {
            experiment: experiment.to_string(),
            f: pair.f.spec().to_string(),
            g: pair.g.spec().to_string(),
            alpha,
            x,
        }
    }

    fn single(experiment: &str, f: String, x: f64) -> Self {
        Key {
            experiment: experiment.to_string(),
            f,
            g: String::new(),
            alpha: None,
            x: Some(x),
        }
    }

    fn row(&self, eps_or_r: f64, value_re: f64, value_im: f64, err_est: f64) -> Row {
        Row {
            experiment: self.experiment.clone(),
            function_f: self.f.clone(),
            function_g: self.g.clone(),
            alpha: self.alpha,
            x: self.x,
            eps_or_r,
            value_re,
            value_im,
            err_est,
            status: "ok".into(),
        }
    }

    fn error_row(&self, eps_or_r: f64, e: &Error) -> Row {
        Row {
            status: e.code().into(),
            ..self.row(eps_or_r, f64::NAN, f64::NAN, f64::NAN)
        }
    }

    fn cell(&self) -> CellSummary {
        CellSummary {
            check: self.experiment.clone(),
            function_f: self.f.clone(),
            function_g: (!self.g.is_empty()).then(|| self.g.clone()),
            alpha: self.alpha,
            x: self.x,
            status: "ok".into(),
            ..Default::default()
        }
    }
}

fn judge(cell: &mut CellSummary, pass: bool) {
    cell.pass = pass;
    cell.status = if pass { "ok" } else { "failed" }.into();
}

fn record_error(cell: &mut CellSummary, e: &Error) {
    cell.pass = false;
    cell.status = e.code().into();
    cell.note = Some(e.to_string());
}

fn single_cell(rows: Vec<Row>, cell: CellSummary) -> CellOutput {
    CellOutput {
        rows,
        profiles: Vec::new(),
        cells: vec![cell],
    }
}

/// Evaluates `step` along `ladder`, one row per entry. Returns the rows and the
/// values, or the first error.
fn sweep<T>(
    key: &Key,
    ladder: &[f64],
    mut step: impl FnMut(f64) -> Result<T>,
    to_row: impl Fn(&T) -> (f64, f64, f64),
) -> (Vec<Row>, Result<Vec<T>>) {
    let mut rows = Vec::with_capacity(ladder.len());
    let mut values = Vec::with_capacity(ladder.len());
    let mut first_err = None;
    for &e in ladder {
        match step(e) {
            Ok(v) => {
                let (re, im, err) = to_row(&v);
                rows.push(key.row(e, re, im, err));
                values.push(v);
            }
            Err(err) => {
                rows.push(key.error_row(e, &err));
                first_err.get_or_insert(err);
            }
        }
    }
    (rows, first_err.map_or(Ok(values), Err))
}

fn real_row(e: &Estimate) -> (f64, f64, f64) {
    (e.value, 0.0, e.err_est)
}

fn theta_rows(key: &Key, profile: &ThetaProfile, extra: Option<&[f64]>) -> Vec<Row> {
    profile
        .radii
        .iter()
        .zip(&profile.theta)
        .enumerate()
        .map(|(i, (&r, &t))| {
            let mut row = key.row(r, t, extra.map_or(0.0, |o| o[i]), 0.0);
            if t.is_nan() {
                row.status = "accuracy".into();
            }
            row
        })
        .collect()
}

fn profile_rows(function_id: &str, profile: &ThetaProfile) -> Vec<ProfileRow> {
    profile
        .radii
        .iter()
        .zip(&profile.theta)
        .map(|(&r, &theta)| ProfileRow {
            function_id: function_id.to_string(),
            x: profile.x,
            p: profile.p,
            r,
            theta,
            slope: profile.fitted_slope,
            class: profile.classification.as_str().into(),
        })
        .collect()
}

/// One nesting sample, drawn before dispatch so the pool size cannot change it.
#[derive(Debug, Clone, Copy)]
struct NestingSample {
    x: f64,
    r: f64,
    p1: f64,
    p2: f64,
}

/// Loaded inputs of a run.
pub(crate) struct Plan<'a> {
    cfg: &'a RunConfig,
    pairs: Vec<LoadedPair>,
    functions: Vec<Function>,
    kernel: KernelSpec,
    pairing: Option<TestPairing>,
    nesting: Vec<Vec<NestingSample>>,
}

impl<'a> Plan<'a> {
    pub fn new(cfg: &'a RunConfig) -> Result<Self> {
        let pairing = match cfg.experiment {
            Experiment::Dual => Some(TestPairing::new(
                cfg.dual.psi.clone(),
                cfg.dual.support_radius,
                cfg.dual.pairing_quad,
            )?),
            _ => None,
        };
        let functions = cfg.load_functions()?;
        let nesting = if cfg.experiment == Experiment::ProductLemmas {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let lo = cfg.x_grid.iter().copied().fold(f64::INFINITY, f64::min) - NESTING_X_PAD;
            let hi = cfg.x_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max) + NESTING_X_PAD;
            let (rlo, rhi) = (NESTING_R.0.ln(), NESTING_R.1.ln());
            functions
                .iter()
                .map(|_| {
                    (0..cfg.product.nesting_samples)
                        .map(|_| {
                            let p1 = rng.random_range(1.0..=NESTING_P_MAX);
                            NestingSample {
                                x: rng.random_range(lo..=hi),
                                r: rng.random_range(rlo..=rhi).exp(),
                                p1,
                                p2: rng.random_range(1.0..=p1),
                            }
                        })
                        .collect()
                })
                .collect()
        } else {
            Vec::new()
        };
        Ok(Plan {
            cfg,
            pairs: cfg.load_pairs()?,
            functions,
            kernel: KernelSpec::from_kind(cfg.kernel.clone())?,
            pairing,
            nesting,
        })
    }

    /// Tasks in config order: pairs, then `α`, then `x`, then any inner list.
    pub fn tasks(&self) -> Vec<Task<'_>> {
        let cfg = self.cfg;
        let mut tasks: Vec<Task<'_>> = Vec::new();
        match cfg.experiment {
            Experiment::Invert => self.grid(&mut tasks, |p, pair, a, x| p.invert_cell(pair, a, x)),
            Experiment::SweepGap => self.grid(&mut tasks, |p, pair, a, x| p.sweep_cell(pair, a, x, false)),
            Experiment::SweepPoisson => self.grid(&mut tasks, |p, pair, a, x| p.sweep_cell(pair, a, x, true)),
            Experiment::Mollifier => self.grid(&mut tasks, |p, pair, a, x| p.mollifier_cell(pair, a, x)),
            Experiment::Dual => {
                self.grid(&mut tasks, |p, pair, a, x| p.leibniz_cell(pair, a, x));
                for pair in &self.pairs {
                    for &alpha in &cfg.alpha_list {
                        tasks.push(Box::new(move || self.weak_cell(pair, alpha)));
                    }
                }
            }
            Experiment::NormProbe => {
                for pair in &self.pairs {
                    for &alpha in &cfg.alpha_list {
                        tasks.push(Box::new(move || self.probe_cell(pair, alpha)));
                    }
                }
            }
            Experiment::Lebesgue => {
                for f in &self.functions {
                    for &x in &cfg.x_grid {
                        for &p in &cfg.lebesgue.exponents {
                            tasks.push(Box::new(move || self.lebesgue_cell(f, x, p)));
                        }
                        if cfg.lebesgue.infinity {
                            tasks.push(Box::new(move || self.infinity_cell(f, x)));
                        }
                    }
                }
            }
            Experiment::ProductLemmas => {
                for pair in &self.pairs {
                    for &x in &cfg.x_grid {
                        for &(p1, p2) in &cfg.product.exponent_pairs {
                            tasks.push(Box::new(move || self.product_cell(pair, x, p1, p2)));
                        }
                    }
                }
                for chain in &cfg.product.chains {
                    for &x in &cfg.x_grid {
                        tasks.push(Box::new(move || self.chain_cell(chain, x)));
                    }
                }
                for (f, samples) in self.functions.iter().zip(&self.nesting) {
                    tasks.push(Box::new(move || self.nesting_cell(f, samples)));
                }
            }
        }
        tasks
    }

    fn grid<'s>(&'s self, tasks: &mut Vec<Task<'s>>, cell: fn(&Self, &LoadedPair, f64, f64) -> CellOutput) {
        for pair in &self.pairs {
            for &alpha in &self.cfg.alpha_list {
                for &x in &self.cfg.x_grid {
                    tasks.push(Box::new(move || cell(self, pair, alpha, x)));
                }
            }
        }
    }

    fn base_params(&self, pair: &LoadedPair, alpha: f64, x: f64, eps: f64) -> Result<BhtParams> {
        BhtParams::new(
            alpha,
            eps,
            pair_radius(pair.f.spec(), pair.g.spec(), x, alpha),
            self.cfg.quad,
        )
    }

    fn ladder(&self) -> &[f64] {
        self.cfg.eps_ladder.as_slice()
    }

    fn invert_cell(&self, pair: &LoadedPair, alpha: f64, x: f64) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let key = Key::pair("invert", pair, Some(alpha), Some(x));
        let mut cell = key.cell();
        let target = pair.f.eval(x) * pair.g.eval(x);
        cell.target = Some(target);

        let (rows, steps) = match check_joint_point(&pair.f, &pair.g, x)
            .and_then(|_| self.base_params(pair, alpha, x, self.ladder()[0]))
        {
            Ok(base) => sweep(
                &key,
                self.ladder(),
                |e| inversion_step(&pair.f, &pair.g, x, &base.at_eps(e)?),
                |s| (s.value.re, s.value.im, s.err_re + s.err_im),
            ),
            Err(e) => (
                self.ladder().iter().map(|&eps| key.error_row(eps, &e)).collect(),
                Err(e),
            ),
        };
        match steps.and_then(|s| InversionReport::from_steps(&self.cfg.eps_ladder, &s)) {
            Ok(rep) => {
                cell.limit = rep.recovered;
                cell.imaginary_residue = Some(rep.imaginary_residue);
                cell.slope = rep.report.fitted_rate.map(|r| r.slope);
                cell.r_squared = rep.report.fitted_rate.map(|r| r.r_squared);
                cell.error = rep.recovered.map(|v| (v - target).abs());
                let allowed = (tol.recovery_rel * target.abs()).max(tol.recovery_abs);
                let pass =
                    !rep.failed && rep.imaginary_residue <= tol.imaginary && cell.error.is_some_and(|e| e <= allowed);
                judge(&mut cell, pass);
            }
            Err(e) => record_error(&mut cell, &e),
        }
        single_cell(rows, cell)
    }

    /// Lemma 6 gap or Poisson residual along the ladder. At a known bad point the
    /// Poisson residual must instead stay large.
    fn sweep_cell(&self, pair: &LoadedPair, alpha: f64, x: f64, poisson: bool) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let label = if poisson { "sweep_poisson" } else { "sweep_gap" };
        let key = Key::pair(label, pair, Some(alpha), Some(x));
        let mut cell = key.cell();
        cell.target = Some(0.0);
        let (rows, steps) = match self.base_params(pair, alpha, x, self.ladder()[0]) {
            Ok(base) => sweep(
                &key,
                self.ladder(),
                |e| {
                    let p = base.at_eps(e)?;
                    if poisson {
                        poisson_residual(&pair.f, &pair.g, x, &p)
                    } else {
                        lemma6_gap(&pair.f, &pair.g, x, &p)
                    }
                },
                real_row,
            ),
            Err(e) => (
                self.ladder().iter().map(|&eps| key.error_row(eps, &e)).collect(),
                Err(e),
            ),
        };
        let steps = match steps {
            Ok(s) => s,
            Err(e) => {
                record_error(&mut cell, &e);
                return single_cell(rows, cell);
            }
        };
        let mags: Vec<f64> = steps.iter().map(|s| s.value.abs()).collect();
        let bad = pair.f.spec().is_bad_point(x) || pair.g.spec().is_bad_point(x);

        if poisson && bad {
            let witness: Vec<f64> = self
                .ladder()
                .iter()
                .zip(&mags)
                .filter(|(e, _)| **e <= tol.jump_eps_max)
                .map(|(_, m)| *m)
                .collect();
            let smallest = witness.iter().copied().fold(f64::INFINITY, f64::min);
            cell.limit = mags.last().copied();
            cell.margin = Some(smallest - tol.jump_floor);
            cell.note = Some("known bad point: residual must stay above the jump floor".into());
            judge(&mut cell, !witness.is_empty() && smallest > tol.jump_floor);
            return single_cell(rows, cell);
        }

        if let Ok(rep) = ConvergenceReport::<f64>::from_estimates(&self.cfg.eps_ladder, &steps) {
            cell.limit = rep.extrapolated;
        }
        let converged = mags.iter().all(|m| *m <= tol.converged_abs);
        let fit = fit_rate(self.ladder(), &mags).ok();
        cell.slope = fit.map(|f| f.slope);
        cell.r_squared = fit.map(|f| f.r_squared);
        let pass = converged || fit.is_some_and(|f| f.slope >= tol.slope_min && f.r_squared >= tol.r_squared_min);
        if converged {
            cell.note = Some("all values below the converged threshold".into());
        }
        judge(&mut cell, pass);
        single_cell(rows, cell)
    }

    fn mollifier_cell(&self, pair: &LoadedPair, alpha: f64, x: f64) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let key = Key::pair("mollifier", pair, Some(alpha), Some(x));
        let mut cell = key.cell();
        let target = pair.f.eval(x) * pair.g.eval(x) * self.kernel.integral();
        cell.target = Some(target);
        cell.note = Some(format!("kernel {}", self.kernel.name()));
        let (rows, steps) = match self.base_params(pair, alpha, x, self.ladder()[0]) {
            Ok(base) => sweep(
                &key,
                self.ladder(),
                |e| mollifier_pair(&pair.f, &pair.g, x, &self.kernel, &base.at_eps(e)?),
                real_row,
            ),
            Err(e) => (
                self.ladder().iter().map(|&eps| key.error_row(eps, &e)).collect(),
                Err(e),
            ),
        };
        match steps.and_then(|s| ConvergenceReport::<f64>::from_estimates(&self.cfg.eps_ladder, &s)) {
            Ok(rep) => {
                cell.limit = rep.extrapolated;
                cell.slope = rep.fitted_rate.map(|r| r.slope);
                cell.r_squared = rep.fitted_rate.map(|r| r.r_squared);
                cell.error = rep.extrapolated.map(|v| (v - target).abs());
                let pass = cell.error.is_some_and(|e| e <= tol.mollifier_abs);
                judge(&mut cell, pass);
            }
            Err(e) => record_error(&mut cell, &e),
        }
        single_cell(rows, cell)
    }

    fn lebesgue_cell(&self, f: &Function, x: f64, p: f64) -> CellOutput {
        let id = f.spec().to_string();
        let key = Key::single("lebesgue", id.clone(), x);
        let mut cell = key.cell();
        cell.p = Some(p);
        let radii = &self.cfg.radius_ladder;
        match lebesgue_profile(f, x, p, radii, &self.cfg.lebesgue.thresholds, &self.cfg.quad) {
            Ok(profile) => {
                let expected = if f.spec().is_bad_point(x) {
                    Classification::NotLebesgue
                } else {
                    Classification::LebesguePoint
                };
                cell.limit = profile.theta.last().copied();
                cell.slope = profile.fitted_slope;
                cell.r_squared = profile.r_squared;
                cell.classification = Some(profile.classification.as_str().into());
                judge(&mut cell, profile.classification == expected);
                CellOutput {
                    rows: theta_rows(&key, &profile, None),
                    profiles: profile_rows(&id, &profile),
                    cells: vec![cell],
                }
            }
            Err(e) => {
                record_error(&mut cell, &e);
                single_cell(radii.iter().map(|&r| key.error_row(r, &e)).collect(), cell)
            }
        }
    }

    /// `A^∞` surrogate; rows carry `θ_8` and the sampled oscillation.
    fn infinity_cell(&self, f: &Function, x: f64) -> CellOutput {
        let id = f.spec().to_string();
        let key = Key::single("lebesgue.infinity", id.clone(), x);
        let mut cell = key.cell();
        let radii = &self.cfg.radius_ladder;
        match infinity_surrogate(f, x, radii, &self.cfg.lebesgue.thresholds, &self.cfg.quad) {
            Ok(check) => {
                cell.p = Some(check.profile.p);
                cell.limit = check.oscillation.last().copied();
                cell.slope = check.profile.fitted_slope;
                cell.r_squared = check.profile.r_squared;
                cell.classification = Some(if check.member { "member" } else { "not_member" }.into());
                judge(&mut cell, check.member != f.spec().is_bad_point(x));
                CellOutput {
                    rows: theta_rows(&key, &check.profile, Some(&check.oscillation)),
                    profiles: profile_rows(&id, &check.profile),
                    cells: vec![cell],
                }
            }
            Err(e) => {
                record_error(&mut cell, &e);
                single_cell(radii.iter().map(|&r| key.error_row(r, &e)).collect(), cell)
            }
        }
    }

    /// Lemma 2 or 3 margins over the radius ladder. The product profile must
    /// decay unless `x` is a known bad point of either factor.
    fn product_cell(&self, pair: &LoadedPair, x: f64, p1: f64, p2: f64) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let key = Key::pair("product_lemmas.pair", pair, None, Some(x));
        let mut cell = key.cell();
        cell.p = Some(1.0 / (1.0 / p1 + 1.0 / p2));
        let (rows, margins) = sweep(
            &key,
            &self.cfg.radius_ladder,
            |r| check_product(&pair.f, &pair.g, x, r, p1, p2, &self.cfg.quad),
            |m| (m.theta_product, m.min_margin(), m.err_est),
        );
        match margins {
            Ok(ms) => {
                let worst = ms.iter().map(|m| m.min_margin()).fold(f64::INFINITY, f64::min);
                let final_theta = ms.last().map_or(f64::NAN, |m| m.theta_product);
                let conforming = !(pair.f.spec().is_bad_point(x) || pair.g.spec().is_bad_point(x));
                cell.margin = Some(worst);
                cell.limit = Some(final_theta);
                let unsplit = ms
                    .iter()
                    .filter_map(|m| m.i_margin_unsplit_form)
                    .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))));
                let mut note = format!("regime {:?}, p1 {p1}, p2 {p2}", ms[0].regime);
                if let Some(u) = unsplit {
                    note.push_str(&format!(", smallest unsplit-form I margin {u:e}"));
                }
                if !conforming {
                    note.push_str(", non-conforming point: decay not required");
                }
                cell.note = Some(note);
                let decays = !conforming || final_theta < tol.product_theta_max;
                judge(&mut cell, worst >= tol.margin_min && decays);
            }
            Err(e) => record_error(&mut cell, &e),
        }
        single_cell(rows, cell)
    }

    fn chain_cell(&self, chain: &[f64], x: f64) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let name = self
            .functions
            .iter()
            .map(|f| f.spec().to_string())
            .collect::<Vec<_>>()
            .join(" * ");
        let key = Key::single("product_lemmas.chain", name, x);
        let mut cell = key.cell();
        let fs: Vec<&dyn RealFn> = self.functions.iter().map(|f| f as &dyn RealFn).collect();
        let radii = &self.cfg.radius_ladder;
        match check_multi_product(&fs, chain, x, radii, &self.cfg.lebesgue.thresholds, &self.cfg.quad) {
            Ok(rep) => {
                let q = rep.chain.final_exponent();
                let worst = rep.step_margins.iter().copied().fold(f64::INFINITY, f64::min);
                cell.p = Some(ratio_to_f64(q));
                cell.margin = Some(worst);
                cell.limit = rep.profile.theta.last().copied();
                cell.slope = rep.profile.fitted_slope;
                cell.r_squared = rep.profile.r_squared;
                cell.classification = Some(rep.profile.classification.as_str().into());
                let qs: Vec<String> = rep.chain.qs.iter().map(|q| q.to_string()).collect();
                cell.note = Some(format!("exponents {chain:?}, q chain [{}]", qs.join(", ")));
                let mut rows = theta_rows(&key, &rep.profile, None);
                rows.iter_mut().for_each(|r| r.err_est = rep.err_est);
                judge(&mut cell, rep.decays && worst >= tol.margin_min);
                single_cell(rows, cell)
            }
            Err(e) => {
                record_error(&mut cell, &e);
                single_cell(radii.iter().map(|&r| key.error_row(r, &e)).collect(), cell)
            }
        }
    }

    /// Lemma 1 at presampled `(x, r, p₁, p₂)`; rows carry the sampled `x`.
    fn nesting_cell(&self, f: &Function, samples: &[NestingSample]) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let id = f.spec().to_string();
        let mut cell = CellSummary {
            check: "product_lemmas.nesting".into(),
            function_f: id.clone(),
            status: "ok".into(),
            ..Default::default()
        };
        let mut rows = Vec::with_capacity(samples.len());
        let mut worst = f64::INFINITY;
        let mut first_err = None;
        for s in samples {
            let key = Key::single("product_lemmas.nesting", id.clone(), s.x);
            match check_nesting(f, s.x, s.r, s.p1, s.p2, &self.cfg.quad) {
                Ok(m) => {
                    worst = worst.min(m.value);
                    rows.push(key.row(s.r, m.value, 0.0, m.err_est));
                }
                Err(e) => {
                    rows.push(key.error_row(s.r, &e));
                    first_err.get_or_insert(e);
                }
            }
        }
        match first_err {
            Some(e) => record_error(&mut cell, &e),
            None => {
                cell.margin = Some(worst);
                cell.note = Some(format!("{} samples", samples.len()));
                judge(&mut cell, worst >= tol.margin_min);
            }
        }
        single_cell(rows, cell)
    }

    /// Leibniz checks at one grid point, one summary per derivative order.
    fn leibniz_cell(&self, pair: &LoadedPair, alpha: f64, x: f64) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let eps = self.cfg.dual.leibniz_eps;
        let mut out = CellOutput::default();
        let params = self.base_params(pair, alpha, x, eps);
        for &m in &self.cfg.dual.orders {
            let key = Key::pair(&format!("dual.leibniz_m{m}"), pair, Some(alpha), Some(x));
            let mut cell = key.cell();
            let check = match &params {
                Ok(p) => leibniz_residual(&pair.f, &pair.g, x, p, m),
                Err(e) => {
                    out.rows.push(key.error_row(eps, e));
                    record_error(&mut cell, e);
                    out.cells.push(cell);
                    continue;
                }
            };
            match check {
                Ok(c) => {
                    out.rows.push(key.row(eps, c.residual, 0.0, c.rounding));
                    let bound = if m == 1 { tol.leibniz_m1 } else { tol.leibniz_m2 };
                    cell.error = Some(c.residual);
                    cell.margin = Some(bound - c.residual);
                    if c.inconclusive {
                        cell.note = Some("inconclusive: rounding exceeds the residual".into());
                    }
                    judge(&mut cell, !c.inconclusive && c.residual < bound);
                }
                Err(e) => {
                    out.rows.push(key.error_row(eps, &e));
                    record_error(&mut cell, &e);
                }
            }
            out.cells.push(cell);
        }
        out
    }

    fn weak_cell(&self, pair: &LoadedPair, alpha: f64) -> CellOutput {
        let tol = &self.cfg.tolerances;
        let pairing = self.pairing.as_ref().expect("dual runs build a test pairing");
        let key = Key::pair("dual.weak_limit", pair, Some(alpha), None);
        let mut cell = key.cell();
        cell.target = Some(0.0);
        let (rows, steps) = sweep(
            &key,
            self.ladder(),
            |e| weak_limit_residual(&pair.f, &pair.g, pairing, alpha, e, &self.cfg.quad),
            |s| (s.value.re, s.value.im, s.err_est),
        );
        match steps {
            Ok(steps) => {
                let mags: Vec<f64> = steps.iter().map(|s| s.value.norm()).collect();
                let converged = mags.iter().all(|m| *m <= tol.converged_abs);
                let fit = fit_rate(self.ladder(), &mags).ok();
                cell.limit = mags.last().copied();
                cell.slope = fit.map(|f| f.slope);
                cell.r_squared = fit.map(|f| f.r_squared);
                if converged {
                    cell.note = Some("all values below the converged threshold".into());
                }
                judge(&mut cell, converged || fit.is_some_and(|f| f.slope >= tol.slope_min));
            }
            Err(e) => record_error(&mut cell, &e),
        }
        single_cell(rows, cell)
    }

    /// Reported, never asserted: passes whenever the ratio is finite.
    fn probe_cell(&self, pair: &LoadedPair, alpha: f64) -> CellOutput {
        let s = &self.cfg.probe;
        let key = Key::pair("norm_probe", pair, Some(alpha), None);
        let mut cell = key.cell();
        match norm_probe(&pair.f, &pair.g, alpha, s.p1, s.p2, s.grid_points, &self.cfg.quad) {
            Ok(probe) => {
                cell.p = Some(probe.p);
                cell.limit = Some(probe.ratio);
                cell.note = Some(format!(
                    "|H|_p {:e}, |f|_p1 {:e}, |g|_p2 {:e}",
                    probe.norm_h, probe.norm_f, probe.norm_g
                ));
                judge(&mut cell, probe.ratio.is_finite());
                single_cell(vec![key.row(probe.window, probe.ratio, 0.0, 0.0)], cell)
            }
            Err(e) => {
                record_error(&mut cell, &e);
                single_cell(vec![key.error_row(f64::NAN, &e)], cell)
            }
        }
    }
}
