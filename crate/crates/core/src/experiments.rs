//! Monte Carlo sweeps of estimation error against the observation
//! probability `alpha`.
//!
//! Every trial draws its randomness from `seed.derive(trial)`, split into
//! independent streams for the design, the mask uniforms and the noise. All
//! `alpha` values of a trial share the design and the mask uniforms, so
//! masks are nested in `alpha`. Trials may run in any order or in parallel;
//! aggregation walks them by index, so tables are reproducible byte for
//! byte.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::impute::{
    ar1_impute, estimate_covariance_mcar, estimate_phi, graphical_impute, zero_impute, Ar1Params,
    CovarianceSource,
};
use crate::model::{FitResult, FitStatus, ImputedMatrix, RegressionProblem, SolverKind};
use crate::solvers::{self, LambdaSchedule, ScheduleInputs, ScheduleKind};
use crate::synth::{self, BandedModel, PatternDist, RngSeed};

const DESIGN_STREAM: u64 = 0;
const MASK_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentKind {
    /// Identity design, zero imputation, LASSO.
    Fig1IdentityMcar,
    /// AR(1) design; known versus estimated coefficient.
    Fig2Ar1 { phi: f64 },
    /// Banded precision; exact versus estimated covariance. One table per
    /// entry of `p_list` (or just `p` when the list is empty).
    Fig3Banded {
        phi: f64,
        bandwidth: usize,
        p_list: Vec<usize>,
    },
    /// Square-root LASSO with a fixed, noise-free penalty across `sigma` and `R`.
    SqrtLassoPivotality,
    /// Identity design under a value-independent row-pattern mask.
    MnarDemo,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Fig1IdentityMcar => "fig1",
            ExperimentKind::Fig2Ar1 { .. } => "fig2",
            ExperimentKind::Fig3Banded { .. } => "fig3",
            ExperimentKind::SqrtLassoPivotality => "sqrt-pivotal",
            ExperimentKind::MnarDemo => "mnar",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub n: usize,
    pub p: usize,
    pub trials: usize,
    pub alpha_grid: Vec<f64>,
    pub seed: RngSeed,
    pub sigma: f64,
    pub lambda_scale: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Lower bound applied to every scheduled penalty. Keeps the
    /// fully-observed, `p > n` case from collapsing to an arbitrary
    /// least-squares solution: a tiny positive penalty selects (nearly) the
    /// minimum-l1 interpolant.
    pub lambda_floor: f64,
}

/// Desk-scale defaults.
pub const DESK_N: usize = 400;
pub const DESK_P: usize = 480;
pub const DESK_TRIALS: usize = 20;
pub const DEFAULT_LAMBDA_FLOOR: f64 = 1e-4;

impl ExperimentConfig {
    /// Desk-scale configuration for `experiment`: `n = 400`, `p = 480`,
    /// 20 trials, noiseless.
    ///
    /// The banded sweep starts at `alpha = 0.6`: with `n = 400` the plug-in
    /// covariance at `alpha = 0.5` occasionally has nearly singular blanket
    /// blocks, the imputed design blows up and the fit stalls.
    pub fn desk(experiment: ExperimentKind) -> Self {
        let alpha_grid = match &experiment {
            ExperimentKind::Fig2Ar1 { .. } => vec![0.7, 0.8, 0.9, 1.0],
            ExperimentKind::Fig3Banded { .. } => vec![0.6, 0.7, 0.8, 0.9, 1.0],
            ExperimentKind::SqrtLassoPivotality => vec![0.8],
            _ => vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0],
        };
        Self {
            experiment,
            n: DESK_N,
            p: DESK_P,
            trials: DESK_TRIALS,
            alpha_grid,
            seed: RngSeed(20_240_601),
            sigma: 0.0,
            lambda_scale: 1.0,
            tol: crate::model::DEFAULT_TOL,
            max_iter: crate::model::DEFAULT_MAX_ITER,
            lambda_floor: DEFAULT_LAMBDA_FLOOR,
        }
    }

    /// `n = 1000`, `p = 1200`, 100 trials.
    pub fn paper_scale(mut self) -> Self {
        self.n = 1000;
        self.p = 1200;
        self.trials = 100;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.p == 0 {
            return Err(Error::InvalidDimension(format!("n={}, p={}", self.n, self.p)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(Error::InvalidParameter("alpha grid is empty".into()));
        }
        if let Some(&a) = self.alpha_grid.iter().find(|&&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::AlphaOutOfRange(a));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.lambda_scale >= 0.0 && self.lambda_scale.is_finite()) {
            return Err(Error::InvalidParameter("lambda_scale must be >= 0".into()));
        }
        if !(self.lambda_floor >= 0.0 && self.lambda_floor.is_finite()) {
            return Err(Error::InvalidParameter("lambda_floor must be >= 0".into()));
        }
        if let ExperimentKind::Fig3Banded { p_list, .. } = &self.experiment {
            if p_list.contains(&0) {
                return Err(Error::InvalidDimension("p_list contains 0".into()));
            }
        }
        Ok(())
    }

    fn trial_seed(&self, trial: usize) -> RngSeed {
        self.seed.derive(trial as u64)
    }

    fn lambda(&self, kind: ScheduleKind, inputs: ScheduleInputs) -> Result<f64> {
        let v = LambdaSchedule::new(kind, inputs)
            .with_scale(self.lambda_scale)
            .value()?;
        Ok(v.max(self.lambda_floor))
    }

    fn inputs(&self, p: usize) -> ScheduleInputs {
        ScheduleInputs {
            n: self.n,
            p,
            ..Default::default()
        }
    }
}

/// Mean, minimum and maximum of a set of errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl ErrStats {
    pub fn from_samples(samples: &[f64]) -> Self {
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
        let max = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { mean, min, max }
    }
}

/// One line of an error-versus-`alpha` table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub alpha: f64,
    pub err: f64,
    pub min_err: f64,
    pub max_err: f64,
    /// Same statistics for the estimated-parameter imputer, when there is one.
    pub apx: Option<ErrStats>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandedSweep {
    pub p: usize,
    pub rows: Vec<SweepRow>,
}

/// Run `trial_fn` for every trial index, in parallel when enabled, and
/// return the results in index order. The first error aborts the sweep.
fn map_trials<T, F>(trials: usize, trial_fn: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..trials).into_par_iter().map(trial_fn).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(trial_fn).collect()
    }
}

/// Per-trial results are `[alpha index] -> (err, apx_err)`.
fn aggregate(alphas: &[f64], per_trial: &[Vec<(f64, Option<f64>)>]) -> Vec<SweepRow> {
    alphas
        .iter()
        .enumerate()
        .map(|(a, &alpha)| {
            let errs: Vec<f64> = per_trial.iter().map(|t| t[a].0).collect();
            let apx: Vec<f64> = per_trial.iter().filter_map(|t| t[a].1).collect();
            let s = ErrStats::from_samples(&errs);
            SweepRow {
                alpha,
                err: s.mean,
                min_err: s.min,
                max_err: s.max,
                apx: (!apx.is_empty()).then(|| ErrStats::from_samples(&apx)),
            }
        })
        .collect()
}

/// Fit and require a usable answer. An interpolating square-root LASSO fit
/// is accepted; running out of iterations is not.
fn fit_checked(problem: &RegressionProblem) -> Result<FitResult> {
    let res = solvers::fit(problem)?;
    match res.status {
        FitStatus::Converged | FitStatus::ZeroResidualDegenerate => Ok(res),
        FitStatus::MaxIterExceeded => Err(Error::NotConverged { iters: res.iters }),
    }
}

fn l2_error(
    cfg: &ExperimentConfig,
    design: ImputedMatrix,
    y: &DVector<f64>,
    lambda: f64,
    solver: SolverKind,
    beta0: &DVector<f64>,
) -> Result<f64> {
    let problem = RegressionProblem::new(design, y.clone(), lambda)?
        .with_solver(solver)
        .with_tol(cfg.tol)
        .with_max_iter(cfg.max_iter);
    let fit = fit_checked(&problem)?;
    Ok((fit.beta - beta0).norm())
}

fn expect_kind(cfg: &ExperimentConfig, want: &str) -> Result<()> {
    if cfg.experiment.name() == want {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "config is for '{}', expected '{want}'",
            cfg.experiment.name()
        )))
    }
}

/// Identity design, zero imputation, noiseless by default, penalty
/// `sqrt(alpha (1 - alpha) log p / n)`.
pub fn run_fig1(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_kind(cfg, "fig1")?;
    cfg.validate()?;
    let (beta0, _) = synth::gen_beta0_sqrt_sparsity(cfg.p)?;
    let per_trial = map_trials(cfg.trials, |t| {
        let seed = cfg.trial_seed(t);
        let x = synth::gen_identity_gaussian(cfg.n, cfg.p, seed.derive(DESIGN_STREAM))?;
        let y = synth::gen_response(&x, &beta0, cfg.sigma, seed.derive(NOISE_STREAM))?;
        cfg.alpha_grid
            .iter()
            .map(|&alpha| {
                let z = synth::apply_mcar(&x, alpha, seed.derive(MASK_STREAM))?;
                let mut inputs = cfg.inputs(cfg.p);
                inputs.alpha = Some(alpha);
                let lambda = cfg.lambda(ScheduleKind::IdentityMcar, inputs)?;
                let err = l2_error(cfg, zero_impute(&z), &y, lambda, SolverKind::Lasso, &beta0)?;
                Ok((err, None))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate(&cfg.alpha_grid, &per_trial))
}

/// AR(1) design; `err` uses the true coefficient, `apx_err` the estimate
/// from the masked data. Penalty `R / alpha^4 * sqrt(log p / n)`.
pub fn run_fig2_ar1(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_kind(cfg, "fig2")?;
    cfg.validate()?;
    let ExperimentKind::Fig2Ar1 { phi } = cfg.experiment else {
        unreachable!()
    };
    let known = Ar1Params::known(phi)?;
    let (beta0, _) = synth::gen_beta0_sqrt_sparsity(cfg.p)?;
    let radius = beta0.norm();
    let per_trial = map_trials(cfg.trials, |t| {
        let seed = cfg.trial_seed(t);
        let x = synth::gen_ar1(cfg.n, cfg.p, phi, seed.derive(DESIGN_STREAM))?;
        let y = synth::gen_response(&x, &beta0, cfg.sigma, seed.derive(NOISE_STREAM))?;
        cfg.alpha_grid
            .iter()
            .map(|&alpha| {
                let z = synth::apply_mcar(&x, alpha, seed.derive(MASK_STREAM))?;
                let mut inputs = cfg.inputs(cfg.p);
                inputs.alpha = Some(alpha);
                inputs.radius = Some(radius);
                let lambda = cfg.lambda(ScheduleKind::Ar1, inputs)?;
                let exact = ar1_impute(&z, known)?;
                let err = l2_error(cfg, exact, &y, lambda, SolverKind::Lasso, &beta0)?;
                let estimated = ar1_impute(&z, estimate_phi(&z, alpha)?)?;
                let apx = l2_error(cfg, estimated, &y, lambda, SolverKind::Lasso, &beta0)?;
                Ok((err, Some(apx)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate(&cfg.alpha_grid, &per_trial))
}

/// Banded-precision design; `err` imputes with the population covariance,
/// `apx_err` with the unbiased MCAR estimate. Penalty
/// `lambda_max(Sigma) sqrt((1 - alpha) log p / n)`.
pub fn run_fig3_banded(cfg: &ExperimentConfig) -> Result<Vec<BandedSweep>> {
    expect_kind(cfg, "fig3")?;
    cfg.validate()?;
    let ExperimentKind::Fig3Banded {
        phi,
        bandwidth,
        ref p_list,
    } = cfg.experiment
    else {
        unreachable!()
    };
    let ps = if p_list.is_empty() {
        vec![cfg.p]
    } else {
        p_list.clone()
    };
    ps.into_iter()
        .map(|p| {
            let rows = banded_sweep(cfg, p, phi, bandwidth)?;
            Ok(BandedSweep { p, rows })
        })
        .collect()
}

fn banded_sweep(cfg: &ExperimentConfig, p: usize, phi: f64, bandwidth: usize) -> Result<Vec<SweepRow>> {
    let model = BandedModel::new(p, phi, bandwidth)?;
    let top_eig = model
        .sigma
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let (beta0, _) = synth::gen_beta0_sqrt_sparsity(p)?;
    let per_trial = map_trials(cfg.trials, |t| {
        let seed = cfg.trial_seed(t);
        let x = model.sample(cfg.n, seed.derive(DESIGN_STREAM))?;
        let y = synth::gen_response(&x, &beta0, cfg.sigma, seed.derive(NOISE_STREAM))?;
        cfg.alpha_grid
            .iter()
            .map(|&alpha| {
                let z = synth::apply_mcar(&x, alpha, seed.derive(MASK_STREAM))?;
                let mut inputs = cfg.inputs(p);
                inputs.alpha = Some(alpha);
                inputs.sigma_max_eig = Some(top_eig);
                let lambda = cfg.lambda(ScheduleKind::Graphical, inputs)?;
                let exact = graphical_impute(&z, &model.graph, CovarianceSource::Exact(&model.sigma))?;
                let err = l2_error(cfg, exact, &y, lambda, SolverKind::Lasso, &beta0)?;
                let est = estimate_covariance_mcar(&z, alpha)?;
                let approx = graphical_impute(&z, &model.graph, CovarianceSource::Estimated(&est))?;
                let apx = l2_error(cfg, approx, &y, lambda, SolverKind::Lasso, &beta0)?;
                Ok((err, Some(apx)))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate(&cfg.alpha_grid, &per_trial))
}

/// Identity design under an MNAR row-pattern mask: each row is fully
/// observed with probability `alpha`, otherwise only its second half is
/// (the support of `beta0` sits in the first half).
/// Penalty `(sigma + R) sqrt(log p / n)`.
pub fn run_mnar_demo(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    expect_kind(cfg, "mnar")?;
    cfg.validate()?;
    let (beta0, _) = synth::gen_beta0_sqrt_sparsity(cfg.p)?;
    let radius = beta0.norm();
    let all = vec![true; cfg.p];
    let half: Vec<bool> = (0..cfg.p).map(|j| j >= cfg.p / 2).collect();
    let per_trial = map_trials(cfg.trials, |t| {
        let seed = cfg.trial_seed(t);
        let x = synth::gen_identity_gaussian(cfg.n, cfg.p, seed.derive(DESIGN_STREAM))?;
        let y = synth::gen_response(&x, &beta0, cfg.sigma, seed.derive(NOISE_STREAM))?;
        cfg.alpha_grid
            .iter()
            .map(|&alpha| {
                let dist = PatternDist::Mixture(vec![(alpha, all.clone()), (1.0 - alpha, half.clone())]);
                let z = synth::apply_mnar_rowpattern(&x, &dist, seed.derive(MASK_STREAM))?;
                let mut inputs = cfg.inputs(cfg.p);
                inputs.sigma = Some(cfg.sigma);
                inputs.sigma_x = Some(1.0);
                inputs.radius = Some(radius);
                let lambda = cfg.lambda(ScheduleKind::Mnar, inputs)?;
                let err = l2_error(cfg, zero_impute(&z), &y, lambda, SolverKind::Lasso, &beta0)?;
                Ok((err, None))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate(&cfg.alpha_grid, &per_trial))
}

/// Noise levels and signal radii swept by [`run_sqrt_pivotality`].
pub const PIVOTAL_SIGMAS: [f64; 3] = [0.1, 0.5, 1.0];
pub const PIVOTAL_RADII: [f64; 2] = [1.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PivotalCell {
    pub alpha: f64,
    pub sigma: f64,
    pub radius: f64,
    pub lambda: f64,
    pub stats: ErrStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PivotalReport {
    pub cells: Vec<PivotalCell>,
    /// Every cell used bit-identical `lambda`.
    pub lambda_invariant: bool,
    /// Least-squares slope of `log err` on `log(sigma + R sqrt(1 - alpha))`.
    pub loglog_slope: f64,
}

/// Square-root LASSO on zero-imputed identity designs with penalty
/// `sqrt(log p / n)` (times `lambda_scale`), swept over
/// [`PIVOTAL_SIGMAS`] x [`PIVOTAL_RADII`] for every `alpha` in the grid.
/// `beta0` is the square-root-sparsity pattern rescaled to norm `R`.
pub fn run_sqrt_pivotality(cfg: &ExperimentConfig) -> Result<PivotalReport> {
    expect_kind(cfg, "sqrt-pivotal")?;
    cfg.validate()?;
    run_sqrt_cells(cfg, &PIVOTAL_SIGMAS, &PIVOTAL_RADII)
}

/// [`run_sqrt_pivotality`] over caller-chosen noise levels and radii.
pub fn run_sqrt_cells(cfg: &ExperimentConfig, sigmas: &[f64], radii: &[f64]) -> Result<PivotalReport> {
    cfg.validate()?;
    let (pattern, s) = synth::gen_beta0_sqrt_sparsity(cfg.p)?;
    let mut cells = Vec::new();
    for &alpha in &cfg.alpha_grid {
        for &sigma in sigmas {
            for &radius in radii {
                let beta0 = &pattern * (radius / (s as f64).sqrt());
                let mut inputs = cfg.inputs(cfg.p);
                inputs.sigma_x = Some(1.0);
                inputs.sigma = Some(sigma);
                inputs.radius = Some(radius);
                inputs.alpha = Some(alpha);
                let lambda = cfg.lambda(ScheduleKind::SqrtLassoPivotal, inputs)?;
                let errs = map_trials(cfg.trials, |t| {
                    let seed = cfg.trial_seed(t);
                    let x = synth::gen_identity_gaussian(cfg.n, cfg.p, seed.derive(DESIGN_STREAM))?;
                    let y = synth::gen_response(&x, &beta0, sigma, seed.derive(NOISE_STREAM))?;
                    let z = synth::apply_mcar(&x, alpha, seed.derive(MASK_STREAM))?;
                    l2_error(cfg, zero_impute(&z), &y, lambda, SolverKind::SqrtLasso, &beta0)
                })?;
                cells.push(PivotalCell {
                    alpha,
                    sigma,
                    radius,
                    lambda,
                    stats: ErrStats::from_samples(&errs),
                });
            }
        }
    }
    let lambda_invariant = cells.iter().all(|c| {
        cells
            .iter()
            .filter(|d| d.alpha == c.alpha)
            .all(|d| d.lambda.to_bits() == c.lambda.to_bits())
    });
    let points: Vec<(f64, f64)> = cells
        .iter()
        .filter(|c| c.stats.mean > 0.0)
        .map(|c| {
            (
                (c.sigma + c.radius * (1.0 - c.alpha).sqrt()).ln(),
                c.stats.mean.ln(),
            )
        })
        .filter(|(u, _)| u.is_finite())
        .collect();
    Ok(PivotalReport {
        cells,
        lambda_invariant,
        loglog_slope: ols_slope(&points),
    })
}

fn ols_slope(points: &[(f64, f64)]) -> f64 {
    let k = points.len() as f64;
    if points.len() < 2 {
        return f64::NAN;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn fmt12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Render rows as a whitespace-separated table with header
/// `alpha err max_err min_err`, plus `apx_err apx_max_err apx_min_err` when
/// the rows carry estimated-parameter statistics. Numbers are printed with
/// 12 significant digits.
pub fn format_dat(rows: &[SweepRow]) -> Result<String> {
    let first = rows
        .first()
        .ok_or_else(|| Error::InvalidParameter("no rows to write".into()))?;
    let with_apx = first.apx.is_some();
    if rows.iter().any(|r| r.apx.is_some() != with_apx) {
        return Err(Error::InvalidParameter("rows disagree on apx columns".into()));
    }
    let mut out = String::from("alpha err max_err min_err");
    if with_apx {
        out.push_str(" apx_err apx_max_err apx_min_err");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{} {} {} {}",
            fmt12(r.alpha),
            fmt12(r.err),
            fmt12(r.max_err),
            fmt12(r.min_err)
        );
        if let Some(a) = r.apx {
            let _ = write!(out, " {} {} {}", fmt12(a.mean), fmt12(a.max), fmt12(a.min));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Table for [`PivotalReport`]: `alpha sigma R lambda err max_err min_err`.
pub fn format_pivotal_dat(report: &PivotalReport) -> Result<String> {
    if report.cells.is_empty() {
        return Err(Error::InvalidParameter("no cells to write".into()));
    }
    let mut out = String::from("alpha sigma R lambda err max_err min_err\n");
    for c in &report.cells {
        let _ = writeln!(
            out,
            "{} {} {} {} {} {} {}",
            fmt12(c.alpha),
            fmt12(c.sigma),
            fmt12(c.radius),
            fmt12(c.lambda),
            fmt12(c.stats.mean),
            fmt12(c.stats.max),
            fmt12(c.stats.min)
        );
    }
    Ok(out)
}

/// Write [`format_dat`] output to `path`. Nothing is created when `rows`
/// is empty.
pub fn emit_dat(rows: &[SweepRow], path: impl AsRef<Path>) -> Result<()> {
    let text = format_dat(rows)?;
    std::fs::write(path, text)?;
    Ok(())
}

/// Exact `p x p` AR(1) covariance; re-exported for callers assembling their
/// own sweeps.
pub fn ar1_population_covariance(p: usize, phi: f64) -> Result<DMatrix<f64>> {
    synth::ar1_covariance(p, phi)
}
