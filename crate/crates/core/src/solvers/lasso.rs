//! Cyclic coordinate descent for `(1/2n) ||y - X b||^2 + lambda ||b||_1`.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::model::{FitResult, FitStatus, RegressionProblem};

#[inline]
pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Largest violation of the LASSO stationarity conditions at `beta`, given
/// `resid = y - X beta`. With `g = X^T (X beta - y) / n`:
/// `max(|g_j| - lambda, 0)` where `beta_j = 0`, `|g_j + lambda sign(beta_j)|`
/// elsewhere.
pub fn lasso_kkt_residual(x: &DMatrix<f64>, resid: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    let n = x.nrows() as f64;
    let mut worst = 0.0_f64;
    for j in 0..x.ncols() {
        let g = -x.column(j).dot(resid) / n;
        let v = if beta[j] == 0.0 {
            (g.abs() - lambda).max(0.0)
        } else {
            (g + lambda * beta[j].signum()).abs()
        };
        worst = worst.max(v);
    }
    worst
}

pub fn lasso_objective(resid: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    let n = resid.len() as f64;
    0.5 * resid.norm_squared() / n + lambda * beta.lp_norm(1)
}

pub(crate) struct CdOutcome {
    pub beta: DVector<f64>,
    pub resid: DVector<f64>,
    pub cycles: usize,
    pub kkt: f64,
    pub converged: bool,
}

/// Core solver shared by the LASSO and the square-root LASSO.
///
/// Updates coordinates in order `0..p`. Stops once a full cycle moves no
/// coordinate by `tol` or more and the KKT residual is below `tol`, or after
/// `max_iter` cycles.
pub(crate) fn coordinate_descent(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    tol: f64,
    max_iter: usize,
    warm: Option<&DVector<f64>>,
    mut trace: Option<&mut Vec<f64>>,
) -> CdOutcome {
    let (n, p) = x.shape();
    let nf = n as f64;
    let col_sq: Vec<f64> = (0..p).map(|j| x.column(j).norm_squared() / nf).collect();
    let mut beta = warm.cloned().unwrap_or_else(|| DVector::zeros(p));
    let mut resid = y - x * &beta;
    if let Some(t) = trace.as_deref_mut() {
        t.push(lasso_objective(&resid, &beta, lambda));
    }

    let mut kkt = f64::INFINITY;
    let mut cycles = 0;
    let mut converged = false;
    while cycles < max_iter {
        cycles += 1;
        let mut max_change = 0.0_f64;
        for j in 0..p {
            let c = col_sq[j];
            let old = beta[j];
            if c == 0.0 {
                // All-zero column: any value has zero gradient, keep it at 0.
                beta[j] = 0.0;
                continue;
            }
            let col = x.column(j);
            let rho = col.dot(&resid) / nf + c * old;
            let new = soft_threshold(rho, lambda) / c;
            let delta = new - old;
            if delta != 0.0 {
                resid.axpy(-delta, &col, 1.0);
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(lasso_objective(&resid, &beta, lambda));
        }
        if max_change < tol {
            // Refresh the residual so the certificate is not polluted by
            // accumulated update error.
            resid = y - x * &beta;
            kkt = lasso_kkt_residual(x, &resid, &beta, lambda);
            if kkt < tol {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        resid = y - x * &beta;
        kkt = lasso_kkt_residual(x, &resid, &beta, lambda);
    }
    CdOutcome {
        beta,
        resid,
        cycles,
        kkt,
        converged,
    }
}

/// Design and response after optional centering and scaling.
pub(crate) struct Prepared<'a> {
    pub x: Cow<'a, DMatrix<f64>>,
    pub y: Cow<'a, DVector<f64>>,
    x_mean: Option<DVector<f64>>,
    y_mean: f64,
    col_scale: Option<DVector<f64>>,
}

impl<'a> Prepared<'a> {
    pub fn new(problem: &'a RegressionProblem) -> Self {
        let mut x = Cow::Borrowed(problem.design.data());
        let mut y = Cow::Borrowed(&problem.response);
        let mut x_mean = None;
        let mut y_mean = 0.0;
        let mut col_scale = None;
        let n = problem.n() as f64;
        if problem.intercept {
            let means = DVector::from_fn(x.ncols(), |j, _| x.column(j).sum() / n);
            let xm = x.to_mut();
            for j in 0..xm.ncols() {
                let m = means[j];
                xm.column_mut(j).add_scalar_mut(-m);
            }
            y_mean = y.sum() / n;
            y.to_mut().add_scalar_mut(-y_mean);
            x_mean = Some(means);
        }
        if problem.standardize {
            let scales = DVector::from_fn(x.ncols(), |j, _| {
                let s = (x.column(j).norm_squared() / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            });
            let xm = x.to_mut();
            for j in 0..xm.ncols() {
                let s = scales[j];
                xm.column_mut(j).unscale_mut(s);
            }
            col_scale = Some(scales);
        }
        Self {
            x,
            y,
            x_mean,
            y_mean,
            col_scale,
        }
    }

    /// Map coefficients back to the original columns; returns `(beta, intercept)`.
    pub fn restore(&self, mut beta: DVector<f64>) -> (DVector<f64>, f64) {
        if let Some(s) = &self.col_scale {
            beta.component_div_assign(s);
        }
        let intercept = match &self.x_mean {
            Some(m) => self.y_mean - m.dot(&beta),
            None => 0.0,
        };
        (beta, intercept)
    }
}

fn fit(problem: &RegressionProblem, trace: Option<&mut Vec<f64>>) -> Result<FitResult> {
    problem.check()?;
    let prep = Prepared::new(problem);
    let out = coordinate_descent(
        &prep.x,
        &prep.y,
        problem.lambda,
        problem.tol,
        problem.max_iter,
        None,
        trace,
    );
    let objective = lasso_objective(&out.resid, &out.beta, problem.lambda);
    let (beta, intercept) = prep.restore(out.beta);
    Ok(FitResult {
        beta,
        intercept,
        objective,
        kkt_residual: out.kkt,
        iters: out.cycles,
        converged: out.converged,
        status: if out.converged {
            FitStatus::Converged
        } else {
            FitStatus::MaxIterExceeded
        },
        sigma_hat: None,
    })
}

/// Solve the LASSO. `objective` and `kkt_residual` refer to the problem
/// actually optimized (after centering / scaling when requested).
///
/// Running out of iterations is not an `Err`: the last iterate is returned
/// with `status = MaxIterExceeded`.
pub fn fit_lasso(problem: &RegressionProblem) -> Result<FitResult> {
    fit(problem, None)
}

/// [`fit_lasso`] that also records the objective before the first cycle and
/// after every full cycle.
pub fn fit_lasso_traced(problem: &RegressionProblem) -> Result<(FitResult, Vec<f64>)> {
    let mut trace = Vec::new();
    let res = fit(problem, Some(&mut trace))?;
    Ok((res, trace))
}
