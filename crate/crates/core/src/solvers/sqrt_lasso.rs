//! Square-root LASSO, `||y - X b||_2 / sqrt(n) + lambda ||b||_1`, solved by
//! the scaled-lasso alternation.
//!
//! The objective equals `min_{s > 0} ||y - X b||^2 / (2 n s) + s / 2 + lambda ||b||_1`,
//! which is jointly convex in `(b, s)`. Minimizing over `s` gives
//! `s = ||y - X b|| / sqrt(n)`; minimizing over `b` is a LASSO with penalty
//! `lambda * s`. Alternating the two converges to the square-root LASSO
//! solution whenever the residual stays away from zero.

use nalgebra::{DMatrix, DVector};

use super::lasso::{coordinate_descent, Prepared};
use crate::error::Result;
use crate::model::{FitResult, FitStatus, RegressionProblem};

/// Noise-level floor; reaching it means the fit interpolates the data.
pub const SIGMA_FLOOR: f64 = 1e-12;

fn noise_level(resid: &DVector<f64>) -> f64 {
    resid.norm() / (resid.len() as f64).sqrt()
}

pub fn sqrt_lasso_objective(resid: &DVector<f64>, beta: &DVector<f64>, lambda: f64) -> f64 {
    noise_level(resid) + lambda * beta.lp_norm(1)
}

/// Stationarity violation of the square-root LASSO. With
/// `g = X^T (X b - y) / n` and `mu = lambda ||y - X b|| / sqrt(n)`, this is
/// the LASSO KKT residual at penalty `mu`.
pub fn sqrt_lasso_kkt_residual(
    x: &DMatrix<f64>,
    resid: &DVector<f64>,
    beta: &DVector<f64>,
    lambda: f64,
) -> f64 {
    super::lasso::lasso_kkt_residual(x, resid, beta, lambda * noise_level(resid))
}

/// Solve the square-root LASSO.
///
/// Alternates `s <- ||y - X b|| / sqrt(n)` and `b <- LASSO(lambda * s)`
/// (warm-started) until `|s_new - s| < tol * max(s, 1)` and the KKT residual
/// is below `tol`. `iters` counts coordinate-descent cycles across all inner
/// solves. An interpolating iterate (`s` at [`SIGMA_FLOOR`]) stops the
/// alternation with `status = ZeroResidualDegenerate`.
pub fn fit_sqrt_lasso(problem: &RegressionProblem) -> Result<FitResult> {
    problem.check()?;
    let prep = Prepared::new(problem);
    let (x, y) = (prep.x.as_ref(), prep.y.as_ref());
    let lambda = problem.lambda;
    let tol = problem.tol;
    let inner_tol = 0.5 * tol;

    let mut beta = DVector::zeros(x.ncols());
    let mut sigma = noise_level(y);
    let mut cycles = 0;
    let mut status = FitStatus::MaxIterExceeded;
    let mut resid = y.clone();

    if sigma < SIGMA_FLOOR {
        status = FitStatus::ZeroResidualDegenerate;
    } else {
        for _ in 0..problem.max_iter {
            let budget = problem.max_iter.saturating_sub(cycles).max(1);
            let out = coordinate_descent(x, y, lambda * sigma, inner_tol, budget, Some(&beta), None);
            cycles += out.cycles;
            beta = out.beta;
            resid = out.resid;
            let next = noise_level(&resid);
            if next < SIGMA_FLOOR {
                sigma = next;
                status = FitStatus::ZeroResidualDegenerate;
                break;
            }
            let settled = (next - sigma).abs() < tol * sigma.max(1.0);
            sigma = next;
            if settled && out.converged && sqrt_lasso_kkt_residual(x, &resid, &beta, lambda) < tol {
                status = FitStatus::Converged;
                break;
            }
            if cycles >= problem.max_iter {
                break;
            }
        }
    }

    let kkt_residual = sqrt_lasso_kkt_residual(x, &resid, &beta, lambda);
    let objective = sqrt_lasso_objective(&resid, &beta, lambda);
    let (beta, intercept) = prep.restore(beta);
    Ok(FitResult {
        beta,
        intercept,
        objective,
        kkt_residual,
        iters: cycles,
        converged: status == FitStatus::Converged,
        status,
        sigma_hat: Some(sigma),
    })
}
