//! LASSO and square-root LASSO solvers and the regularization schedules.

mod lambda;
mod lasso;
mod sqrt_lasso;

pub use lambda::{lambda_value, LambdaSchedule, ScheduleInputs, ScheduleKind};
pub use lasso::{fit_lasso, fit_lasso_traced, lasso_kkt_residual, lasso_objective, soft_threshold};
pub use sqrt_lasso::{fit_sqrt_lasso, sqrt_lasso_kkt_residual, sqrt_lasso_objective, SIGMA_FLOOR};

use crate::error::Result;
use crate::model::{FitResult, RegressionProblem, SolverKind};

/// Dispatch on `problem.solver`.
pub fn fit(problem: &RegressionProblem) -> Result<FitResult> {
    match problem.solver {
        SolverKind::Lasso => fit_lasso(problem),
        SolverKind::SqrtLasso => fit_sqrt_lasso(problem),
    }
}
