use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::MaskedMatrix;

/// Plug-in covariance built from MCAR data.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceEstimate {
    pub sigma_tilde: DMatrix<f64>,
    pub alpha_used: f64,
}

/// Unbiased covariance estimate under MCAR(`alpha`), from the zero-imputed
/// design `X0`:
///
/// `S = X0^T X0 / (alpha^2 n) - (1 - alpha) / (alpha^2 n) * diag(X0^T X0)`.
///
/// Off-diagonal products are observed with probability `alpha^2`, squares
/// with probability `alpha`, which is what the two scalings correct for.
pub fn estimate_covariance_mcar(z: &MaskedMatrix, alpha: f64) -> Result<CovarianceEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let n = z.nrows();
    if n == 0 {
        return Err(Error::InvalidDimension("no rows".into()));
    }
    let x0 = super::zero_impute(z).into_data();
    let gram = x0.tr_mul(&x0);
    let scale = 1.0 / (alpha * alpha * n as f64);
    let mut sigma = gram * scale;
    let correction = (1.0 - alpha) * scale;
    for a in 0..sigma.nrows() {
        let diag_sum: f64 = x0.column(a).iter().map(|v| v * v).sum();
        sigma[(a, a)] -= correction * diag_sum;
    }
    let sigma_tilde = (&sigma + sigma.transpose()) * 0.5;
    Ok(CovarianceEstimate {
        sigma_tilde,
        alpha_used: alpha,
    })
}
