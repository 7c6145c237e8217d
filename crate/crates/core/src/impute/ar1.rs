//! Imputation for rows drawn from a stationary AR(1) chain.
//!
//! By the Markov property the conditional mean of a missing coordinate only
//! involves the nearest observed coordinate on each side.

use crate::error::{Error, Result};
use crate::model::{ImputeSource, ImputedMatrix, MaskedMatrix};

/// Largest `|phi|` returned by [`estimate_phi`].
pub const PHI_CLAMP: f64 = 1.0 - 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ar1Params {
    phi: f64,
    /// Whether `phi` came from [`estimate_phi`] rather than being known.
    pub estimated: bool,
}

impl Ar1Params {
    pub fn new(phi: f64, estimated: bool) -> Result<Self> {
        if phi.is_finite() && phi.abs() < 1.0 {
            Ok(Self { phi, estimated })
        } else {
            Err(Error::PhiOutOfRange(phi))
        }
    }

    pub fn known(phi: f64) -> Result<Self> {
        Self::new(phi, false)
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Moment estimator of the AR(1) coefficient from MCAR data:
///
/// ```text
///        (1 / (alpha^2 n p)) sum_i sum_{a<p-1} X_ia X_i,a+1 M_ia M_i,a+1
/// phi = -----------------------------------------------------------------
///        (1 / (alpha n p))   sum_i sum_{a<p-1} X_ia^2 M_ia
/// ```
///
/// Both sums run over the first `p - 1` columns. The result is clamped to
/// `[-PHI_CLAMP, PHI_CLAMP]`.
pub fn estimate_phi(z: &MaskedMatrix, alpha: f64) -> Result<Ar1Params> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    let (n, p) = (z.nrows(), z.ncols());
    let mut lag1 = 0.0;
    let mut square = 0.0;
    for i in 0..n {
        for a in 0..p.saturating_sub(1) {
            if let Some(x) = z.observed(i, a) {
                square += x * x;
                if let Some(next) = z.observed(i, a + 1) {
                    lag1 += x * next;
                }
            }
        }
    }
    if square == 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    let np = (n * p) as f64;
    let numerator = lag1 / (alpha * alpha * np);
    let denominator = square / (alpha * np);
    let phi = (numerator / denominator).clamp(-PHI_CLAMP, PHI_CLAMP);
    Ar1Params::new(phi, true)
}

/// Conditional mean of `X_k` for a stationary AR(1) row.
///
/// `left = (d1, x_L)` is the nearest observed entry `d1` steps to the left,
/// `right = (d2, x_R)` likewise on the right. With both sides present:
///
/// ```text
/// phi^d1 (1 - phi^(2 d2)) x_L + phi^d2 (1 - phi^(2 d1)) x_R
/// ---------------------------------------------------------
///                  1 - phi^(2 (d1 + d2))
/// ```
///
/// which is the two-sided closed form with the `phi^-d` factors cleared. One
/// side only gives `phi^d x`; neither side gives the mean, 0.
pub(crate) fn conditional_mean(phi: f64, left: Option<(usize, f64)>, right: Option<(usize, f64)>) -> f64 {
    match (left, right) {
        (Some((d1, xl)), Some((d2, xr))) => {
            let p1 = phi.powi(d1 as i32);
            let p2 = phi.powi(d2 as i32);
            let denom = 1.0 - (p1 * p2) * (p1 * p2);
            (p1 * (1.0 - p2 * p2) * xl + p2 * (1.0 - p1 * p1) * xr) / denom
        }
        (Some((d, x)), None) | (None, Some((d, x))) => phi.powi(d as i32) * x,
        (None, None) => 0.0,
    }
}

/// Impute one row given as `Option`s (`None` = missing).
pub fn ar1_impute_row(row: &[Option<f64>], phi: f64) -> Vec<f64> {
    let p = row.len();
    let mut out = vec![0.0; p];
    // Nearest observed index at or to the right of each position.
    let mut next_obs = vec![None; p + 1];
    for k in (0..p).rev() {
        next_obs[k] = if row[k].is_some() {
            Some(k)
        } else {
            next_obs[k + 1]
        };
    }
    let mut last_obs: Option<usize> = None;
    for k in 0..p {
        match row[k] {
            Some(v) => {
                out[k] = v;
                last_obs = Some(k);
            }
            None => {
                let left = last_obs.map(|l| (k - l, row[l].unwrap()));
                let right = next_obs[k + 1].map(|r| (r - k, row[r].unwrap()));
                out[k] = conditional_mean(phi, left, right);
            }
        }
    }
    out
}

/// Fill every missing entry with its AR(1) conditional mean under `params`.
pub fn ar1_impute(z: &MaskedMatrix, params: Ar1Params) -> Result<ImputedMatrix> {
    let phi = params.phi();
    if !(phi.is_finite() && phi.abs() < 1.0) {
        return Err(Error::PhiOutOfRange(phi));
    }
    let data = super::impute_rows(z.nrows(), z.ncols(), |i| Ok(ar1_impute_row(&z.row(i), phi)))?;
    let source = if params.estimated {
        ImputeSource::Ar1Estimated
    } else {
        ImputeSource::Ar1Exact
    };
    ImputedMatrix::from_parts(z, data, source)
}
