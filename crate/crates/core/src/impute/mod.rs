//! Conditional-expectation imputation engines.
//!
//! Every imputer copies observed cells verbatim and fills missing cells with
//! (an estimate of) `E{X_ik | observed entries of row i}` under a zero-mean
//! Gaussian model. Rows are imputed independently and, with the `parallel`
//! feature, concurrently.

mod ar1;
mod blanket;
mod covariance;
mod graphical;

pub use ar1::{ar1_impute, ar1_impute_row, estimate_phi, Ar1Params};
pub use blanket::{markov_blanket, BlanketResult, RowBlankets};
pub use covariance::{estimate_covariance_mcar, CovarianceEstimate};
pub use graphical::{graphical_impute, CovarianceSource};

use nalgebra::DMatrix;

use crate::error::Result;
use crate::model::{ImputeSource, ImputedMatrix, MaskedMatrix};

/// Replace every missing cell by 0, the conditional mean under an identity
/// covariance.
pub fn zero_impute(z: &MaskedMatrix) -> ImputedMatrix {
    let data = DMatrix::from_fn(z.nrows(), z.ncols(), |i, j| z.observed(i, j).unwrap_or(0.0));
    ImputedMatrix::from_parts(z, data, ImputeSource::ZeroImpute)
        .expect("zero imputation preserves observed entries")
}

/// Run `row_fn` on every row index and stack the results into a matrix.
pub(crate) fn impute_rows<F>(n: usize, p: usize, row_fn: F) -> Result<DMatrix<f64>>
where
    F: Fn(usize) -> Result<Vec<f64>> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(&row_fn).collect::<Result<_>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..n).map(&row_fn).collect::<Result<_>>()?;

    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}
