//! Imputation for Gaussian graphical models with a known sparsity pattern.

use nalgebra::DMatrix;

use super::blanket::RowBlankets;
use super::covariance::CovarianceEstimate;
use crate::error::{Error, Result};
use crate::linalg::solve_symmetric;
use crate::model::{ImputeSource, ImputedMatrix, MaskedMatrix, SparsityGraph};

/// Covariance used for the local conditional-mean solves.
#[derive(Debug, Clone, Copy)]
pub enum CovarianceSource<'a> {
    /// Population covariance.
    Exact(&'a DMatrix<f64>),
    /// Plug-in estimate, e.g. from [`super::estimate_covariance_mcar`].
    Estimated(&'a CovarianceEstimate),
}

impl CovarianceSource<'_> {
    fn matrix(&self) -> &DMatrix<f64> {
        match self {
            CovarianceSource::Exact(m) => m,
            CovarianceSource::Estimated(e) => &e.sigma_tilde,
        }
    }
}

/// Fill each missing `(i, k)` with `Sigma_{k,S} Sigma_{S,S}^{-1} X_{i,S}` where
/// `S` is the Markov blanket of `k` in row `i`. An empty blanket gives 0.
///
/// Members of one missing component share `S`, so `w = Sigma_{S,S}^{-1} X_S`
/// is solved once per component and each member takes `Sigma_{k,S} w`.
pub fn graphical_impute(
    z: &MaskedMatrix,
    graph: &SparsityGraph,
    sigma: CovarianceSource<'_>,
) -> Result<ImputedMatrix> {
    let cov = sigma.matrix();
    let p = z.ncols();
    if graph.p() != p {
        return Err(Error::DimensionMismatch(format!(
            "graph has {} nodes, data has {p} columns",
            graph.p()
        )));
    }
    if cov.shape() != (p, p) {
        return Err(Error::DimensionMismatch(format!(
            "covariance is {}x{}, expected {p}x{p}",
            cov.nrows(),
            cov.ncols()
        )));
    }

    let data = super::impute_rows(z.nrows(), p, |i| {
        let mask = z.mask_row(i);
        let mut out: Vec<f64> = (0..p).map(|j| z.observed(i, j).unwrap_or(0.0)).collect();
        let blankets = RowBlankets::compute(graph, &mask)?;
        for (members, blanket) in blankets.components() {
            let k = blanket.len();
            if k == 0 {
                continue;
            }
            let mut sub = vec![0.0; k * k];
            for (r, &a) in blanket.iter().enumerate() {
                for (c, &b) in blanket.iter().enumerate() {
                    sub[r * k + c] = cov[(a, b)];
                }
            }
            let rhs: Vec<f64> = blanket.iter().map(|&a| out[a]).collect();
            let w =
                solve_symmetric(&sub, k, &rhs).ok_or(Error::SingularBlanketSystem { node: members[0] })?;
            for &m in members {
                out[m] = blanket.iter().zip(&w).map(|(&a, wa)| cov[(m, a)] * wa).sum();
            }
        }
        Ok(out)
    })?;

    let source = match sigma {
        CovarianceSource::Exact(_) => ImputeSource::GraphicalExact,
        CovarianceSource::Estimated(_) => ImputeSource::GraphicalEstimated,
    };
    ImputedMatrix::from_parts(z, data, source)
}
