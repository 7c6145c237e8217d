//! Domain types shared across the crate.
//!
//! Matrices are dense `nalgebra` matrices. Missingness is carried by an
//! explicit boolean mask rather than a sentinel value, and [`MaskedMatrix`]
//! refuses to hand out values at missing positions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observed data `Z` together with its missingness mask (`true` = observed).
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    values: DMatrix<f64>,
    mask: DMatrix<bool>,
}

/// Check the invariants of a (values, mask) pair without building a matrix.
pub fn validate(values: &DMatrix<f64>, mask: &DMatrix<bool>) -> Result<()> {
    if values.shape() != mask.shape() {
        return Err(Error::DimensionMismatch(format!(
            "values are {}x{} but mask is {}x{}",
            values.nrows(),
            values.ncols(),
            mask.nrows(),
            mask.ncols()
        )));
    }
    for j in 0..values.ncols() {
        for i in 0..values.nrows() {
            if mask[(i, j)] && !values[(i, j)].is_finite() {
                return Err(Error::NonFiniteObservedEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

impl MaskedMatrix {
    /// Build from raw values and a mask. Values at missing positions are
    /// discarded.
    pub fn new(mut values: DMatrix<f64>, mask: DMatrix<bool>) -> Result<Self> {
        validate(&values, &mask)?;
        values.zip_apply(&mask, |v, observed| {
            if !observed {
                *v = f64::NAN;
            }
        });
        Ok(Self { values, mask })
    }

    /// A matrix with every entry observed.
    pub fn fully_observed(values: DMatrix<f64>) -> Result<Self> {
        let mask = DMatrix::from_element(values.nrows(), values.ncols(), true);
        Self::new(values, mask)
    }

    /// Build from row-major optional entries; `None` marks a missing cell.
    pub fn from_rows(rows: &[Vec<Option<f64>>]) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != p) {
            return Err(Error::DimensionMismatch(format!(
                "row {i} has {} entries, expected {p}",
                r.len()
            )));
        }
        let values = DMatrix::from_fn(n, p, |i, j| rows[i][j].unwrap_or(f64::NAN));
        let mask = DMatrix::from_fn(n, p, |i, j| rows[i][j].is_some());
        Self::new(values, mask)
    }

    /// Re-check the invariants.
    pub fn validate(&self) -> Result<()> {
        validate(&self.values, &self.mask)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn is_observed(&self, row: usize, col: usize) -> bool {
        self.mask[(row, col)]
    }

    /// Value at an observed position; missing positions are an error.
    pub fn get(&self, row: usize, col: usize) -> Result<f64> {
        if row >= self.nrows() || col >= self.ncols() {
            return Err(Error::OutOfBounds { row, col });
        }
        if !self.mask[(row, col)] {
            return Err(Error::MissingEntry { row, col });
        }
        Ok(self.values[(row, col)])
    }

    /// `Some(value)` when observed, `None` when missing.
    pub fn observed(&self, row: usize, col: usize) -> Option<f64> {
        self.mask[(row, col)].then(|| self.values[(row, col)])
    }

    pub fn mask(&self) -> &DMatrix<bool> {
        &self.mask
    }

    pub fn mask_row(&self, row: usize) -> Vec<bool> {
        (0..self.ncols()).map(|j| self.mask[(row, j)]).collect()
    }

    /// Row `row` with missing entries as `None`.
    pub fn row(&self, row: usize) -> Vec<Option<f64>> {
        (0..self.ncols()).map(|j| self.observed(row, j)).collect()
    }

    pub fn observed_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// Fraction of observed cells; 0 for an empty matrix.
    pub fn observed_fraction(&self) -> f64 {
        let total = self.nrows() * self.ncols();
        if total == 0 {
            0.0
        } else {
            self.observed_count() as f64 / total as f64
        }
    }
}

/// Which procedure filled in the missing cells of an [`ImputedMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ImputeSource {
    /// No imputation took place; the input was dense.
    Complete,
    ZeroImpute,
    Ar1Exact,
    Ar1Estimated,
    GraphicalExact,
    GraphicalEstimated,
}

/// Dense design produced by an imputer. Observed cells are copied verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct ImputedMatrix {
    data: DMatrix<f64>,
    source: ImputeSource,
}

impl ImputedMatrix {
    /// Assemble an imputed design, checking that observed cells were passed
    /// through bit-exactly and that every entry is finite.
    pub fn from_parts(original: &MaskedMatrix, data: DMatrix<f64>, source: ImputeSource) -> Result<Self> {
        if data.shape() != original.values.shape() {
            return Err(Error::DimensionMismatch(
                "imputed data shape differs from the masked input".into(),
            ));
        }
        for j in 0..data.ncols() {
            for i in 0..data.nrows() {
                let v = data[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite("imputed design"));
                }
                if original.mask[(i, j)] && v.to_bits() != original.values[(i, j)].to_bits() {
                    return Err(Error::InvalidParameter(format!(
                        "observed entry ({i}, {j}) was altered by imputation"
                    )));
                }
            }
        }
        Ok(Self { data, source })
    }

    /// Wrap an already dense design (no missing cells).
    pub fn complete(data: DMatrix<f64>) -> Result<Self> {
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("design"));
        }
        Ok(Self {
            data,
            source: ImputeSource::Complete,
        })
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    pub fn source(&self) -> ImputeSource {
        self.source
    }

    /// Observed entries are always copied through unchanged.
    pub fn observed_passthrough(&self) -> bool {
        true
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Lasso,
    SqrtLasso,
}

/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-8;
/// Default cap on full coordinate-descent cycles.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Design, response, penalty and solver settings for one fit.
#[derive(Debug, Clone)]
pub struct RegressionProblem {
    pub design: ImputedMatrix,
    pub response: DVector<f64>,
    pub lambda: f64,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    /// Fit an unpenalized intercept by centering.
    pub intercept: bool,
    /// Scale columns to unit mean square before fitting; coefficients are
    /// reported on the original scale.
    pub standardize: bool,
}

impl RegressionProblem {
    pub fn new(design: ImputedMatrix, response: DVector<f64>, lambda: f64) -> Result<Self> {
        let problem = Self {
            design,
            response,
            lambda,
            solver: SolverKind::Lasso,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            intercept: false,
            standardize: false,
        };
        problem.check()?;
        Ok(problem)
    }

    pub fn with_solver(mut self, solver: SolverKind) -> Self {
        self.solver = solver;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_intercept(mut self, on: bool) -> Self {
        self.intercept = on;
        self
    }

    pub fn with_standardize(mut self, on: bool) -> Self {
        self.standardize = on;
        self
    }

    pub fn check(&self) -> Result<()> {
        if self.design.nrows() != self.response.len() {
            return Err(Error::DimensionMismatch(format!(
                "design has {} rows but response has length {}",
                self.design.nrows(),
                self.response.len()
            )));
        }
        if self.design.nrows() == 0 || self.design.ncols() == 0 {
            return Err(Error::InvalidDimension("empty design".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and nonnegative, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter("max_iter must be positive".into()));
        }
        if self.response.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("response"));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    pub fn p(&self) -> usize {
        self.design.ncols()
    }
}

/// How a fit terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FitStatus {
    Converged,
    /// Iteration budget ran out; the best iterate is returned.
    MaxIterExceeded,
    /// Square-root LASSO reached an exactly interpolating iterate, where its
    /// objective is not differentiable.
    ZeroResidualDegenerate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub beta: DVector<f64>,
    /// Zero unless the problem asked for an intercept.
    pub intercept: f64,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iters: usize,
    pub converged: bool,
    pub status: FitStatus,
    /// Final noise-level estimate `||y - X b|| / sqrt(n)` (square-root LASSO only).
    pub sigma_hat: Option<f64>,
}

impl FitResult {
    pub fn support_size(&self) -> usize {
        self.beta.iter().filter(|b| **b != 0.0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CovarianceKind {
    Identity,
    Ar1 { phi: f64 },
    BandedPrecision { phi: f64, bandwidth: usize },
}

/// Ground truth of a synthetic regression instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTruth {
    pub beta0: Vec<f64>,
    pub s: usize,
    /// `||beta0||_2`.
    pub radius: f64,
    pub sigma: f64,
    pub sigma_x: f64,
    pub alpha: f64,
    pub covariance_kind: CovarianceKind,
}

impl ModelTruth {
    pub fn new(
        beta0: Vec<f64>,
        sigma: f64,
        sigma_x: f64,
        alpha: f64,
        covariance_kind: CovarianceKind,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let s = beta0.iter().filter(|b| **b != 0.0).count();
        let radius = beta0.iter().map(|b| b * b).sum::<f64>().sqrt();
        Ok(Self {
            beta0,
            s,
            radius,
            sigma,
            sigma_x,
            alpha,
            covariance_kind,
        })
    }
}

/// Undirected sparsity pattern of a precision matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityGraph {
    p: usize,
    adjacency: Vec<Vec<usize>>,
    d_max: usize,
}

impl SparsityGraph {
    /// Build from an undirected edge list. Duplicate edges are merged;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges(p: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); p];
        for (a, b) in edges {
            if a >= p || b >= p {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) outside 0..{p}")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at {a}")));
            }
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
            nbrs.dedup();
        }
        let d_max = adjacency.iter().map(Vec::len).max().unwrap_or(0);
        Ok(Self { p, adjacency, d_max })
    }

    /// Off-diagonal nonzero pattern of a square matrix.
    pub fn from_precision(omega: &DMatrix<f64>) -> Result<Self> {
        if !omega.is_square() {
            return Err(Error::DimensionMismatch("precision matrix is not square".into()));
        }
        let p = omega.nrows();
        let mut edges = Vec::new();
        for a in 0..p {
            for b in (a + 1)..p {
                let (x, y) = (omega[(a, b)], omega[(b, a)]);
                if (x != 0.0) != (y != 0.0) {
                    return Err(Error::InvalidGraph(format!(
                        "pattern not symmetric at ({a}, {b})"
                    )));
                }
                if x != 0.0 {
                    edges.push((a, b));
                }
            }
        }
        Self::from_edges(p, edges)
    }

    /// Edges between every pair with `0 < |a - b| <= bandwidth`.
    pub fn banded(p: usize, bandwidth: usize) -> Self {
        let edges = (0..p).flat_map(|a| ((a + 1)..p.min(a + bandwidth + 1)).map(move |b| (a, b)));
        Self::from_edges(p, edges).expect("banded edges are valid")
    }

    /// Path graph `0 - 1 - ... - (p-1)`.
    pub fn chain(p: usize) -> Self {
        Self::banded(p, 1)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Each undirected edge once, as `(a, b)` with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nbrs)| nbrs.iter().filter(move |&&b| b > a).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }
}
