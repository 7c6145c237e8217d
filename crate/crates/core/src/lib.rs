//! Sparse linear regression with missing covariates.
//!
//! The pipeline: impute missing entries of the design by their conditional
//! expectation given the observed entries of the same row (zero imputation,
//! AR(1), or Gaussian graphical model with a known sparsity pattern), then
//! run the LASSO or the square-root LASSO on the imputed design.
//!
//! ```
//! use missreg::{impute, solvers, synth, RegressionProblem, RngSeed};
//!
//! let seed = RngSeed(7);
//! let x = synth::gen_identity_gaussian(60, 40, seed.derive(0)).unwrap();
//! let (beta0, _) = synth::gen_beta0_sqrt_sparsity(40).unwrap();
//! let y = synth::gen_response(&x, &beta0, 0.0, seed.derive(1)).unwrap();
//! let z = synth::apply_mcar(&x, 0.9, seed.derive(2)).unwrap();
//! let design = impute::zero_impute(&z);
//! let fit = solvers::fit_lasso(&RegressionProblem::new(design, y, 0.05).unwrap()).unwrap();
//! assert!(fit.converged);
//! ```

pub mod error;
pub mod experiments;
pub mod impute;
mod linalg;
pub mod model;
pub mod solvers;
pub mod synth;

pub use error::{Error, ErrorKind, Result};
pub use model::{
    validate, CovarianceKind, FitResult, FitStatus, ImputeSource, ImputedMatrix, MaskedMatrix, ModelTruth,
    RegressionProblem, SolverKind, SparsityGraph,
};
pub use synth::RngSeed;
