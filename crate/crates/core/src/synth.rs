//! Synthetic designs, masks, regression vectors and responses.
//!
//! All generators are pure functions of an [`RngSeed`]. Matrices are filled
//! in row-major order so that a given seed produces the same numbers
//! regardless of the storage layout.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{MaskedMatrix, SparsityGraph};

/// Seed for one generator call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RngSeed(pub u64);

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngSeed {
    /// Child seed for sub-stream `stream`: `splitmix(seed ^ splitmix(stream))`.
    ///
    /// Depends only on the two inputs, so trial `i` of a sweep gets the same
    /// seed no matter which thread or in what order it runs.
    pub fn derive(self, stream: u64) -> RngSeed {
        RngSeed(splitmix64(self.0 ^ splitmix64(stream)))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for RngSeed {
    fn from(v: u64) -> Self {
        RngSeed(v)
    }
}

fn check_dims(n: usize, p: usize) -> Result<()> {
    if n == 0 || p == 0 {
        return Err(Error::InvalidDimension(format!(
            "n={n}, p={p}; both must be >= 1"
        )));
    }
    Ok(())
}

fn check_phi(phi: f64) -> Result<()> {
    if phi.is_finite() && phi.abs() < 1.0 {
        Ok(())
    } else {
        Err(Error::PhiOutOfRange(phi))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// `n x p` matrix of i.i.d. standard normals.
pub fn gen_identity_gaussian(n: usize, p: usize, seed: RngSeed) -> Result<DMatrix<f64>> {
    check_dims(n, p)?;
    let mut rng = seed.rng();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            x[(i, j)] = rng.sample(StandardNormal);
        }
    }
    Ok(x)
}

/// Rows are `p` consecutive points of the stationary AR(1) chain
/// `X_t = phi X_{t-1} + N(0, 1)`, started at `X_0 ~ N(0, 1/(1-phi^2))`.
pub fn gen_ar1(n: usize, p: usize, phi: f64, seed: RngSeed) -> Result<DMatrix<f64>> {
    check_dims(n, p)?;
    check_phi(phi)?;
    let mut rng = seed.rng();
    let start_sd = 1.0 / (1.0 - phi * phi).sqrt();
    let mut x = DMatrix::zeros(n, p);
    for i in 0..n {
        let z: f64 = rng.sample(StandardNormal);
        let mut prev = start_sd * z;
        x[(i, 0)] = prev;
        for j in 1..p {
            let z: f64 = rng.sample(StandardNormal);
            prev = phi * prev + z;
            x[(i, j)] = prev;
        }
    }
    Ok(x)
}

/// Population covariance of the stationary AR(1) chain:
/// `phi^|i-j| / (1 - phi^2)`.
pub fn ar1_covariance(p: usize, phi: f64) -> Result<DMatrix<f64>> {
    check_phi(phi)?;
    let scale = 1.0 / (1.0 - phi * phi);
    Ok(DMatrix::from_fn(p, p, |i, j| {
        scale * phi.powi(i.abs_diff(j) as i32)
    }))
}

/// Banded precision `Omega_ij = phi^|i-j|` for `|i-j| <= bandwidth`, else 0.
pub fn banded_precision(p: usize, phi: f64, bandwidth: usize) -> DMatrix<f64> {
    DMatrix::from_fn(p, p, |i, j| {
        let d = i.abs_diff(j);
        if d <= bandwidth {
            phi.powi(d as i32)
        } else {
            0.0
        }
    })
}

/// Output of [`gen_banded_precision`].
#[derive(Debug, Clone)]
pub struct BandedDesign {
    pub x: DMatrix<f64>,
    pub graph: SparsityGraph,
    /// `Sigma = Omega^{-1}`.
    pub sigma: DMatrix<f64>,
    pub omega: DMatrix<f64>,
}

/// Population quantities of the banded-precision model, without sampling.
#[derive(Debug, Clone)]
pub struct BandedModel {
    pub omega: DMatrix<f64>,
    pub sigma: DMatrix<f64>,
    pub graph: SparsityGraph,
    /// Lower Cholesky factor of `Omega`.
    chol: DMatrix<f64>,
}

impl BandedModel {
    /// Fails with [`Error::NotPositiveDefinite`] if the Cholesky factorization
    /// of `Omega` breaks down.
    pub fn new(p: usize, phi: f64, bandwidth: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidDimension("p must be >= 1".into()));
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter(format!("phi must be finite, got {phi}")));
        }
        let omega = banded_precision(p, phi, bandwidth);
        let chol = omega.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
        let sigma = chol.inverse();
        let sigma = (&sigma + sigma.transpose()) * 0.5;
        let graph = SparsityGraph::from_precision(&omega)?;
        Ok(Self {
            omega,
            sigma,
            graph,
            chol: chol.l(),
        })
    }

    /// Draw `n` rows i.i.d. `N(0, Omega^{-1})` as `x = L^{-T} z` with
    /// `Omega = L L^T`.
    pub fn sample(&self, n: usize, seed: RngSeed) -> Result<DMatrix<f64>> {
        let p = self.omega.nrows();
        check_dims(n, p)?;
        let mut rng = seed.rng();
        let mut x = DMatrix::zeros(n, p);
        let mut z = DVector::zeros(p);
        for i in 0..n {
            for v in z.iter_mut() {
                *v = rng.sample(StandardNormal);
            }
            let row = self
                .chol
                .tr_solve_lower_triangular(&z)
                .ok_or(Error::NotPositiveDefinite)?;
            x.row_mut(i).copy_from(&row.transpose());
        }
        Ok(x)
    }
}

/// Sample `n` rows from the banded-precision Gaussian graphical model.
pub fn gen_banded_precision(
    n: usize,
    p: usize,
    phi: f64,
    bandwidth: usize,
    seed: RngSeed,
) -> Result<BandedDesign> {
    check_dims(n, p)?;
    let model = BandedModel::new(p, phi, bandwidth)?;
    let x = model.sample(n, seed)?;
    Ok(BandedDesign {
        x,
        graph: model.graph,
        sigma: model.sigma,
        omega: model.omega,
    })
}

/// Missing completely at random: each entry is observed independently with
/// probability `alpha`.
///
/// Uses one uniform draw per cell in row-major order, entry observed iff
/// `u < alpha`. With a fixed seed the masks for increasing `alpha` are
/// therefore nested.
pub fn apply_mcar(full: &DMatrix<f64>, alpha: f64, seed: RngSeed) -> Result<MaskedMatrix> {
    check_alpha(alpha)?;
    let (n, p) = full.shape();
    let mut rng = seed.rng();
    let mut mask = DMatrix::from_element(n, p, false);
    for i in 0..n {
        for j in 0..p {
            let u: f64 = rng.random();
            mask[(i, j)] = u < alpha;
        }
    }
    MaskedMatrix::new(full.clone(), mask)
}

/// Distribution of one row's observation pattern for missing-not-at-random
/// masks. Patterns never depend on the data values.
#[derive(Debug, Clone, PartialEq)]
pub enum PatternDist {
    /// Every row gets this pattern.
    PointMass(Vec<bool>),
    /// Coordinate `j` observed independently with probability `probs[j]`.
    Bernoulli(Vec<f64>),
    /// Pick pattern `k` with probability proportional to `weights[k]`.
    Mixture(Vec<(f64, Vec<bool>)>),
}

impl PatternDist {
    /// Coordinates independently observed with the same probability.
    pub fn iid(p: usize, alpha: f64) -> Self {
        PatternDist::Bernoulli(vec![alpha; p])
    }

    /// First `observed` coordinates present, the rest missing.
    pub fn prefix_observed(p: usize, observed: usize) -> Self {
        PatternDist::PointMass((0..p).map(|j| j < observed).collect())
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            PatternDist::PointMass(v) => Some(v.len()),
            PatternDist::Bernoulli(v) => Some(v.len()),
            PatternDist::Mixture(c) => c.first().map(|(_, v)| v.len()),
        }
    }

    fn check(&self) -> Result<()> {
        match self {
            PatternDist::PointMass(_) => Ok(()),
            PatternDist::Bernoulli(probs) => {
                if probs.iter().all(|q| (0.0..=1.0).contains(q)) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(
                        "Bernoulli probabilities must lie in [0, 1]".into(),
                    ))
                }
            }
            PatternDist::Mixture(components) => {
                let p = self.dim().unwrap_or(0);
                let total: f64 = components.iter().map(|(w, _)| *w).sum();
                if components.is_empty()
                    || components.iter().any(|(w, v)| w.is_nan() || *w < 0.0 || v.len() != p)
                    || !(total > 0.0 && total.is_finite())
                {
                    Err(Error::InvalidParameter("invalid mixture of patterns".into()))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<bool> {
        match self {
            PatternDist::PointMass(v) => v.clone(),
            PatternDist::Bernoulli(probs) => probs
                .iter()
                .map(|&q| {
                    let u: f64 = rng.random();
                    u < q
                })
                .collect(),
            PatternDist::Mixture(components) => {
                let total: f64 = components.iter().map(|(w, _)| *w).sum();
                let mut u = rng.random::<f64>() * total;
                for (w, v) in components {
                    if u < *w {
                        return v.clone();
                    }
                    u -= w;
                }
                components.last().expect("nonempty mixture").1.clone()
            }
        }
    }
}

/// Mask whose rows are i.i.d. draws from `pattern_dist`.
pub fn apply_mnar_rowpattern(
    full: &DMatrix<f64>,
    pattern_dist: &PatternDist,
    seed: RngSeed,
) -> Result<MaskedMatrix> {
    pattern_dist.check()?;
    let (n, p) = full.shape();
    if pattern_dist.dim() != Some(p) {
        return Err(Error::DimensionMismatch(format!(
            "pattern length {:?} does not match p={p}",
            pattern_dist.dim()
        )));
    }
    let mut rng = seed.rng();
    let mut mask = DMatrix::from_element(n, p, false);
    for i in 0..n {
        let row = pattern_dist.sample(&mut rng);
        for (j, m) in row.into_iter().enumerate() {
            mask[(i, j)] = m;
        }
    }
    MaskedMatrix::new(full.clone(), mask)
}

/// `ceil(sqrt(p))` in exact integer arithmetic.
pub fn ceil_sqrt(p: usize) -> usize {
    let mut s = (p as f64).sqrt() as usize;
    while s * s > p {
        s -= 1;
    }
    while s * s < p {
        s += 1;
    }
    s
}

/// First `ceil(sqrt(p))` coefficients equal to one, the rest zero.
pub fn gen_beta0_sqrt_sparsity(p: usize) -> Result<(DVector<f64>, usize)> {
    if p == 0 {
        return Err(Error::InvalidDimension("p must be >= 1".into()));
    }
    let s = ceil_sqrt(p);
    Ok((DVector::from_fn(p, |j, _| if j < s { 1.0 } else { 0.0 }), s))
}

/// `y = X beta0 + sigma g` with `g` i.i.d. standard normal.
pub fn gen_response(
    x: &DMatrix<f64>,
    beta0: &DVector<f64>,
    sigma: f64,
    seed: RngSeed,
) -> Result<DVector<f64>> {
    if x.ncols() != beta0.len() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} columns, beta0 has {} entries",
            x.ncols(),
            beta0.len()
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    let mut y = x * beta0;
    if sigma > 0.0 {
        let mut rng = seed.rng();
        for v in y.iter_mut() {
            let g: f64 = rng.sample(StandardNormal);
            *v += sigma * g;
        }
    }
    Ok(y)
}

/// Standard normal vector, used by callers that need extra noise streams.
pub fn gen_standard_normal(len: usize, seed: RngSeed) -> DVector<f64> {
    let mut rng = seed.rng();
    DVector::from_fn(len, |_, _| StandardNormal.sample(&mut rng))
}
