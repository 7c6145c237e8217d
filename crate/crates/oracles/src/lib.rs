//! Brute-force reference implementations for checking `missreg`.
//!
//! Everything here is deliberately slow and written without reference to the
//! optimized code it checks: dense linear algebra instead of blanket solves,
//! path enumeration instead of breadth-first search, proximal gradient
//! instead of coordinate descent.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use missreg::{FitResult, FitStatus, RegressionProblem, RngSeed, SparsityGraph};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    SingularSystem,
    Shape(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::SingularSystem => f.write_str("observed covariance block is singular"),
            OracleError::Shape(m) => write!(f, "shape mismatch: {m}"),
        }
    }
}

impl std::error::Error for OracleError {}

/// `E[X_node | X_O = row_values[O]]` for a centered Gaussian with covariance
/// `sigma`, where `O` is every observed coordinate of the row. Solved with a
/// dense LU factorization of `Sigma_OO`.
pub fn dense_conditional_mean(
    sigma: &DMatrix<f64>,
    row_values: &[f64],
    mask_row: &[bool],
    node: usize,
) -> Result<f64, OracleError> {
    let p = sigma.nrows();
    if sigma.ncols() != p || row_values.len() != p || mask_row.len() != p || node >= p {
        return Err(OracleError::Shape(format!(
            "sigma {}x{}, row {}, mask {}, node {node}",
            sigma.nrows(),
            sigma.ncols(),
            row_values.len(),
            mask_row.len()
        )));
    }
    let obs: Vec<usize> = (0..p).filter(|&j| mask_row[j]).collect();
    if obs.is_empty() {
        return Ok(0.0);
    }
    let k = obs.len();
    let s_oo = DMatrix::from_fn(k, k, |a, b| sigma[(obs[a], obs[b])]);
    let x_o = DVector::from_fn(k, |a, _| row_values[obs[a]]);
    let w = s_oo.lu().solve(&x_o).ok_or(OracleError::SingularSystem)?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(OracleError::SingularSystem);
    }
    Ok(obs
        .iter()
        .zip(w.iter())
        .map(|(&j, wj)| sigma[(node, j)] * wj)
        .sum())
}

/// First observed vertex of every simple path that starts at `node` and
/// otherwise only passes through missing vertices. Exponential; meant for
/// `p <= 20`.
pub fn exhaustive_blanket(graph: &SparsityGraph, mask_row: &[bool], node: usize) -> BTreeSet<usize> {
    let mut found = BTreeSet::new();
    let mut on_path = vec![false; graph.p()];
    on_path[node] = true;
    walk(graph, mask_row, node, &mut on_path, &mut found);
    found
}

fn walk(graph: &SparsityGraph, mask: &[bool], at: usize, on_path: &mut [bool], found: &mut BTreeSet<usize>) {
    for &next in graph.neighbors(at) {
        if on_path[next] {
            continue;
        }
        if mask[next] {
            found.insert(next);
        } else {
            on_path[next] = true;
            walk(graph, mask, next, on_path, found);
            on_path[next] = false;
        }
    }
}

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
fn top_eigenvalue(g: &DMatrix<f64>) -> f64 {
    let p = g.nrows();
    let mut v = DVector::from_fn(p, |i, _| 1.0 + 0.01 * i as f64);
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..10_000 {
        let w = g * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - est).abs() <= 1e-15 * next.abs() {
            est = next;
            break;
        }
        est = next;
    }
    est
}

fn shrink(z: f64, t: f64) -> f64 {
    z.signum() * (z.abs() - t).max(0.0)
}

/// ISTA on `(1/2n) ||y - X b||^2 + lambda ||b||_1` from `b = 0`, step `1/L`
/// with `L` the top eigenvalue of `X^T X / n`. Runs `iters` steps, stopping
/// early only at an exact fixed point. Centering and standardization flags
/// on the problem are ignored.
///
/// `kkt_residual` is the largest subgradient violation at the returned point.
pub fn prox_grad_lasso(problem: &RegressionProblem, iters: usize) -> FitResult {
    let x = problem.design.data();
    let y = &problem.response;
    let lambda = problem.lambda;
    let n = x.nrows() as f64;
    let gram = x.tr_mul(x) / n;
    let xty = x.tr_mul(y) / n;
    // Power iteration converges from below; pad slightly so 1/L stays safe.
    let l = top_eigenvalue(&gram) * (1.0 + 1e-9);
    let mut beta = DVector::zeros(x.ncols());
    let mut done = 0;
    if l > 0.0 {
        let step = 1.0 / l;
        for _ in 0..iters.max(1) {
            done += 1;
            let grad = &gram * &beta - &xty;
            let next = (&beta - grad * step).map(|z| shrink(z, lambda * step));
            if next == beta {
                break;
            }
            beta = next;
        }
    }
    let resid = y - x * &beta;
    let objective = 0.5 * resid.norm_squared() / n + lambda * beta.abs().sum();
    let grad = -(x.tr_mul(&resid)) / n;
    let kkt_residual = grad
        .iter()
        .zip(beta.iter())
        .map(|(&g, &b)| {
            if b == 0.0 {
                (g.abs() - lambda).max(0.0)
            } else {
                (g + lambda * b.signum()).abs()
            }
        })
        .fold(0.0, f64::max);
    FitResult {
        beta,
        intercept: 0.0,
        objective,
        kkt_residual,
        iters: done,
        converged: true,
        status: FitStatus::Converged,
        sigma_hat: None,
    }
}

/// Which blanket-size variable to simulate on the `d_max`-regular tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeVariant {
    /// `S` below a vertex entered from its parent: the vertex itself is open
    /// with probability `alpha` (size 1), otherwise the sizes of its
    /// `d_max - 1` children add up.
    Downward,
    /// Blanket of a missing root: sum of `Downward` over all `d_max` children.
    Root,
}

pub const TREE_DEPTH_CAP: usize = 60;
/// Closed-vertex population at which a generation is declared runaway.
const POPULATION_CAP: u64 = 1 << 40;

#[derive(Debug, Clone, PartialEq)]
pub struct TreeSimulation {
    pub d_max: usize,
    pub alpha: f64,
    pub variant: TreeVariant,
    /// `(1 - alpha)(d_max - 1) >= 1`: sizes need not be finite.
    pub supercritical: bool,
    /// Blanket sizes of the trials that finished within the depth cap.
    pub samples: Vec<u64>,
    /// Trials still growing at the depth cap.
    pub truncated: usize,
}

impl TreeSimulation {
    pub fn histogram(&self) -> BTreeMap<u64, usize> {
        let mut h = BTreeMap::new();
        for &s in &self.samples {
            *h.entry(s).or_insert(0) += 1;
        }
        h
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    pub fn moment(&self, k: i32) -> f64 {
        self.samples.iter().map(|&s| (s as f64).powi(k)).sum::<f64>() / self.samples.len() as f64
    }

    /// Standard error of the sample mean.
    pub fn std_error(&self) -> f64 {
        let m = self.samples.len() as f64;
        let mean = self.mean();
        let var = self
            .samples
            .iter()
            .map(|&s| (s as f64 - mean).powi(2))
            .sum::<f64>()
            / (m - 1.0);
        (var / m).sqrt()
    }

    /// Empirical `P(S >= k)` over finished trials.
    pub fn survival(&self, k: u64) -> f64 {
        self.samples.iter().filter(|&&s| s >= k).count() as f64 / self.samples.len() as f64
    }
}

/// Simulate blanket sizes generation by generation: with `c` closed
/// vertices at some depth, their `c (d_max - 1)` children split into
/// `Binomial(c (d_max - 1), alpha)` open ones (each adding 1 to the size)
/// and closed ones that branch further.
pub fn blanket_tree_simulator(
    d_max: usize,
    alpha: f64,
    trials: usize,
    seed: RngSeed,
    variant: TreeVariant,
) -> TreeSimulation {
    assert!(d_max >= 1, "d_max must be >= 1");
    assert!((0.0..=1.0).contains(&alpha), "alpha must be in [0, 1]");
    let mut rng = seed.rng();
    let mut samples = Vec::with_capacity(trials);
    let mut truncated = 0;
    let branch = (d_max - 1) as u64;

    for _ in 0..trials {
        let (mut size, mut closed, mut fanout) = match variant {
            TreeVariant::Downward => {
                if rng.random::<f64>() < alpha {
                    samples.push(1);
                    continue;
                }
                (0u64, 1u64, branch)
            }
            TreeVariant::Root => (0, 1, d_max as u64),
        };
        let mut depth = 0;
        while closed > 0 && depth < TREE_DEPTH_CAP && closed < POPULATION_CAP {
            let children = closed * fanout;
            let open = Binomial::new(children, alpha)
                .expect("valid binomial")
                .sample(&mut rng);
            size += open;
            closed = children - open;
            fanout = branch;
            depth += 1;
        }
        if closed == 0 {
            samples.push(size);
        } else {
            truncated += 1;
        }
    }

    TreeSimulation {
        d_max,
        alpha,
        variant,
        supercritical: (1.0 - alpha) * (d_max as f64 - 1.0) >= 1.0,
        samples,
        truncated,
    }
}
