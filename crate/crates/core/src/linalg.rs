//! Small dense solvers for the per-entry systems that imputation needs.
//!
//! Systems here are tiny (a Markov blanket rarely exceeds a few dozen
//! nodes), so plain row-major `Vec<f64>` storage is used.

/// In-place Cholesky of a symmetric `k x k` row-major matrix. On success the
/// lower triangle holds `L` with `A = L L^T`. Returns `false` when a pivot is
/// not strictly positive.
pub(crate) fn cholesky_in_place(a: &mut [f64], k: usize) -> bool {
    for j in 0..k {
        let mut d = a[j * k + j];
        for m in 0..j {
            d -= a[j * k + m] * a[j * k + m];
        }
        if !(d.is_finite() && d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * k + j] = d;
        for i in (j + 1)..k {
            let mut s = a[i * k + j];
            for m in 0..j {
                s -= a[i * k + m] * a[j * k + m];
            }
            a[i * k + j] = s / d;
        }
    }
    true
}

/// Solve `L L^T x = b` given the factor from [`cholesky_in_place`].
pub(crate) fn cholesky_solve(l: &[f64], k: usize, b: &mut [f64]) {
    for i in 0..k {
        let mut s = b[i];
        for m in 0..i {
            s -= l[i * k + m] * b[m];
        }
        b[i] = s / l[i * k + i];
    }
    for i in (0..k).rev() {
        let mut s = b[i];
        for m in (i + 1)..k {
            s -= l[m * k + i] * b[m];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Gaussian elimination with partial pivoting. Returns `false` if a pivot
/// falls below `1e-14` times the largest absolute entry.
pub(crate) fn lu_solve(a: &mut [f64], k: usize, b: &mut [f64]) -> bool {
    let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !(scale.is_finite() && scale > 0.0) {
        return false;
    }
    let eps = 1e-14 * scale;
    for col in 0..k {
        let (piv, pval) = (col..k)
            .map(|r| (r, a[r * k + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pval < eps {
            return false;
        }
        if piv != col {
            for c in 0..k {
                a.swap(piv * k + c, col * k + c);
            }
            b.swap(piv, col);
        }
        let d = a[col * k + col];
        for r in (col + 1)..k {
            let f = a[r * k + col] / d;
            if f != 0.0 {
                for c in col..k {
                    a[r * k + c] -= f * a[col * k + c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for r in (0..k).rev() {
        let mut s = b[r];
        for c in (r + 1)..k {
            s -= a[r * k + c] * b[c];
        }
        b[r] = s / a[r * k + r];
    }
    true
}

/// Solve the symmetric system `A x = b`.
///
/// Tries Cholesky, then Cholesky on `A + (1e-10 * tr(A) / k) I`, then
/// partial-pivot LU on the unmodified `A` (plug-in covariance estimates can
/// be indefinite yet invertible). Returns `None` if all three fail.
pub(crate) fn solve_symmetric(a: &[f64], k: usize, b: &[f64]) -> Option<Vec<f64>> {
    if k == 0 {
        return Some(Vec::new());
    }
    let mut work = a.to_vec();
    let mut x = b.to_vec();
    if cholesky_in_place(&mut work, k) {
        cholesky_solve(&work, k, &mut x);
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }

    let trace: f64 = (0..k).map(|i| a[i * k + i]).sum();
    let ridge = 1e-10 * trace.abs() / k as f64;
    work.copy_from_slice(a);
    for i in 0..k {
        work[i * k + i] += ridge;
    }
    x.copy_from_slice(b);
    if cholesky_in_place(&mut work, k) {
        cholesky_solve(&work, k, &mut x);
        if x.iter().all(|v| v.is_finite()) {
            return Some(x);
        }
    }

    work.copy_from_slice(a);
    x.copy_from_slice(b);
    if lu_solve(&mut work, k, &mut x) && x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}
