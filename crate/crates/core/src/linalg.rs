//! Numeric backend: dense symmetric eigendecomposition (nalgebra) plus a
//! Sturm-sequence bisection for the smallest eigenvalue of a symmetric
//! tridiagonal matrix. The bisection is the fast path for spectral traces
//! over radius windows, where full decompositions would be wasteful; the two
//! routes cross-check each other in the tests.

use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("ConvergenceFailure: {0}")]
    ConvergenceFailure(String),
}

/// Eigenvalues ascending with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

/// Eigenvalues in `[-1e-10, 0)` are reported as 0: the operators here are
/// non-negative by construction, so such values are roundoff.
pub const EIGENVALUE_CLAMP: f64 = 1e-10;

fn clamp_spectrum(values: &mut [f64]) {
    for v in values {
        if *v < 0.0 && *v >= -EIGENVALUE_CLAMP {
            *v = 0.0;
        }
    }
}

/// Full decomposition of a real symmetric matrix, verified: the residual
/// `max |S phi - lambda phi|` must stay below `1e-8 * max(1, lambda_max)` and
/// the eigenvector matrix must be orthonormal to `1e-8`.
pub fn sym_eigen(mat: &DMatrix<f64>) -> Result<Eigen, LinalgError> {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols(), "matrix must be square");
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let se = mat.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        se.eigenvalues[a]
            .partial_cmp(&se.eigenvalues[b])
            .expect("eigenvalues are finite")
    });
    let mut values: Vec<f64> = order.iter().map(|&k| se.eigenvalues[k]).collect();
    clamp_spectrum(&mut values);
    let mut vectors = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        vectors.set_column(col, &se.eigenvectors.column(k));
    }

    let lambda_max = values.last().copied().unwrap_or(0.0).abs().max(1.0);
    let mut residual = mat * &vectors;
    for (col, &lambda) in values.iter().enumerate() {
        let phi = vectors.column(col);
        let mut r = residual.column_mut(col);
        r.axpy(-lambda, &phi, 1.0);
    }
    let res = residual.amax();
    if res > 1e-8 * lambda_max {
        return Err(LinalgError::ConvergenceFailure(format!(
            "eigen residual {res:.3e} exceeds {:.3e} at dimension {n}",
            1e-8 * lambda_max
        )));
    }
    let mut gram = vectors.transpose() * &vectors;
    for i in 0..n {
        gram[(i, i)] -= 1.0;
    }
    let orth = gram.amax();
    if orth > 1e-8 {
        return Err(LinalgError::ConvergenceFailure(format!(
            "eigenvectors depart from orthonormality by {orth:.3e}"
        )));
    }
    Ok(Eigen { values, vectors })
}

/// Dense matrix from the tridiagonal bands.
pub fn tridiag_to_dense(diag: &[f64], off: &[f64]) -> DMatrix<f64> {
    let n = diag.len();
    assert_eq!(off.len(), n.saturating_sub(1));
    let mut m = DMatrix::zeros(n, n);
    for (i, &d) in diag.iter().enumerate() {
        m[(i, i)] = d;
    }
    for (i, &e) in off.iter().enumerate() {
        m[(i, i + 1)] = e;
        m[(i + 1, i)] = e;
    }
    m
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`,
/// via the Sturm sequence of `LDL^T` pivots.
fn count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0usize;
    let mut d = 1.0f64;
    for (i, &a) in diag.iter().enumerate() {
        let off2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        d = (a - x) - off2 / d;
        if d == 0.0 {
            d = -1e-300;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection on the
/// Sturm count, started from Gershgorin bounds. Accurate to a few ulps of
/// the matrix scale.
pub fn smallest_eigenvalue_tridiag(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    assert!(n > 0);
    assert_eq!(off.len(), n - 1);
    if n == 1 {
        let mut v = [diag[0]];
        clamp_spectrum(&mut v);
        return v[0];
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let spread = if i == 0 {
            off[0].abs()
        } else if i == n - 1 {
            off[n - 2].abs()
        } else {
            off[i - 1].abs() + off[i].abs()
        };
        lo = lo.min(diag[i] - spread);
        hi = hi.max(diag[i] + spread);
    }
    let scale = lo.abs().max(hi.abs()).max(1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * scale {
            break;
        }
    }
    let mut v = [0.5 * (lo + hi)];
    clamp_spectrum(&mut v);
    v[0]
}

/// Smallest eigenvalue of a dense symmetric matrix: Householder reduction to
/// tridiagonal form, then Sturm bisection. Cheaper than a full decomposition
/// when only the bottom of the spectrum is needed.
pub fn smallest_eigenvalue_sym(mat: &DMatrix<f64>) -> f64 {
    let n = mat.nrows();
    assert_eq!(n, mat.ncols());
    if n == 1 {
        let mut v = [mat[(0, 0)]];
        clamp_spectrum(&mut v);
        return v[0];
    }
    let tri = nalgebra::linalg::SymmetricTridiagonal::new(mat.clone());
    let diag = tri.diagonal();
    let off = tri.off_diagonal();
    smallest_eigenvalue_tridiag(diag.as_slice(), off.as_slice())
}
