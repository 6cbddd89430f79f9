//! Small dense kernels for principal submatrices. Matrices are row-major
//! `k * k` slices; only the lower triangle of a Cholesky factor is used.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Copies the principal submatrix `m[idx, idx]` into a row-major buffer.
pub(crate) fn principal<T: Real>(m: &DMatrix<T>, idx: &[usize]) -> Vec<T> {
    let k = idx.len();
    let mut out = Vec::with_capacity(k * k);
    for &i in idx {
        for &j in idx {
            out.push(m[(i, j)]);
        }
    }
    out
}

/// In-place Cholesky of a row-major SPD matrix. Returns `false` if a pivot is
/// not strictly positive.
pub(crate) fn cholesky_in_place<T: Real>(a: &mut [T], k: usize) -> bool {
    for j in 0..k {
        let mut d = a[j * k + j];
        for t in 0..j {
            d -= a[j * k + t] * a[j * k + t];
        }
        if !(d > T::zero()) || !d.is_finite() {
            return false;
        }
        let d = d.sqrt();
        a[j * k + j] = d;
        for i in j + 1..k {
            let mut s = a[i * k + j];
            for t in 0..j {
                s -= a[i * k + t] * a[j * k + t];
            }
            a[i * k + j] = s / d;
        }
    }
    true
}

/// `log det` from a Cholesky factor.
pub(crate) fn chol_log_det<T: Real>(l: &[T], k: usize) -> T {
    let mut s = T::zero();
    for i in 0..k {
        s += l[i * k + i].ln();
    }
    s + s
}

/// Solves `L z = b` in place for lower-triangular `L`.
pub(crate) fn forward_solve<T: Real>(l: &[T], k: usize, b: &mut [T]) {
    for i in 0..k {
        let mut s = b[i];
        for t in 0..i {
            s -= l[i * k + t] * b[t];
        }
        b[i] = s / l[i * k + i];
    }
}

/// Log-determinant of the principal submatrix `m[idx, idx]`.
pub(crate) fn principal_log_det<T: Real>(m: &DMatrix<T>, idx: &[usize]) -> Result<T> {
    let k = idx.len();
    let mut a = principal(m, idx);
    if !cholesky_in_place(&mut a, k) {
        return Err(not_pd(idx));
    }
    Ok(chol_log_det(&a, k))
}

pub(crate) fn not_pd(idx: &[usize]) -> Error {
    let one_based: Vec<usize> = idx.iter().map(|i| i + 1).collect();
    Error::Numeric(format!("submatrix on vertices {one_based:?} is not positive definite"))
}

pub(crate) fn sub_matrix<T: Real>(m: &DMatrix<T>, rows: &[usize], cols: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Inverse of a symmetric positive-definite matrix.
pub(crate) fn spd_inverse<T: Real>(m: &DMatrix<T>) -> Result<DMatrix<T>> {
    let chol = m.clone().cholesky().ok_or_else(|| Error::Numeric("matrix is not positive definite".into()))?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Ok(inv)
}

pub(crate) fn symmetrize<T: Real>(m: &mut DMatrix<T>) {
    let n = m.nrows();
    let half = T::of(0.5);
    for i in 0..n {
        for j in 0..i {
            let v = (m[(i, j)] + m[(j, i)]) * half;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}
