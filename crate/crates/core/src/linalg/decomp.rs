//! Dense SVD and symmetric eigendecomposition.
//!
//! Both go through faer, sequentially. nalgebra's bidiagonal SVD was seen to
//! return factors that do not reconstruct some nearly rank-deficient inputs,
//! so it is not used for decompositions.

use faer::{Mat, MatRef, Side};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

fn to_faer(z: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(z.nrows(), z.ncols(), |i, j| z[(i, j)])
}

fn from_faer(m: MatRef<'_, f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn condition_estimate(z: &DMatrix<f64>) -> f64 {
    let r = z.clone().qr().r();
    let diag: Vec<f64> = r.diagonal().iter().map(|x| x.abs()).collect();
    let max = diag.iter().cloned().fold(0.0, f64::max);
    let min = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}

/// Full SVD `z = U diag(s) V^T` with `s` nonincreasing; `U` is
/// `n1 x n1`, `V` is `n2 x n2`, `s` has `min(n1, n2)` entries.
pub(crate) fn svd(z: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>, DMatrix<f64>)> {
    if !z.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let dec = to_faer(z).svd().map_err(|_| Error::SvdFailed {
        condition_estimate: condition_estimate(z),
    })?;
    let s = dec.S().column_vector();
    let k = z.nrows().min(z.ncols());
    Ok((
        from_faer(dec.U()),
        DVector::from_fn(k, |i, _| s[i]),
        from_faer(dec.V()),
    ))
}

/// Singular values, nonincreasing.
pub(crate) fn singular_values(z: &DMatrix<f64>) -> Result<DVector<f64>> {
    if !z.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let s = to_faer(z).singular_values().map_err(|_| Error::SvdFailed {
        condition_estimate: condition_estimate(z),
    })?;
    Ok(DVector::from_vec(s))
}

/// Eigenvalues (nondecreasing) and orthonormal eigenvectors of a symmetric
/// matrix; only the lower triangle is read.
pub(crate) fn symmetric_eigen(z: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if !z.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let dec = to_faer(z).self_adjoint_eigen(Side::Lower).map_err(|_| Error::EigenFailed)?;
    let s = dec.S().column_vector();
    Ok((DVector::from_fn(z.nrows(), |i, _| s[i]), from_faer(dec.U())))
}
