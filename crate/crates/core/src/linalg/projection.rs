//! Nearest-point projections onto the rank-`r` variety.

use nalgebra::{DMatrix, DVector};

use super::decomp::{svd, symmetric_eigen};
use super::FactoredMatrix;
use crate::error::{Error, Result};

/// Singular values below this fraction of `sigma_1` are dropped.
pub const RANK_DROP_TOL: f64 = 1e-13;

/// Relative asymmetry accepted by [`project_psd_rank_r`].
pub const SYMMETRY_TOL: f64 = 1e-10;

fn check_rank(z: &DMatrix<f64>, r: usize) -> Result<()> {
    let (rows, cols) = z.shape();
    if r == 0 || r > rows.min(cols) {
        return Err(Error::InvalidRank { rank: r, rows, cols });
    }
    Ok(())
}

/// Truncated SVD: the nearest matrix of rank at most `r` to `z` in Frobenius
/// norm.
///
/// The result keeps only strictly positive singular values above
/// [`RANK_DROP_TOL`]` * sigma_1`, so `k < r` when `z` has rank below `r`.
/// Ties at the truncation boundary are broken by the SVD's ordering; the
/// nearest point is then not unique.
pub fn project_rank_r(z: &DMatrix<f64>, r: usize) -> Result<FactoredMatrix> {
    check_rank(z, r)?;
    if !z.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (u, s, v) = svd(z)?;
    let top = s.get(0).copied().unwrap_or(0.0);
    let k = s
        .iter()
        .take(r)
        .take_while(|&&x| x > 0.0 && x > RANK_DROP_TOL * top)
        .count();
    Ok(FactoredMatrix::from_parts(
        u.columns(0, k).into_owned(),
        DVector::from_iterator(k, s.iter().take(k).copied()),
        v.columns(0, k).into_owned(),
        r,
    ))
}

/// PSD projection `sum_{i<=r} max(lambda_i, 0) u_i u_i^T` over the `r`
/// algebraically largest eigenpairs. The result has `U = V`.
pub fn project_psd_rank_r(z: &DMatrix<f64>, r: usize) -> Result<FactoredMatrix> {
    if !z.is_square() {
        return Err(Error::DimensionMismatch {
            expected: (z.nrows(), z.nrows()),
            found: z.shape(),
        });
    }
    check_rank(z, r)?;
    if !z.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    let asymmetry = (z - z.transpose()).norm() / z.norm().max(1.0);
    if asymmetry > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let sym = (z + z.transpose()) * 0.5;
    let (vals, vecs) = symmetric_eigen(&sym)?;
    let top = vals.max().max(0.0);
    let kept: Vec<usize> = (0..vals.len())
        .rev()
        .take(r)
        .take_while(|&i| vals[i] > 0.0 && vals[i] > RANK_DROP_TOL * top)
        .collect();
    let k = kept.len();
    let mut u = DMatrix::zeros(z.nrows(), k);
    for (j, &i) in kept.iter().enumerate() {
        u.set_column(j, &vecs.column(i));
    }
    let sigma = DVector::from_iterator(k, kept.iter().map(|&i| vals[i]));
    Ok(FactoredMatrix::from_parts(u.clone(), sigma, u, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_truncation() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 1.0, 0.5]));
        let p = project_rank_r(&z, 2).unwrap();
        assert_eq!(p.rank(), 2);
        assert_eq!(p.sigma().as_slice(), &[3.0, 2.0]);
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, 2.0, 0.0, 0.0]));
        assert!((p.dense() - expected).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_has_no_factors() {
        let p = project_rank_r(&DMatrix::zeros(4, 5), 2).unwrap();
        assert_eq!(p.rank(), 0);
        assert_eq!(p.search_rank(), 2);
        assert_eq!(p.dense(), DMatrix::zeros(4, 5));
    }

    #[test]
    fn rank_deficient_input_gives_short_factors() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0, 0.0]));
        let p = project_rank_r(&z, 2).unwrap();
        assert_eq!(p.rank(), 1);
        assert_eq!(p.sigma_r(), 0.0);
    }

    #[test]
    fn rejects_non_finite_and_bad_rank() {
        let mut z = DMatrix::identity(3, 3);
        assert!(matches!(project_rank_r(&z, 4), Err(Error::InvalidRank { .. })));
        assert!(matches!(project_rank_r(&z, 0), Err(Error::InvalidRank { .. })));
        z[(1, 2)] = f64::NAN;
        assert_eq!(project_rank_r(&z, 1).unwrap_err(), Error::NonFinite);
    }

    #[test]
    fn psd_clips_negative_eigenvalues() {
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, -5.0]));
        let p = project_psd_rank_r(&z, 2).unwrap();
        let expected = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, 0.0]));
        assert!((p.dense() - expected).norm() < 1e-14);
        assert_eq!(p.u(), p.v());
    }

    #[test]
    fn psd_keeps_algebraically_largest() {
        // -5 has the largest magnitude but is not among the top-2 eigenvalues.
        let z = DMatrix::from_diagonal(&DVector::from_vec(vec![-5.0, 1.0, 0.5]));
        let p = project_psd_rank_r(&z, 2).unwrap();
        assert_eq!(p.sigma().as_slice(), &[1.0, 0.5]);
    }

    #[test]
    fn psd_rejects_asymmetric() {
        let mut z = DMatrix::identity(3, 3);
        z[(0, 1)] = 1e-3;
        assert!(matches!(project_psd_rank_r(&z, 1), Err(Error::NotSymmetric { .. })));
    }
}
