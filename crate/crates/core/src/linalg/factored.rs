use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-10;

/// A matrix of rank at most `r` held as `U diag(sigma) V^T`.
///
/// `U` (`n1 x k`) and `V` (`n2 x k`) have orthonormal columns and `sigma` is
/// nonnegative and nonincreasing. The *search rank* `r >= k` is the rank the
/// solver is constrained to; `k < r` marks a rank-deficient point, where the
/// tangent space of the rank-`r` manifold is undefined.
///
/// Orthonormal completions `U_perp`, `V_perp` are computed on first use and
/// cached.
#[derive(Debug, Clone)]
pub struct FactoredMatrix {
    u: DMatrix<f64>,
    sigma: DVector<f64>,
    v: DMatrix<f64>,
    search_rank: usize,
    complements: OnceLock<(DMatrix<f64>, DMatrix<f64>)>,
}

impl FactoredMatrix {
    /// Validates and wraps factors. The search rank is set to `k`.
    pub fn new(u: DMatrix<f64>, sigma: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        let k = sigma.len();
        if u.ncols() != k || v.ncols() != k {
            return Err(Error::InvalidFactors(format!(
                "u has {} columns, v has {}, sigma has {} entries",
                u.ncols(),
                v.ncols(),
                k
            )));
        }
        if k > u.nrows().min(v.nrows()) {
            return Err(Error::InvalidRank {
                rank: k,
                rows: u.nrows(),
                cols: v.nrows(),
            });
        }
        if !(u.iter().chain(v.iter()).chain(sigma.iter())).all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        if sigma.iter().any(|&s| s < 0.0) {
            return Err(Error::InvalidFactors("negative singular value".into()));
        }
        if sigma.as_slice().windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidFactors("singular values not nonincreasing".into()));
        }
        let eye = DMatrix::<f64>::identity(k, k);
        let du = (u.transpose() * &u - &eye).norm();
        let dv = (v.transpose() * &v - &eye).norm();
        if du > ORTHONORMAL_TOL || dv > ORTHONORMAL_TOL {
            return Err(Error::InvalidFactors(format!(
                "factors not orthonormal (|U'U - I| = {du:e}, |V'V - I| = {dv:e})"
            )));
        }
        Ok(Self::from_parts(u, sigma, v, k))
    }

    /// Unchecked constructor for factors produced by the crate's own
    /// decompositions.
    pub(crate) fn from_parts(
        u: DMatrix<f64>,
        sigma: DVector<f64>,
        v: DMatrix<f64>,
        search_rank: usize,
    ) -> Self {
        debug_assert!(sigma.len() <= search_rank);
        Self {
            u,
            sigma,
            v,
            search_rank,
            complements: OnceLock::new(),
        }
    }

    /// The zero matrix, as a rank-0 point with search rank `r`.
    pub fn zeros(n1: usize, n2: usize, r: usize) -> Self {
        Self::from_parts(
            DMatrix::zeros(n1, 0),
            DVector::zeros(0),
            DMatrix::zeros(n2, 0),
            r,
        )
    }

    /// Raises (or keeps) the search rank. Fails if `r < k`.
    pub fn with_search_rank(mut self, r: usize) -> Result<Self> {
        if r < self.rank() || r > self.nrows().min(self.ncols()) {
            return Err(Error::InvalidRank {
                rank: r,
                rows: self.nrows(),
                cols: self.ncols(),
            });
        }
        self.search_rank = r;
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.u.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.v.nrows()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.nrows(), self.ncols())
    }

    /// Number of stored singular triplets `k`.
    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn search_rank(&self) -> usize {
        self.search_rank
    }

    /// True when `k` equals the search rank, i.e. the point lies on the
    /// rank-`r` manifold and has a tangent space.
    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.search_rank && self.search_rank > 0
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn sigma(&self) -> &DVector<f64> {
        &self.sigma
    }

    /// `sigma_1`, or 0 for the zero matrix.
    pub fn sigma_max(&self) -> f64 {
        self.sigma.get(0).copied().unwrap_or(0.0)
    }

    /// `sigma_r` at the search rank; 0 when the point is rank deficient.
    pub fn sigma_r(&self) -> f64 {
        if self.search_rank == 0 {
            return 0.0;
        }
        self.sigma.get(self.search_rank - 1).copied().unwrap_or(0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.sigma.norm()
    }

    /// `U diag(sigma) V^T`.
    pub fn dense(&self) -> DMatrix<f64> {
        let mut us = self.u.clone();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.transpose()
    }

    /// Orthonormal completions `(U_perp, V_perp)`.
    pub fn complements(&self) -> (&DMatrix<f64>, &DMatrix<f64>) {
        let (up, vp) = self
            .complements
            .get_or_init(|| (orthonormal_complement(&self.u), orthonormal_complement(&self.v)));
        (up, vp)
    }

    /// Left and right factors `U sqrt(S)`, `V sqrt(S)`, padded with zero
    /// columns up to the search rank.
    pub fn balanced_factors(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let r = self.search_rank.max(self.rank());
        let mut left = DMatrix::zeros(self.nrows(), r);
        let mut right = DMatrix::zeros(self.ncols(), r);
        for (j, s) in self.sigma.iter().enumerate() {
            let root = s.sqrt();
            left.set_column(j, &(self.u.column(j) * root));
            right.set_column(j, &(self.v.column(j) * root));
        }
        (left, right)
    }
}

/// Columns completing `u` (orthonormal columns) to an orthonormal basis,
/// from the Householder QR of `[u | I]`.
pub fn orthonormal_complement(u: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, k) = u.shape();
    if k == n {
        return DMatrix::zeros(n, 0);
    }
    let mut aug = DMatrix::zeros(n, k + n);
    aug.columns_mut(0, k).copy_from(u);
    aug.columns_mut(k, n).fill_with_identity();
    let q = aug.qr().q();
    q.columns(k, n - k).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{haar_frame, seeded};

    #[test]
    fn rejects_unsorted_sigma() {
        let u = DMatrix::identity(3, 2);
        let err = FactoredMatrix::new(u.clone(), DVector::from_vec(vec![1.0, 2.0]), u);
        assert!(matches!(err, Err(Error::InvalidFactors(_))));
    }

    #[test]
    fn rejects_non_orthonormal() {
        let mut u = DMatrix::identity(3, 2);
        u[(0, 1)] = 0.1;
        let v = DMatrix::identity(3, 2);
        let err = FactoredMatrix::new(u, DVector::from_vec(vec![2.0, 1.0]), v);
        assert!(matches!(err, Err(Error::InvalidFactors(_))));
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let mut rng = seeded(3);
        let u = haar_frame(7, 3, &mut rng);
        let up = orthonormal_complement(&u);
        assert_eq!(up.shape(), (7, 4));
        assert!((up.transpose() * &up - DMatrix::identity(4, 4)).norm() < 1e-12);
        assert!((u.transpose() * &up).norm() < 1e-12);
    }

    #[test]
    fn sigma_r_is_zero_when_rank_deficient() {
        let u = DMatrix::identity(4, 1);
        let x = FactoredMatrix::new(u.clone(), DVector::from_vec(vec![2.0]), u)
            .unwrap()
            .with_search_rank(2)
            .unwrap();
        assert_eq!(x.sigma_r(), 0.0);
        assert!(!x.is_full_rank());
        let (l, r) = x.balanced_factors();
        assert_eq!(l.ncols(), 2);
        assert!((l * r.transpose() - x.dense()).norm() < 1e-15);
    }
}
