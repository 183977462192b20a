//! Block coordinates relative to a base point and the tangent space of the
//! rank-`r` manifold.
//!
//! With `U, U_perp` and `V, V_perp` the column/row bases of a base point `X`,
//! every `Z` splits into four blocks
//!
//! ```text
//! Z = U (U^T Z V) V^T + U_perp (U_perp^T Z V) V^T
//!   + U (U^T Z V_perp) V_perp^T + U_perp (U_perp^T Z V_perp) V_perp^T
//! ```
//!
//! The tangent space `T(X)` is everything with a zero `(U_perp, V_perp)`
//! block, so `P_T(Z) = Z - [Z]_{U_perp, V_perp}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::FactoredMatrix;
use crate::error::{Error, Result};
use crate::rng::gaussian_matrix;

/// The four blocks of a dense matrix relative to a base point.
#[derive(Debug, Clone)]
pub struct CornerDecomposition {
    /// `U^T Z V`, `k x k`.
    pub core: DMatrix<f64>,
    /// `U_perp^T Z V`, `(n1-k) x k`.
    pub left: DMatrix<f64>,
    /// `U^T Z V_perp`, `k x (n2-k)`.
    pub right: DMatrix<f64>,
    /// `U_perp^T Z V_perp`, `(n1-k) x (n2-k)`.
    pub outer: DMatrix<f64>,
}

impl CornerDecomposition {
    /// Squared Frobenius norms of `(core, left, right, outer)`.
    pub fn block_norms_squared(&self) -> [f64; 4] {
        [
            self.core.norm_squared(),
            self.left.norm_squared(),
            self.right.norm_squared(),
            self.outer.norm_squared(),
        ]
    }

    /// Each block mapped back to `n1 x n2`, in the order of
    /// [`block_norms_squared`](Self::block_norms_squared).
    pub fn dense_blocks(&self, base: &FactoredMatrix) -> [DMatrix<f64>; 4] {
        let (u, v) = (base.u(), base.v());
        let (up, vp) = base.complements();
        [
            u * &self.core * v.transpose(),
            up * &self.left * v.transpose(),
            u * &self.right * vp.transpose(),
            up * &self.outer * vp.transpose(),
        ]
    }
}

fn check_shape(z: &DMatrix<f64>, base: &FactoredMatrix) -> Result<()> {
    if z.shape() != base.shape() {
        return Err(Error::DimensionMismatch {
            expected: base.shape(),
            found: z.shape(),
        });
    }
    Ok(())
}

/// Splits `z` into its four blocks relative to `base`.
pub fn corner_decompose(z: &DMatrix<f64>, base: &FactoredMatrix) -> Result<CornerDecomposition> {
    check_shape(z, base)?;
    let (u, v) = (base.u(), base.v());
    let (up, vp) = base.complements();
    let zv = z * v;
    let zvp = z * vp;
    Ok(CornerDecomposition {
        core: u.transpose() * &zv,
        left: up.transpose() * &zv,
        right: u.transpose() * &zvp,
        outer: up.transpose() * &zvp,
    })
}

/// An element of `T(X)` stored by its three nonzero blocks.
#[derive(Debug, Clone)]
pub struct TangentVector<'a> {
    pub core: DMatrix<f64>,
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
    base: &'a FactoredMatrix,
}

fn require_manifold_point(base: &FactoredMatrix) -> Result<()> {
    if !base.is_full_rank() {
        return Err(Error::TangentUndefined {
            rank: base.rank(),
            search_rank: base.search_rank(),
        });
    }
    Ok(())
}

impl<'a> TangentVector<'a> {
    pub fn zeros(base: &'a FactoredMatrix) -> Result<Self> {
        require_manifold_point(base)?;
        let r = base.rank();
        let (n1, n2) = base.shape();
        Ok(Self {
            core: DMatrix::zeros(r, r),
            left: DMatrix::zeros(n1 - r, r),
            right: DMatrix::zeros(r, n2 - r),
            base,
        })
    }

    /// Builds a tangent vector from explicit blocks.
    pub fn from_blocks(
        base: &'a FactoredMatrix,
        core: DMatrix<f64>,
        left: DMatrix<f64>,
        right: DMatrix<f64>,
    ) -> Result<Self> {
        let zero = Self::zeros(base)?;
        if core.shape() != zero.core.shape()
            || left.shape() != zero.left.shape()
            || right.shape() != zero.right.shape()
        {
            return Err(Error::DimensionMismatch {
                expected: zero.core.shape(),
                found: core.shape(),
            });
        }
        Ok(Self {
            core,
            left,
            right,
            base,
        })
    }

    /// Uniformly distributed on the sphere of radius `radius` in `T(X)`.
    pub fn random_sphere<R: Rng + ?Sized>(
        base: &'a FactoredMatrix,
        radius: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let mut t = Self::zeros(base)?;
        t.core = gaussian_matrix(t.core.nrows(), t.core.ncols(), rng);
        t.left = gaussian_matrix(t.left.nrows(), t.left.ncols(), rng);
        t.right = gaussian_matrix(t.right.nrows(), t.right.ncols(), rng);
        let norm = t.norm();
        Ok(t.scaled(radius / norm))
    }

    pub fn base(&self) -> &'a FactoredMatrix {
        self.base
    }

    /// Dimension of `T(X)`: `r (n1 + n2 - r)`.
    pub fn dim(&self) -> usize {
        self.core.len() + self.left.len() + self.right.len()
    }

    pub fn norm_squared(&self) -> f64 {
        self.core.norm_squared() + self.left.norm_squared() + self.right.norm_squared()
    }

    pub fn norm(&self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Frobenius inner product; the block bases are orthonormal so this
    /// equals the dense inner product.
    pub fn dot(&self, other: &TangentVector<'_>) -> f64 {
        self.core.dot(&other.core) + self.left.dot(&other.left) + self.right.dot(&other.right)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            core: &self.core * alpha,
            left: &self.left * alpha,
            right: &self.right * alpha,
            base: self.base,
        }
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &TangentVector<'_>) -> Self {
        Self {
            core: &self.core + &other.core * alpha,
            left: &self.left + &other.left * alpha,
            right: &self.right + &other.right * alpha,
            base: self.base,
        }
    }

    /// The tangent vector as an `n1 x n2` matrix.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let (u, v) = (self.base.u(), self.base.v());
        let (up, vp) = self.base.complements();
        u * &self.core * v.transpose()
            + up * &self.left * v.transpose()
            + u * &self.right * vp.transpose()
    }

    /// Flattened coordinates `[core | left | right]`, each column-major.
    pub fn to_coords(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.core
                .iter()
                .chain(self.left.iter())
                .chain(self.right.iter())
                .copied(),
        )
    }

    /// Inverse of [`to_coords`](Self::to_coords).
    pub fn from_coords(base: &'a FactoredMatrix, coords: &DVector<f64>) -> Result<Self> {
        let mut t = Self::zeros(base)?;
        if coords.len() != t.dim() {
            return Err(Error::DimensionMismatch {
                expected: (t.dim(), 1),
                found: (coords.len(), 1),
            });
        }
        let (a, b) = (t.core.len(), t.left.len());
        t.core.as_mut_slice().copy_from_slice(&coords.as_slice()[..a]);
        t.left.as_mut_slice().copy_from_slice(&coords.as_slice()[a..a + b]);
        t.right.as_mut_slice().copy_from_slice(&coords.as_slice()[a + b..]);
        Ok(t)
    }
}

/// Orthogonal projection onto `T(X)`. Requires `base` to have rank equal to
/// its search rank.
pub fn project_tangent<'a>(z: &DMatrix<f64>, base: &'a FactoredMatrix) -> Result<TangentVector<'a>> {
    require_manifold_point(base)?;
    let blocks = corner_decompose(z, base)?;
    Ok(TangentVector {
        core: blocks.core,
        left: blocks.left,
        right: blocks.right,
        base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::project_rank_r;
    use crate::rng::{gaussian_matrix, haar_frame, seeded};

    fn base(seed: u64, n1: usize, n2: usize, r: usize) -> FactoredMatrix {
        let mut rng = seeded(seed);
        project_rank_r(&gaussian_matrix(n1, n2, &mut rng), r).unwrap()
    }

    #[test]
    fn base_itself_lands_in_core() {
        let x = base(1, 6, 5, 2);
        let d = corner_decompose(&x.dense(), &x).unwrap();
        let sigma = DMatrix::from_diagonal(x.sigma());
        assert!((d.core - sigma).norm() < 1e-12);
        assert!(d.left.norm() < 1e-12 && d.right.norm() < 1e-12 && d.outer.norm() < 1e-12);
    }

    #[test]
    fn pure_corner_is_annihilated() {
        let x = base(2, 6, 6, 2);
        let (up, vp) = x.complements();
        let z = up.column(0) * vp.column(1).transpose();
        let t = project_tangent(&z, &x).unwrap();
        assert!(t.norm() < 1e-12);
    }

    #[test]
    fn rank_deficient_base_is_rejected() {
        let mut rng = seeded(4);
        let u = haar_frame(5, 1, &mut rng);
        let x = FactoredMatrix::new(u.clone(), DVector::from_vec(vec![1.0]), u)
            .unwrap()
            .with_search_rank(2)
            .unwrap();
        let err = project_tangent(&DMatrix::identity(5, 5), &x).unwrap_err();
        assert_eq!(err, Error::TangentUndefined { rank: 1, search_rank: 2 });
    }

    #[test]
    fn coords_round_trip_and_dimension() {
        let x = base(5, 7, 4, 3);
        let mut rng = seeded(6);
        let t = TangentVector::random_sphere(&x, 2.0, &mut rng).unwrap();
        assert_eq!(t.dim(), 3 * (7 + 4 - 3));
        assert!((t.norm() - 2.0).abs() < 1e-12);
        let back = TangentVector::from_coords(&x, &t.to_coords()).unwrap();
        assert!((back.to_dense() - t.to_dense()).norm() < 1e-15);
        assert!((t.to_dense().norm() - t.norm()).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let x = base(7, 4, 4, 2);
        assert!(matches!(
            corner_decompose(&DMatrix::zeros(3, 4), &x),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
