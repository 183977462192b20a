//! Retraction onto the rank-`r` manifold and derivatives of the pullback
//! `f_X(S) = f(Retr_X(S))` on `T(X)`.
//!
//! In the `(U, U_perp) x (V, V_perp)` basis a tangent vector `S` with blocks
//! `K = core`, `L = left`, `R = right` retracts to
//!
//! ```text
//! Retr_X(S) = [ Sigma + K      R           ]
//!             [ L          L M^{-1} R      ],   M = Sigma + K,
//! ```
//!
//! the unique rank-`r` matrix whose tangent projection onto `T(X)` is
//! `X + S`. It equals `A M B^T` with `A = U + U_perp L M^{-1}` and
//! `B = V + V_perp (M^{-1} R)^T`.

use nalgebra::{DMatrix, LU};

use super::decomp::{singular_values, svd, symmetric_eigen};
use super::{FactoredMatrix, TangentVector};
use crate::error::{Error, Result};
use crate::objectives::Objective;

/// Core solves shared by the retraction and its derivative.
struct CoreSolve {
    m: DMatrix<f64>,
    /// `L M^{-1}`, `(n1-r) x r`.
    left_w: DMatrix<f64>,
    /// `M^{-1} R`, `r x (n2-r)`.
    right_w: DMatrix<f64>,
}

impl CoreSolve {
    fn new(s: &TangentVector<'_>) -> Result<Self> {
        let base = s.base();
        let m = DMatrix::from_diagonal(base.sigma()) + &s.core;
        let sv = singular_values(&m)?;
        let smax = sv.max();
        let smin = sv.min();
        if smin.is_nan() || smin <= f64::EPSILON * smax * m.nrows() as f64 {
            return Err(Error::RetractionUndefined { sigma_min: smin });
        }
        let lu = LU::new(m.clone());
        let right_w = lu.solve(&s.right).ok_or(Error::RetractionUndefined { sigma_min: smin })?;
        let left_w = LU::new(m.transpose())
            .solve(&s.left.transpose())
            .ok_or(Error::RetractionUndefined { sigma_min: smin })?
            .transpose();
        Ok(Self { m, left_w, right_w })
    }

    fn frames(&self, base: &FactoredMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
        let (up, vp) = base.complements();
        let a = base.u() + up * &self.left_w;
        let b = base.v() + vp * self.right_w.transpose();
        (a, b)
    }
}

/// `Retr_X(S)` as a factored rank-`r` matrix.
///
/// Fails with [`Error::RetractionUndefined`] when `Sigma + core` is
/// numerically singular; `|S|_F < sigma_r(X)` always avoids this.
pub fn retract(base: &FactoredMatrix, s: &TangentVector<'_>) -> Result<FactoredMatrix> {
    let solve = CoreSolve::new(s)?;
    let (a, b) = solve.frames(base);
    let qa = a.qr();
    let qb = b.qr();
    let small = qa.r() * &solve.m * qb.r().transpose();
    let (su, sigma, sv) = svd(&small)?;
    Ok(FactoredMatrix::from_parts(qa.q() * su, sigma, qb.q() * sv, base.search_rank()))
}

/// `Retr_X(S)` as a dense matrix.
pub fn retract_dense(base: &FactoredMatrix, s: &TangentVector<'_>) -> Result<DMatrix<f64>> {
    let solve = CoreSolve::new(s)?;
    let (a, b) = solve.frames(base);
    Ok(a * &solve.m * b.transpose())
}

/// Value and gradient of the pullback at `S`.
///
/// The gradient is the chain rule through the explicit retraction: with
/// `G = grad f(Retr_X(S))` split into blocks `(G_c, G_l, G_r, G_x)`,
///
/// ```text
/// core  = G_c - (L M^{-1})^T G_x (M^{-1} R)^T
/// left  = G_l + G_x (M^{-1} R)^T
/// right = G_r + (L M^{-1})^T G_x
/// ```
///
/// At `S = 0` this is `P_T(grad f(X))`.
pub fn pullback_value_grad<'a, F: Objective + ?Sized>(
    f: &F,
    base: &'a FactoredMatrix,
    s: &TangentVector<'_>,
) -> Result<(f64, TangentVector<'a>)> {
    let solve = CoreSolve::new(s)?;
    let (a, b) = solve.frames(base);
    let y = a * &solve.m * b.transpose();
    let (value, g) = f.value_and_gradient(&y);
    let (u, v) = (base.u(), base.v());
    let (up, vp) = base.complements();
    let gv = &g * v;
    let gvp = &g * vp;
    let g_core = u.transpose() * &gv;
    let g_left = up.transpose() * &gv;
    let g_right = u.transpose() * &gvp;
    let g_outer = up.transpose() * &gvp;

    let lw_t = solve.left_w.transpose();
    let rw_t = solve.right_w.transpose();
    let core = g_core - &lw_t * &g_outer * &rw_t;
    let left = g_left + &g_outer * &rw_t;
    let right = g_right + &lw_t * &g_outer;
    Ok((value, TangentVector::from_blocks(base, core, left, right)?))
}

/// Finite-difference Hessian of the pullback at 0 over the block coordinate
/// basis of `T(X)`.
#[derive(Debug, Clone)]
pub struct PullbackHessian {
    /// Assembled matrix before symmetrization.
    pub matrix: DMatrix<f64>,
    /// Difference step used.
    pub step: f64,
}

impl PullbackHessian {
    /// `|H - H^T|_F / |H|_F`.
    pub fn asymmetry(&self) -> f64 {
        let norm = self.matrix.norm();
        if norm == 0.0 {
            0.0
        } else {
            (&self.matrix - self.matrix.transpose()).norm() / norm
        }
    }

    pub fn symmetrized(&self) -> DMatrix<f64> {
        (&self.matrix + self.matrix.transpose()) * 0.5
    }
}

/// Difference step for the pullback Hessian: `1e-4 max(1, sigma_1)`, capped
/// at `sigma_r / 4` so every probe stays inside the retraction's domain.
pub fn hessian_step(base: &FactoredMatrix) -> f64 {
    (1e-4 * base.sigma_max().max(1.0)).min(0.25 * base.sigma_r())
}

/// Assembles the pullback Hessian at 0 column by column from central
/// differences of the pullback gradient.
pub fn pullback_hessian<F: Objective + ?Sized>(
    f: &F,
    base: &FactoredMatrix,
) -> Result<PullbackHessian> {
    let zero = TangentVector::zeros(base)?;
    let dim = zero.dim();
    let h = hessian_step(base);
    let mut matrix = DMatrix::zeros(dim, dim);
    let mut coords = nalgebra::DVector::zeros(dim);
    for j in 0..dim {
        coords[j] = h;
        let plus = TangentVector::from_coords(base, &coords)?;
        coords[j] = -h;
        let minus = TangentVector::from_coords(base, &coords)?;
        coords[j] = 0.0;
        let (_, gp) = pullback_value_grad(f, base, &plus)?;
        let (_, gm) = pullback_value_grad(f, base, &minus)?;
        let col = (gp.to_coords() - gm.to_coords()) / (2.0 * h);
        matrix.set_column(j, &col);
    }
    Ok(PullbackHessian { matrix, step: h })
}

/// Smallest eigenvalue of the (symmetrized) pullback Hessian at 0 and a unit
/// eigenvector in `T(X)`.
pub fn pullback_hessian_min_eig<'a, F: Objective + ?Sized>(
    f: &F,
    base: &'a FactoredMatrix,
) -> Result<(f64, TangentVector<'a>)> {
    let hess = pullback_hessian(f, base)?;
    let (vals, vecs) = symmetric_eigen(&hess.symmetrized())?;
    let vec = vecs.column(0).into_owned();
    Ok((vals[0], TangentVector::from_coords(base, &vec)?))
}
