//! Factored baselines on `X = L R^T`.
//!
//! With `G = grad f(L R^T)` and pre-update factors,
//!
//! ```text
//! FGD       L+ = L - eta G R                     R+ = R - eta G^T L
//! ScaledGD  L+ = L - eta G R (R^T R)^{-1}        R+ = R - eta G^T L (L^T L)^{-1}
//! PrecGD    L+ = L - eta G R (R^T R + reg I)^{-1}   (and likewise for R)
//! ```
//!
//! In symmetric mode `R = L` and only `L` is updated.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{project_psd_rank_r, project_rank_r, symmetric_eigen, FactoredMatrix};
use crate::objectives::Objective;

/// Gram eigenvalues below this fraction of the largest are dropped from the
/// inverse.
pub const GRAM_PINV_TOL: f64 = 1e-12;
/// Gram condition numbers above this are flagged as a breakdown.
pub const GRAM_BREAKDOWN_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq)]
pub struct Factors {
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
    pub symmetric: bool,
}

impl Factors {
    pub fn new(left: DMatrix<f64>, right: DMatrix<f64>) -> Result<Self> {
        if left.ncols() != right.ncols() {
            return Err(Error::DimensionMismatch {
                expected: (right.nrows(), left.ncols()),
                found: right.shape(),
            });
        }
        Ok(Self {
            left,
            right,
            symmetric: false,
        })
    }

    pub fn symmetric(left: DMatrix<f64>) -> Self {
        Self {
            right: left.clone(),
            left,
            symmetric: true,
        }
    }

    /// Balanced factors `U sqrt(S)`, `V sqrt(S)` of `x`, padded with zero
    /// columns to its search rank.
    pub fn balanced(x: &FactoredMatrix, symmetric: bool) -> Self {
        let (left, right) = x.balanced_factors();
        if symmetric {
            Self::symmetric(left)
        } else {
            Self {
                left,
                right,
                symmetric: false,
            }
        }
    }

    pub fn width(&self) -> usize {
        self.left.ncols()
    }

    pub fn dense(&self) -> DMatrix<f64> {
        &self.left * self.right.transpose()
    }

    /// SVD of `L R^T` as a point with search rank equal to the factor width.
    pub fn to_factored(&self) -> Result<FactoredMatrix> {
        let dense = self.dense();
        if self.symmetric {
            project_psd_rank_r(&((&dense + dense.transpose()) * 0.5), self.width())
        } else {
            project_rank_r(&dense, self.width())
        }
    }
}

/// Conditioning of the Gram matrices seen by a preconditioned step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramReport {
    /// Largest condition number of the (regularized) Gram matrices.
    pub condition: f64,
    pub breakdown: bool,
}

impl GramReport {
    fn merge(self, other: GramReport) -> GramReport {
        GramReport {
            condition: self.condition.max(other.condition),
            breakdown: self.breakdown || other.breakdown,
        }
    }
}

/// `(F^T F + reg I)^{-1}` through a symmetric eigendecomposition, dropping
/// eigenvalues below `GRAM_PINV_TOL` times the largest.
fn gram_inverse(factor: &DMatrix<f64>, reg: f64) -> (DMatrix<f64>, GramReport) {
    let k = factor.ncols();
    let mut gram = factor.tr_mul(factor);
    for i in 0..k {
        gram[(i, i)] += reg;
    }
    // Non-finite factors poison the step, which the caller reports as
    // divergence.
    let Ok((vals, q)) = symmetric_eigen(&gram) else {
        let report = GramReport {
            condition: f64::INFINITY,
            breakdown: true,
        };
        return (DMatrix::from_element(k, k, f64::NAN), report);
    };
    let lmax = vals.max();
    let lmin = vals.min();
    let condition = if lmin > 0.0 { lmax / lmin } else { f64::INFINITY };
    let inv_vals = vals.map(|l| if lmax > 0.0 && l > GRAM_PINV_TOL * lmax { 1.0 / l } else { 0.0 });
    let inv = &q * DMatrix::from_diagonal(&inv_vals) * q.transpose();
    (
        inv,
        GramReport {
            condition,
            breakdown: condition > GRAM_BREAKDOWN_CONDITION,
        },
    )
}

fn step<F: Objective + ?Sized>(
    f: &F,
    factors: &Factors,
    eta: f64,
    reg: Option<f64>,
) -> (Factors, Option<GramReport>) {
    let g = f.gradient(&factors.dense());
    let (l, r) = (&factors.left, &factors.right);
    let mut dl = &g * r;
    let mut report = None;
    if let Some(reg) = reg {
        let (inv_r, rep) = gram_inverse(r, reg);
        dl *= inv_r;
        report = Some(rep);
    }
    let left = l - dl * eta;
    if factors.symmetric {
        return (Factors::symmetric(left), report);
    }
    let mut dr = g.tr_mul(l);
    if let Some(reg) = reg {
        let (inv_l, rep) = gram_inverse(l, reg);
        dr *= inv_l;
        report = report.map(|r| r.merge(rep));
    }
    let right = r - dr * eta;
    (
        Factors {
            left,
            right,
            symmetric: false,
        },
        report,
    )
}

pub fn fgd_step<F: Objective + ?Sized>(f: &F, factors: &Factors, eta: f64) -> Factors {
    step(f, factors, eta, None).0
}

pub fn scaledgd_step<F: Objective + ?Sized>(
    f: &F,
    factors: &Factors,
    eta: f64,
) -> (Factors, GramReport) {
    precgd_step(f, factors, eta, 0.0)
}

pub fn precgd_step<F: Objective + ?Sized>(
    f: &F,
    factors: &Factors,
    eta: f64,
    reg: f64,
) -> (Factors, GramReport) {
    let (next, report) = step(f, factors, eta, Some(reg));
    (next, report.expect("preconditioned step reports its Gram matrices"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::Quadratic;
    use crate::rng::{gaussian_matrix, seeded};

    #[test]
    fn stationary_factors_do_not_move() {
        let mut rng = seeded(1);
        let fac = Factors::new(gaussian_matrix(5, 2, &mut rng), gaussian_matrix(4, 2, &mut rng)).unwrap();
        let f = Quadratic::new(fac.dense());
        assert_eq!(fgd_step(&f, &fac, 0.3), fac);
        assert_eq!(scaledgd_step(&f, &fac, 0.3).0, fac);
    }

    #[test]
    fn rank_deficient_gram_is_flagged() {
        let mut rng = seeded(2);
        let mut l = gaussian_matrix(5, 3, &mut rng);
        l.column_mut(2).fill(0.0);
        let (_, rep) = gram_inverse(&l, 0.0);
        assert!(rep.breakdown);
        let (_, rep) = gram_inverse(&l, 1.0);
        assert!(!rep.breakdown);
    }
}
