use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::FactoredMatrix;
use crate::objectives::Quadratic;

/// A quadratic with a diagonal target and an exact saddle of the rank-`r`
/// problem that projected gradient descent cannot leave.
#[derive(Debug, Clone)]
pub struct SaddleInstance {
    pub objective: Quadratic,
    /// Keeps the `r - 1` largest target entries and the `(r + 1)`-th.
    pub saddle: FactoredMatrix,
    /// Keeps the `r` largest target entries.
    pub minimizer: FactoredMatrix,
    /// Smallest pullback Hessian eigenvalue at the saddle,
    /// `1 - d_r / d_{r+1}`.
    pub min_eig: f64,
    /// Step sizes strictly below this keep the saddle fixed under projected
    /// gradient descent: `d_{r+1} / d_r`.
    pub invariant_eta_bound: f64,
}

fn diagonal_point(values: &[f64], picks: &[usize], r: usize) -> Result<FactoredMatrix> {
    let n = values.len();
    let u = DMatrix::from_fn(n, picks.len(), |i, j| if i == picks[j] { 1.0 } else { 0.0 });
    let sigma = DVector::from_iterator(picks.len(), picks.iter().map(|&i| values[i]));
    FactoredMatrix::new(u.clone(), sigma, u)?.with_search_rank(r)
}

/// Builds the instance for the target `diag(values)`, which must be
/// nonincreasing, nonnegative, and satisfy `d_r > d_{r+1} > 0`.
///
/// Axis-aligned iterates have exact singular value decompositions, so the
/// saddle is a fixed point in floating point and not only in exact
/// arithmetic.
pub fn invariant_saddle(values: &[f64], r: usize) -> Result<SaddleInstance> {
    let n = values.len();
    if r == 0 || r >= n {
        return Err(Error::InvalidProblem(format!("need 1 <= r < {n}, got r={r}")));
    }
    if values.windows(2).any(|w| w[0] < w[1]) || values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidProblem("target entries must be nonincreasing and >= 0".into()));
    }
    let (dr, dr1) = (values[r - 1], values[r]);
    if !(dr > dr1 && dr1 > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "need d_r > d_(r+1) > 0, got {dr} and {dr1}"
        )));
    }
    let target = DMatrix::from_diagonal(&DVector::from_column_slice(values));
    let saddle_picks: Vec<usize> = (0..r - 1).chain(std::iter::once(r)).collect();
    let top: Vec<usize> = (0..r).collect();
    Ok(SaddleInstance {
        objective: Quadratic::new(target),
        saddle: diagonal_point(values, &saddle_picks, r)?,
        minimizer: diagonal_point(values, &top, r)?,
        min_eig: 1.0 - dr / dr1,
        invariant_eta_bound: dr1 / dr,
    })
}

/// Guaranteed decrease of a successful escape,
/// `(1 / (50 chi^3)) sqrt(epsilon^3 / rho_t)` with
/// `rho_t = 12 rho (1 + 2/epsilon_t)^2 + 2 grad_bound / epsilon_t^2`.
pub fn escape_decrease(epsilon: f64, epsilon_t: f64, chi: f64, rho: f64, grad_bound: f64) -> f64 {
    let rho_t = 12.0 * rho * (1.0 + 2.0 / epsilon_t).powi(2) + 2.0 * grad_bound / (epsilon_t * epsilon_t);
    (epsilon.powi(3) / rho_t).sqrt() / (50.0 * chi.powi(3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_instance() {
        let inst = invariant_saddle(&[4.0, 3.0, 2.0, 0.0], 2).unwrap();
        assert_eq!(inst.saddle.sigma().as_slice(), &[4.0, 2.0]);
        assert_eq!(inst.minimizer.sigma().as_slice(), &[4.0, 3.0]);
        assert_eq!(inst.min_eig, -0.5);
        assert!((inst.invariant_eta_bound - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_targets() {
        assert!(invariant_saddle(&[3.0, 2.0, 2.0], 2).is_err());
        assert!(invariant_saddle(&[3.0, 2.0, 0.0], 2).is_err());
        assert!(invariant_saddle(&[1.0, 2.0, 3.0], 1).is_err());
    }
}
