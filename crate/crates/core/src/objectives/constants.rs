use nalgebra::DMatrix;

use super::Objective;
use crate::error::{Error, Result};
use crate::rng::{random_low_rank, seeded};

/// Empirical restricted smoothness and strong convexity over rank-`2r`
/// differences.
///
/// `L_hat` is the largest gradient Lipschitz ratio over random pairs of
/// rank-`r` points; `mu_hat` is the smallest curvature `<H[E], E> / |E|^2`
/// along random rank-`2r` directions, with the Hessian action taken as a
/// forward difference of the gradient. `L_hat` underestimates `L` and
/// `mu_hat` overestimates `mu`.
pub fn estimate_restricted_constants<F: Objective + ?Sized>(
    f: &F,
    r: usize,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    let (n1, n2) = f.shape();
    let mut rng = seeded(seed);
    let mut l_hat = 0.0_f64;
    let mut mu_hat = f64::INFINITY;
    for _ in 0..samples {
        let x: DMatrix<f64> = random_low_rank(n1, n2, r, &mut rng);
        let x2 = random_low_rank(n1, n2, r, &mut rng);
        let dist = (&x - &x2).norm();
        let gx = f.gradient(&x);
        if dist > 0.0 {
            l_hat = l_hat.max((&gx - f.gradient(&x2)).norm() / dist);
        }
        let e = random_low_rank(n1, n2, 2 * r, &mut rng);
        let h = 1e-6;
        let curvature = (f.gradient(&(&x + &e * h)) - &gx).dot(&e) / h;
        mu_hat = mu_hat.min(curvature / e.norm_squared());
    }
    Ok((l_hat, mu_hat))
}
