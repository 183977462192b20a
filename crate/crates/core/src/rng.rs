//! Seeded randomness.
//!
//! Every random quantity in the crate is drawn from [`ChaCha8Rng`], a
//! counter-based generator whose output stream is fixed by its 64-bit seed
//! and stream id on every platform. Independent runs use [`split_seed`] so
//! that adding runs to a batch never perturbs the existing ones.

use nalgebra::DMatrix;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use rand_chacha::ChaCha8Rng as SolverRng;

/// Generator for `seed`, stream 0.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives the seed of run `index` from a master seed: the first word of
/// stream `index` of the master generator.
pub fn split_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Matrix of i.i.d. standard normal entries, drawn in column-major order.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_vec(rows, cols, data)
}

/// Haar-distributed `n x k` orthonormal frame: QR of a Gaussian matrix with
/// the signs of `R`'s diagonal folded into `Q`.
pub fn haar_frame<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> DMatrix<f64> {
    assert!(k <= n, "frame width {k} exceeds dimension {n}");
    if k == 0 {
        return DMatrix::zeros(n, 0);
    }
    let g = gaussian_matrix(n, k, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Random `n1 x n2` matrix of rank at most `rank` with unit Frobenius norm.
pub fn random_low_rank<R: Rng + ?Sized>(
    n1: usize,
    n2: usize,
    rank: usize,
    rng: &mut R,
) -> DMatrix<f64> {
    let a = gaussian_matrix(n1, rank, rng);
    let b = gaussian_matrix(rank, n2, rng);
    let m = a * b;
    let norm = m.norm();
    if norm > 0.0 {
        m / norm
    } else {
        m
    }
}
