use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, FactoredMatrix};

/// `|X - X*|_F / |X*|_F`.
pub fn relative_error(x: &FactoredMatrix, x_star: &FactoredMatrix) -> Result<f64> {
    if x.shape() != x_star.shape() {
        return Err(Error::DimensionMismatch {
            expected: x_star.shape(),
            found: x.shape(),
        });
    }
    let star = x_star.dense();
    let norm = star.norm();
    if norm == 0.0 {
        return Err(Error::ZeroGroundTruth);
    }
    Ok((x.dense() - star).norm() / norm)
}

/// Largest singular value.
pub fn spectral_norm(z: &DMatrix<f64>) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    singular_values(z).map_or(f64::NAN, |s| s[0])
}
