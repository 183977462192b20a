use serde::{Deserialize, Serialize};

use super::metrics::spectral_norm;
use crate::error::Result;
use crate::linalg::{pullback_hessian_min_eig, project_tangent, FactoredMatrix};
use crate::objectives::Objective;

/// Thresholds for [`certify_second_order`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    /// Pullback gradient tolerance.
    pub eps: f64,
    /// Allowed negative curvature.
    pub gamma: f64,
    /// Tangent ball radius of the run that produced the point.
    pub epsilon_t: f64,
    /// Step size of the run that produced the point.
    pub eta: f64,
}

impl CertifyParams {
    /// `(8/3)(eps + epsilon_t / eta)`, the gradient bound guaranteed where
    /// the perturbed method stops.
    pub fn ambient_threshold(&self) -> f64 {
        8.0 / 3.0 * (self.eps + self.epsilon_t / self.eta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    SecondOrderMinimizer,
    AmbientStationary,
    Saddle,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderCertificate {
    /// `|grad f_X(0)|_F`; absent below the search rank.
    pub grad_norm: Option<f64>,
    /// `lambda_min(hess f_X(0))`; absent below the search rank.
    pub min_eig: Option<f64>,
    pub sigma_r: f64,
    /// `|grad f(X)|_2`.
    pub ambient_grad_norm: f64,
    /// `|grad f(X)|_F`.
    pub ambient_grad_norm_fro: f64,
    /// Eigenvalues with magnitude below this count as zero.
    pub eig_zero_tol: f64,
    pub classification: Classification,
}

/// Classifies a point from its measured quantities. Checked in order:
/// second-order minimizer (`grad_norm <= eps` and `min_eig >= -gamma`),
/// ambient stationary (`ambient_grad_norm` below
/// [`CertifyParams::ambient_threshold`]), saddle (`min_eig < -gamma`),
/// otherwise indeterminate.
pub fn classify(
    grad_norm: Option<f64>,
    min_eig: Option<f64>,
    ambient_grad_norm: f64,
    eig_zero_tol: f64,
    params: &CertifyParams,
) -> Classification {
    let min_eig = min_eig.map(|e| if e.abs() < eig_zero_tol { 0.0 } else { e });
    if let (Some(g), Some(e)) = (grad_norm, min_eig) {
        if g <= params.eps && e >= -params.gamma {
            return Classification::SecondOrderMinimizer;
        }
    }
    if ambient_grad_norm < params.ambient_threshold() {
        return Classification::AmbientStationary;
    }
    match min_eig {
        Some(e) if e < -params.gamma => Classification::Saddle,
        _ => Classification::Indeterminate,
    }
}

/// Measures and classifies `x`. Points below the search rank have no
/// tangent space and are judged by the ambient gradient alone.
pub fn certify_second_order<F: Objective + ?Sized>(
    x: &FactoredMatrix,
    f: &F,
    params: &CertifyParams,
) -> Result<SecondOrderCertificate> {
    let dense = x.dense();
    let g = f.gradient(&dense);
    let ambient_grad_norm = spectral_norm(&g);
    let ambient_grad_norm_fro = g.norm();
    let l_hat = f.smoothness_constants().map_or(1.0, |c| c.l);
    let eig_zero_tol = 1e-7 * l_hat.max(1.0);
    let (grad_norm, min_eig) = if x.is_full_rank() {
        let pg = project_tangent(&g, x)?.norm();
        let (lmin, _) = pullback_hessian_min_eig(f, x)?;
        (Some(pg), Some(lmin))
    } else {
        (None, None)
    };
    let classification = classify(grad_norm, min_eig, ambient_grad_norm, eig_zero_tol, params);
    Ok(SecondOrderCertificate {
        grad_norm,
        min_eig,
        sigma_r: x.sigma_r(),
        ambient_grad_norm,
        ambient_grad_norm_fro,
        eig_zero_tol,
        classification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: CertifyParams = CertifyParams {
        eps: 1e-3,
        gamma: 1e-2,
        epsilon_t: 1e-2,
        eta: 0.5,
    };

    #[test]
    fn classification_order() {
        use Classification::*;
        assert_eq!(classify(Some(0.0), Some(0.5), 1.0, 1e-7, &P), SecondOrderMinimizer);
        assert_eq!(classify(Some(0.0), Some(-0.5), 0.01, 1e-7, &P), AmbientStationary);
        assert_eq!(classify(Some(0.0), Some(-0.5), 1.0, 1e-7, &P), Saddle);
        assert_eq!(classify(Some(1.0), Some(0.5), 1.0, 1e-7, &P), Indeterminate);
        assert_eq!(classify(None, None, 1.0, 1e-7, &P), Indeterminate);
        assert_eq!(classify(None, None, 0.01, 1e-7, &P), AmbientStationary);
    }

    #[test]
    fn tiny_eigenvalues_count_as_zero() {
        let strict = CertifyParams { gamma: 0.0, ..P };
        assert_eq!(
            classify(Some(0.0), Some(-1e-9), 1.0, 1e-7, &strict),
            Classification::SecondOrderMinimizer
        );
    }
}
