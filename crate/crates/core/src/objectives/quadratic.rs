use nalgebra::DMatrix;

use super::{Objective, SmoothnessConstants};
use crate::error::{Error, Result};
use crate::linalg::FactoredMatrix;

/// `f(X) = 1/2 |X - X*|_F^2`, so `L = mu = 1` and `rho = 0`.
#[derive(Debug, Clone)]
pub struct Quadratic {
    target: DMatrix<f64>,
}

impl Quadratic {
    pub fn new(target: DMatrix<f64>) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.target
    }
}

pub fn quadratic_objective(x_star: &FactoredMatrix) -> Quadratic {
    Quadratic::new(x_star.dense())
}

impl Objective for Quadratic {
    fn shape(&self) -> (usize, usize) {
        self.target.shape()
    }

    fn value(&self, x: &DMatrix<f64>) -> f64 {
        0.5 * (x - &self.target).norm_squared()
    }

    fn gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x - &self.target
    }

    fn value_and_gradient(&self, x: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let g = x - &self.target;
        (0.5 * g.norm_squared(), g)
    }

    fn smoothness_constants(&self) -> Option<SmoothnessConstants> {
        Some(SmoothnessConstants {
            l: 1.0,
            mu: 1.0,
            rho: 0.0,
        })
    }
}

/// `f(X) = 1/2 sum_ij w_ij (X_ij - T_ij)^2` with positive weights.
///
/// Constants are `L = max w`, `mu = min w`, `rho = 0`.
#[derive(Debug, Clone)]
pub struct WeightedQuadratic {
    target: DMatrix<f64>,
    weights: DMatrix<f64>,
}

impl WeightedQuadratic {
    pub fn new(target: DMatrix<f64>, weights: DMatrix<f64>) -> Result<Self> {
        if target.shape() != weights.shape() {
            return Err(Error::DimensionMismatch {
                expected: target.shape(),
                found: weights.shape(),
            });
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidProblem("weights must be positive and finite".into()));
        }
        Ok(Self { target, weights })
    }

    pub fn target(&self) -> &DMatrix<f64> {
        &self.target
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }
}

impl Objective for WeightedQuadratic {
    fn shape(&self) -> (usize, usize) {
        self.target.shape()
    }

    fn value(&self, x: &DMatrix<f64>) -> f64 {
        let d = x - &self.target;
        0.5 * d.component_mul(&d).component_mul(&self.weights).sum()
    }

    fn gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        (x - &self.target).component_mul(&self.weights)
    }

    fn smoothness_constants(&self) -> Option<SmoothnessConstants> {
        Some(SmoothnessConstants {
            l: self.weights.max(),
            mu: self.weights.min(),
            rho: 0.0,
        })
    }
}
