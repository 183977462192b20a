//! Objective functions `f: R^{n1 x n2} -> R`.

mod constants;
mod quadratic;
mod sensing;

use nalgebra::DMatrix;

pub use constants::estimate_restricted_constants;
pub use quadratic::{quadratic_objective, Quadratic, WeightedQuadratic};
pub use sensing::{generate_sensing, sensing_objective, spectral_init, SensingObjective, SensingParams, SensingProblem};

/// Restricted smoothness `l`, restricted strong convexity `mu` and Hessian
/// Lipschitz constant `rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothnessConstants {
    pub l: f64,
    pub mu: f64,
    pub rho: f64,
}

impl SmoothnessConstants {
    /// `l / mu`.
    pub fn condition_number(&self) -> f64 {
        self.l / self.mu
    }
}

/// A smooth loss over dense matrices.
pub trait Objective: Sync {
    /// `(rows, cols)` of the argument.
    fn shape(&self) -> (usize, usize);

    fn value(&self, x: &DMatrix<f64>) -> f64;

    fn gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64>;

    fn value_and_gradient(&self, x: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        (self.value(x), self.gradient(x))
    }

    /// Known constants, if any.
    fn smoothness_constants(&self) -> Option<SmoothnessConstants> {
        None
    }
}

impl<T: Objective + ?Sized> Objective for &T {
    fn shape(&self) -> (usize, usize) {
        (**self).shape()
    }
    fn value(&self, x: &DMatrix<f64>) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        (**self).gradient(x)
    }
    fn value_and_gradient(&self, x: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        (**self).value_and_gradient(x)
    }
    fn smoothness_constants(&self) -> Option<SmoothnessConstants> {
        (**self).smoothness_constants()
    }
}
