//! Gaussian matrix sensing `y_i = <A_i, X*>`.
//!
//! The operator is stored as an `m x n^2` matrix whose row `i` is `vec(A_i)`
//! in column-major order, so `A(X) = ops * vec(X)` and the adjoint is
//! `reshape(ops^T w)`.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::Objective;
use crate::error::{Error, Result};
use crate::linalg::{project_psd_rank_r, project_rank_r, FactoredMatrix};
use crate::rng::{haar_frame, seeded};

/// Generation parameters. Together they determine a [`SensingProblem`]
/// bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingParams {
    pub n: usize,
    /// Search rank.
    pub r: usize,
    pub r_star: usize,
    pub kappa: f64,
    pub m: usize,
    pub seed: u64,
    pub psd: bool,
}

impl SensingParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.r == 0 || self.r_star == 0 {
            return Err(Error::InvalidProblem("n, r and r_star must be positive".into()));
        }
        if self.r_star > self.r || self.r > self.n {
            return Err(Error::InvalidProblem(format!(
                "need r_star <= r <= n, got r_star={}, r={}, n={}",
                self.r_star, self.r, self.n
            )));
        }
        if self.m == 0 {
            return Err(Error::InvalidProblem("m must be positive".into()));
        }
        if !(self.kappa.is_finite() && self.kappa >= 1.0) {
            return Err(Error::InvalidProblem(format!("kappa must be >= 1, got {}", self.kappa)));
        }
        Ok(())
    }

    /// Diagonal of `Sigma*`: `r_star` values evenly spaced from 1 to `1/kappa`.
    pub fn singular_values(&self) -> DVector<f64> {
        let k = self.r_star;
        if k == 1 {
            return DVector::from_element(1, 1.0);
        }
        let lo = 1.0 / self.kappa;
        DVector::from_fn(k, |i, _| {
            let t = i as f64 / (k - 1) as f64;
            (1.0 - t) + lo * t
        })
    }
}

#[derive(Debug, Clone)]
pub struct SensingProblem {
    params: SensingParams,
    ops: DMatrix<f64>,
    y: DVector<f64>,
    ground_truth: FactoredMatrix,
}

/// Draws `U*` (Haar), `V*` (Haar, or `U*` in PSD mode), then the operator
/// entries row by row, each `N(0, 1/m)`.
pub fn generate_sensing(params: SensingParams) -> Result<SensingProblem> {
    params.validate()?;
    let SensingParams { n, r, r_star, m, psd, .. } = params;
    let mut rng = seeded(params.seed);
    let u = haar_frame(n, r_star, &mut rng);
    let v = if psd { u.clone() } else { haar_frame(n, r_star, &mut rng) };
    let ground_truth = FactoredMatrix::new(u, params.singular_values(), v)?.with_search_rank(r)?;

    let scale = 1.0 / (m as f64).sqrt();
    let data: Vec<f64> = (0..m * n * n)
        .map(|_| scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
        .collect();
    let ops = DMatrix::from_row_slice(m, n * n, &data);
    let y = &ops * vectorize(&ground_truth.dense());
    Ok(SensingProblem {
        params,
        ops,
        y,
        ground_truth,
    })
}

fn vectorize(x: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(x.as_slice())
}

impl SensingProblem {
    pub fn params(&self) -> &SensingParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn m(&self) -> usize {
        self.params.m
    }

    pub fn is_psd(&self) -> bool {
        self.params.psd
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn ground_truth(&self) -> &FactoredMatrix {
        &self.ground_truth
    }

    /// Replaces the observations, keeping operator and ground truth.
    pub fn with_observations(mut self, y: DVector<f64>) -> Result<Self> {
        if y.len() != self.m() {
            return Err(Error::DimensionMismatch {
                expected: (self.m(), 1),
                found: (y.len(), 1),
            });
        }
        self.y = y;
        Ok(self)
    }

    /// `A_i` as a dense `n x n` matrix.
    pub fn operator(&self, i: usize) -> DMatrix<f64> {
        let n = self.n();
        let row: Vec<f64> = self.ops.row(i).iter().copied().collect();
        DMatrix::from_vec(n, n, row)
    }

    /// `A(X) = (<A_i, X>)_i`.
    pub fn apply(&self, x: &DMatrix<f64>) -> DVector<f64> {
        &self.ops * vectorize(x)
    }

    /// `A^*(w) = sum_i w_i A_i`.
    pub fn adjoint(&self, w: &DVector<f64>) -> DMatrix<f64> {
        let n = self.n();
        let v = self.ops.tr_mul(w);
        DMatrix::from_vec(n, n, v.data.into())
    }
}

/// `f(X) = 1/2 |A(X) - y|^2`, with gradient `A^*(A(X) - y)`.
///
/// In PSD mode the gradient is symmetrized, which is the gradient of `f`
/// restricted to symmetric matrices.
#[derive(Debug, Clone, Copy)]
pub struct SensingObjective<'a> {
    problem: &'a SensingProblem,
}

pub fn sensing_objective(problem: &SensingProblem) -> SensingObjective<'_> {
    SensingObjective { problem }
}

impl<'a> SensingObjective<'a> {
    pub fn problem(&self) -> &'a SensingProblem {
        self.problem
    }

    fn residual(&self, x: &DMatrix<f64>) -> DVector<f64> {
        self.problem.apply(x) - &self.problem.y
    }

    fn gradient_from_residual(&self, res: &DVector<f64>) -> DMatrix<f64> {
        let g = self.problem.adjoint(res);
        if self.problem.is_psd() {
            (&g + g.transpose()) * 0.5
        } else {
            g
        }
    }
}

impl Objective for SensingObjective<'_> {
    fn shape(&self) -> (usize, usize) {
        (self.problem.n(), self.problem.n())
    }

    fn value(&self, x: &DMatrix<f64>) -> f64 {
        0.5 * self.residual(x).norm_squared()
    }

    fn gradient(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.gradient_from_residual(&self.residual(x))
    }

    fn value_and_gradient(&self, x: &DMatrix<f64>) -> (f64, DMatrix<f64>) {
        let res = self.residual(x);
        (0.5 * res.norm_squared(), self.gradient_from_residual(&res))
    }
}

/// Rank-`r` truncation of `sum_i y_i A_i`; in PSD mode, the PSD projection of
/// its symmetric part.
pub fn spectral_init(problem: &SensingProblem, r: usize) -> Result<FactoredMatrix> {
    let z = problem.adjoint(&problem.y);
    if problem.is_psd() {
        project_psd_rank_r(&((&z + z.transpose()) * 0.5), r)
    } else {
        project_rank_r(&z, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(psd: bool) -> SensingParams {
        SensingParams {
            n: 5,
            r: 2,
            r_star: 2,
            kappa: 4.0,
            m: 30,
            seed: 3,
            psd,
        }
    }

    #[test]
    fn operator_rows_match_apply() {
        let p = generate_sensing(params(false)).unwrap();
        let x = p.ground_truth().dense();
        for i in 0..p.m() {
            let direct = p.operator(i).component_mul(&x).sum();
            assert!((direct - p.observations()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_truth_is_symmetric() {
        let p = generate_sensing(params(true)).unwrap();
        let x = p.ground_truth().dense();
        assert!((&x - x.transpose()).norm() < 1e-14);
    }

    #[test]
    fn singular_values_are_evenly_spaced() {
        let mut sp = params(false);
        sp.r_star = 3;
        sp.r = 3;
        sp.kappa = 5.0;
        let s = sp.singular_values();
        assert_eq!(s[0], 1.0);
        assert_eq!(s[2], 0.2);
        assert!((s[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_ranks() {
        let mut sp = params(false);
        sp.r_star = 3;
        assert!(generate_sensing(sp).is_err());
        sp.r_star = 2;
        sp.kappa = 0.5;
        assert!(generate_sensing(sp).is_err());
    }
}
