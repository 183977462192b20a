//! Brute-force search for stationary points of tiny instances.
//!
//! Starts are drawn on a grid of singular-value levels crossed with random
//! frames. From each start two candidates are produced: a short-step
//! projected gradient run followed by Newton polishing, and Newton polishing
//! of the raw start. Newton here is Levenberg-Marquardt on the pullback
//! gradient, `S = -(H^2 + lambda I)^{-1} H g`, which converges to saddles as
//! readily as to minimizers. Converged candidates are clustered and each
//! cluster is certified.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::certificate::{certify_second_order, CertifyParams, SecondOrderCertificate};
use crate::error::{Error, Result};
use crate::linalg::{project_tangent, pullback_hessian, retract, FactoredMatrix, TangentVector};
use crate::objectives::Objective;
use crate::rng::{haar_frame, seeded};
use crate::solvers::projgd_step;

pub const PROBE_MAX_N: usize = 4;
pub const PROBE_MAX_R: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    /// Singular-value levels per rank slot, log-spaced over
    /// `[level_min, level_max]`.
    pub levels: usize,
    pub level_min: f64,
    pub level_max: f64,
    /// Random frames per level combination.
    pub frames: usize,
    pub projgd_iters: usize,
    pub newton_iters: usize,
    /// Pullback gradient norm at which a candidate counts as stationary.
    pub tol: f64,
    /// Evaluation budget.
    pub max_evals: u64,
    pub seed: u64,
    pub certify: CertifyParams,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            levels: 5,
            level_min: 0.1,
            level_max: 10.0,
            frames: 8,
            projgd_iters: 200,
            newton_iters: 60,
            tol: 1e-10,
            max_evals: 10_000_000,
            seed: 0,
            certify: CertifyParams {
                eps: 1e-6,
                gamma: 1e-6,
                epsilon_t: 1e-2,
                eta: 0.3,
            },
        }
    }
}

impl ProbeConfig {
    /// Starting points implied by the grid.
    pub fn starts(&self, r: usize) -> u64 {
        (self.levels as u64).pow(r as u32) * self.frames as u64
    }

    /// Upper bound on gradient evaluations for an `n x n`, rank-`r` probe.
    pub fn estimated_evals(&self, n: usize, r: usize) -> u64 {
        let dim = (r * (2 * n - r)) as u64;
        let newton = self.newton_iters as u64 * (2 * dim + 1);
        self.starts(r) * (self.projgd_iters as u64 + 2 * newton)
    }

    /// Candidates closer than this are merged.
    pub fn cluster_radius(&self) -> f64 {
        10.0 * self.tol.sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct ProbePoint {
    pub x: FactoredMatrix,
    pub f_value: f64,
    pub grad_norm: f64,
    /// Number of candidates merged into this cluster.
    pub members: usize,
    pub certificate: SecondOrderCertificate,
}

fn levels(cfg: &ProbeConfig) -> Vec<f64> {
    if cfg.levels == 1 {
        return vec![cfg.level_max];
    }
    let (lo, hi) = (cfg.level_min.ln(), cfg.level_max.ln());
    (0..cfg.levels)
        .map(|i| (lo + (hi - lo) * i as f64 / (cfg.levels - 1) as f64).exp())
        .collect()
}

fn tangent_grad_norm<F: Objective + ?Sized>(f: &F, x: &FactoredMatrix) -> Option<f64> {
    let g = f.gradient(&x.dense());
    project_tangent(&g, x).ok().map(|t| t.norm())
}

/// Levenberg-Marquardt polishing; `None` if the rank collapses or the
/// gradient does not reach `tol`.
fn newton_polish<F: Objective + ?Sized>(
    f: &F,
    start: FactoredMatrix,
    cfg: &ProbeConfig,
) -> Option<(FactoredMatrix, f64)> {
    let mut x = start;
    for _ in 0..cfg.newton_iters {
        if !x.is_full_rank() || x.sigma_r() < 1e-8 * x.sigma_max().max(1.0) {
            return None;
        }
        let g = project_tangent(&f.gradient(&x.dense()), &x).ok()?;
        let gn = g.norm();
        if gn <= cfg.tol {
            return Some((x, gn));
        }
        let h = pullback_hessian(f, &x).ok()?.symmetrized();
        let dim = h.nrows();
        let lambda = 1e-12 * (h.norm_squared() + 1.0);
        let normal = &h * &h + DMatrix::identity(dim, dim) * lambda;
        let rhs: DVector<f64> = -(&h * g.to_coords());
        let mut step = normal.cholesky()?.solve(&rhs);
        let cap = 0.5 * x.sigma_r();
        let sn = step.norm();
        if sn > cap {
            step *= cap / sn;
        }
        let s = TangentVector::from_coords(&x, &step).ok()?;
        x = retract(&x, &s).ok()?;
    }
    let gn = tangent_grad_norm(f, &x)?;
    (gn <= cfg.tol).then_some((x, gn))
}

/// Approximate stationary points of `f` over rank-`r` matrices in
/// `R^{n x n}`, one representative (the lowest value) per cluster, sorted by
/// value.
pub fn landscape_probe<F: Objective + ?Sized>(
    f: &F,
    n: usize,
    r: usize,
    cfg: &ProbeConfig,
) -> Result<Vec<ProbePoint>> {
    if n > PROBE_MAX_N || r > PROBE_MAX_R || r == 0 || r >= n {
        return Err(Error::ProbeTooLarge { n, r });
    }
    if f.shape() != (n, n) {
        return Err(Error::DimensionMismatch {
            expected: (n, n),
            found: f.shape(),
        });
    }
    let estimated = cfg.estimated_evals(n, r);
    if estimated > cfg.max_evals {
        return Err(Error::BudgetExceeded {
            estimated,
            limit: cfg.max_evals,
        });
    }
    let l = f.smoothness_constants().map_or(1.0, |c| c.l);
    let eta = 0.05 / l;
    let grid = levels(cfg);
    let mut rng = seeded(cfg.seed);
    let mut candidates: Vec<(FactoredMatrix, f64, f64)> = Vec::new();
    let combos = grid.len().pow(r as u32);
    for combo in 0..combos {
        let mut sigma: Vec<f64> = (0..r)
            .map(|slot| grid[(combo / grid.len().pow(slot as u32)) % grid.len()])
            .collect();
        sigma.sort_by(|a, b| b.total_cmp(a));
        for _ in 0..cfg.frames {
            let jitter: Vec<f64> = sigma.iter().map(|s| s * rng.random_range(0.8..1.25)).collect();
            let mut jitter = jitter;
            jitter.sort_by(|a, b| b.total_cmp(a));
            let u = haar_frame(n, r, &mut rng);
            let v = haar_frame(n, r, &mut rng);
            let start = FactoredMatrix::new(u, DVector::from_vec(jitter), v)?;
            let mut descended = start.clone();
            for _ in 0..cfg.projgd_iters {
                match projgd_step(&descended, f, eta, false) {
                    Ok(next) => descended = next,
                    Err(_) => break,
                }
            }
            for seed_point in [descended, start] {
                if let Some((x, gn)) = newton_polish(f, seed_point, cfg) {
                    let fv = f.value(&x.dense());
                    candidates.push((x, fv, gn));
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
    let radius = cfg.cluster_radius();
    let mut reps: Vec<(FactoredMatrix, DMatrix<f64>, f64, f64, usize)> = Vec::new();
    for (x, fv, gn) in candidates {
        let dense = x.dense();
        match reps.iter_mut().find(|rep| (&rep.1 - &dense).norm() <= radius) {
            Some(rep) => rep.4 += 1,
            None => reps.push((x, dense, fv, gn, 1)),
        }
    }
    reps.into_iter()
        .map(|(x, _, f_value, grad_norm, members)| {
            let certificate = certify_second_order(&x, f, &cfg.certify)?;
            Ok(ProbePoint {
                x,
                f_value,
                grad_norm,
                members,
                certificate,
            })
        })
        .collect()
}
