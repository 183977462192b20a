//! Randomized and trace-driven checks of the inequalities the solvers rely
//! on. Violations are reported, never thrown.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::metrics::spectral_norm;
use crate::linalg::{project_rank_r, project_tangent, FactoredMatrix};
use crate::objectives::Objective;
use crate::rng::{gaussian_matrix, haar_frame, random_low_rank, seeded};
use crate::solvers::{Branch, SolverTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    /// False when `eta > 1 / L`, where the inequality is not claimed.
    pub applicable: bool,
    pub checked: usize,
    pub violations: usize,
    /// Smallest `f(X) - f(X+) - (1/eta - L) |X - X+|^2 / 2` seen.
    pub worst_slack: f64,
}

/// Checks `f(X) - f(X+) >= (1/eta - L) |X - X+|_F^2 / 2` on every pair of
/// consecutive checkpoints joined by a gradient step.
pub fn check_descent_lemma<F: Objective + ?Sized>(
    trace: &SolverTrace,
    f: &F,
    l: f64,
    eta: f64,
) -> DescentReport {
    let mut report = DescentReport {
        applicable: eta <= 1.0 / l,
        checked: 0,
        violations: 0,
        worst_slack: f64::INFINITY,
    };
    if !report.applicable {
        return report;
    }
    let coef = 0.5 * (1.0 / eta - l);
    for pair in trace.checkpoints.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if b.iter != a.iter + 1 {
            continue;
        }
        let gradient_step = trace
            .records
            .iter()
            .find(|r| r.iter == b.iter)
            .is_some_and(|r| r.branch == Branch::Gradient);
        if !gradient_step {
            continue;
        }
        let (xa, xb) = (a.x.dense(), b.x.dense());
        let (fa, fb) = (f.value(&xa), f.value(&xb));
        let slack = fa - fb - coef * (&xa - &xb).norm_squared();
        report.checked += 1;
        report.worst_slack = report.worst_slack.min(slack);
        if slack < -1e-12 * fa.abs().max(1.0) {
            report.violations += 1;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub samples: usize,
    pub bound: f64,
    /// Smallest `|P_r(Y) - X|_F / |P_T(Y - X)|_F`.
    pub min_ratio: f64,
    pub violations: usize,
    /// Smallest `|P_r(X + Z) - X|_F / max((|Z|_2 - sigma_r) / 2, bound |P_T Z|_F)`.
    pub min_ratio_max_form: f64,
    pub violations_max_form: usize,
}

impl ProjectionReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.violations_max_form == 0
    }
}

/// A random rank-`r` point with singular values spread over two decades.
fn random_point<R: Rng + ?Sized>(n: usize, r: usize, rng: &mut R) -> FactoredMatrix {
    let u = haar_frame(n, r, rng);
    let v = haar_frame(n, r, rng);
    let mut s: Vec<f64> = (0..r).map(|_| 10f64.powf(rng.random_range(-1.0..1.0))).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    FactoredMatrix::new(u, DVector::from_vec(s), v).expect("valid random point")
}

/// A perturbation of `x` drawn from one of several families: generic
/// Gaussian, tangent only, tangent with a core cancelling part of `x`,
/// corner only, and rank one. Its Frobenius norm is log-uniform in
/// `[1e-3 sigma_r, 10 sigma_1]`.
fn random_perturbation<R: Rng + ?Sized>(x: &FactoredMatrix, rng: &mut R) -> DMatrix<f64> {
    let (n1, n2) = x.shape();
    let r = x.rank();
    let g = gaussian_matrix(n1, n2, rng);
    let z = match rng.random_range(0..5) {
        0 => g,
        1 => project_tangent(&g, x).expect("full rank").to_dense(),
        2 => {
            let mut t = project_tangent(&g, x).expect("full rank");
            let scale = t.left.norm().max(t.right.norm()).max(1e-3);
            t.core = -DMatrix::from_diagonal(x.sigma()) / x.sigma_max() * scale * rng.random_range(0.5..2.0);
            t.to_dense()
        }
        3 => {
            let (up, vp) = x.complements();
            up * gaussian_matrix(n1 - r, n2 - r, rng) * vp.transpose()
        }
        _ => random_low_rank(n1, n2, 1, rng),
    };
    let norm = z.norm();
    if norm == 0.0 {
        return z;
    }
    let lo = (1e-3 * x.sigma_r()).ln();
    let hi = (10.0 * x.sigma_max()).ln();
    z * (rng.random_range(lo..hi).exp() / norm)
}

/// Randomized check of `|P_r(Y) - X|_F >= bound |P_T(Y) - X|_F` and of
/// `|P_r(X + Z) - X|_F >= max((|Z|_2 - sigma_r(X)) / 2, bound |P_T(Z)|_F)`
/// over random rank-`r` points `X` in `R^{n x n}`. The inequalities hold
/// with `bound = 2/3`.
pub fn check_projection_lemma(samples: usize, n: usize, r: usize, seed: u64, bound: f64) -> ProjectionReport {
    assert!(r >= 1 && r < n, "need 1 <= r < n");
    let mut rng = seeded(seed);
    let mut report = ProjectionReport {
        samples,
        bound,
        min_ratio: f64::INFINITY,
        violations: 0,
        min_ratio_max_form: f64::INFINITY,
        violations_max_form: 0,
    };
    for _ in 0..samples {
        let x = random_point(n, r, &mut rng);
        let z = random_perturbation(&x, &mut rng);
        let xd = x.dense();
        let y = &xd + &z;
        let lhs = match project_rank_r(&y, r) {
            Ok(p) => (p.dense() - &xd).norm(),
            Err(_) => continue,
        };
        let pt = project_tangent(&z, &x).expect("full rank").norm();
        if pt > 0.0 {
            let ratio = lhs / pt;
            report.min_ratio = report.min_ratio.min(ratio);
            if lhs < bound * pt - 1e-9 * pt.max(1.0) {
                report.violations += 1;
            }
        }
        let rhs = (0.5 * (spectral_norm(&z) - x.sigma_r())).max(bound * pt);
        if rhs > 0.0 {
            report.min_ratio_max_form = report.min_ratio_max_form.min(lhs / rhs);
            if lhs < rhs - 1e-9 * rhs.max(1.0) {
                report.violations_max_form += 1;
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// `(L - mu) / (L + mu)`.
    pub kappa0: f64,
    /// Largest observed `|c grad f(X) - (X - X*)|_F / |X - X*|_F`, with
    /// `c = 2 / (L + mu)`.
    pub max_ratio: f64,
    pub violations: usize,
}

/// Checks `|c grad f(X) - (X - X*)|_F <= kappa0 |X - X*|_F` on `samples`
/// random rank-`r` points, where `c = 2/(L + mu)` normalizes `L + mu` to 2
/// and `kappa0 = (L - mu)/(L + mu)`. Requires known constants.
pub fn check_gradient_deviation<F: Objective + ?Sized>(
    f: &F,
    x_star: &DMatrix<f64>,
    r: usize,
    samples: usize,
    seed: u64,
) -> Option<DeviationReport> {
    let c = f.smoothness_constants()?;
    let scale = 2.0 / (c.l + c.mu);
    let kappa0 = (c.l - c.mu) / (c.l + c.mu);
    let (n1, n2) = f.shape();
    let mut rng = seeded(seed);
    let mut report = DeviationReport {
        kappa0,
        max_ratio: 0.0,
        violations: 0,
    };
    for _ in 0..samples {
        let x = random_low_rank(n1, n2, r, &mut rng) * rng.random_range(0.1..10.0);
        let d = &x - x_star;
        let dn = d.norm();
        if dn == 0.0 {
            continue;
        }
        let dev = (f.gradient(&x) * scale - &d).norm();
        report.max_ratio = report.max_ratio.max(dev / dn);
        if dev > kappa0 * dn + 1e-12 * dn.max(1.0) {
            report.violations += 1;
        }
    }
    Some(report)
}

/// `(8/3)(epsilon + epsilon_t / eta)`: bound on `|grad f(X)|_2` wherever the
/// perturbed method stops.
pub fn stop_gradient_bound(epsilon: f64, epsilon_t: f64, eta: f64) -> f64 {
    8.0 / 3.0 * (epsilon + epsilon_t / eta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopGuarantee {
    pub grad_norm: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Checks [`stop_gradient_bound`] at a terminal point, with absolute slack
/// `1e-8`.
pub fn check_stop_guarantee<F: Objective + ?Sized>(
    x: &FactoredMatrix,
    f: &F,
    epsilon: f64,
    epsilon_t: f64,
    eta: f64,
) -> StopGuarantee {
    let grad_norm = spectral_norm(&f.gradient(&x.dense()));
    let bound = stop_gradient_bound(epsilon, epsilon_t, eta);
    StopGuarantee {
        grad_norm,
        bound,
        holds: grad_norm <= bound + 1e-8,
    }
}
