//! Perturbed projected gradient descent.
//!
//! Each iteration computes `X+ = P_r(X - eta grad f(X))` and then
//!
//! 1. takes the step if `|X+ - X|_F >= 2 eta epsilon / 3`;
//! 2. otherwise, if `sigma_r(X) > 2 epsilon_t`, runs [`tangent_space_steps`];
//! 3. otherwise stops and returns `X`.

use rand::Rng;

use super::config::SolverConfig;
use super::projgd::projgd_step;
use super::run::Recorder;
use super::trace::{Branch, SolverTrace, Status};
use crate::error::Result;
use crate::linalg::{pullback_value_grad, retract, FactoredMatrix, TangentVector};
use crate::objectives::Objective;
use crate::rng::seeded;

/// Nonnegative `t` with `|s - t g|_F = radius`, given `|s|_F <= radius`.
///
/// Solves `|g|^2 t^2 - 2 <s, g> t + |s|^2 - radius^2 = 0`; the constant term
/// is nonpositive so exactly one root is nonnegative. Returns `0` when
/// `g = 0`.
pub fn boundary_step_length(s: &TangentVector<'_>, g: &TangentVector<'_>, radius: f64) -> f64 {
    let a = g.norm_squared();
    if a == 0.0 {
        return 0.0;
    }
    let b = s.dot(g);
    let c = (s.norm_squared() - radius * radius).min(0.0);
    let disc = (b * b - a * c).max(0.0).sqrt();
    if b >= 0.0 {
        (b + disc) / a
    } else if disc - b > 0.0 {
        -c / (disc - b)
    } else {
        0.0
    }
}

/// Gradient descent on the pullback `f(Retr_X(.))` inside the ball of radius
/// `epsilon_t`, started from a random point at distance
/// `eta_t * perturb_radius`.
///
/// A step that would leave the ball is shortened to land on its boundary and
/// the retraction of that point is returned immediately; otherwise the
/// retraction of the last iterate is returned after `max_iters` steps.
#[allow(clippy::too_many_arguments)]
pub fn tangent_space_steps<F: Objective + ?Sized, R: Rng + ?Sized>(
    x: &FactoredMatrix,
    f: &F,
    perturb_radius: f64,
    eta_t: f64,
    epsilon_t: f64,
    max_iters: usize,
    rng: &mut R,
) -> Result<FactoredMatrix> {
    let mut s = TangentVector::random_sphere(x, perturb_radius, rng)?.scaled(eta_t);
    for _ in 0..max_iters {
        let (_, g) = pullback_value_grad(f, x, &s)?;
        let next = s.axpy(-eta_t, &g);
        if next.norm() <= epsilon_t {
            s = next;
            continue;
        }
        let t = boundary_step_length(&s, &g, epsilon_t);
        return retract(x, &s.axpy(-t, &g));
    }
    retract(x, &s)
}

/// Runs the perturbed method from `x0` for at most `cfg.max_iters`
/// iterations. Only the three-way branch and the iteration budget end a run;
/// the relative-error thresholds of `cfg` are not consulted.
pub fn pprojgd<F: Objective + ?Sized>(
    f: &F,
    x0: &FactoredMatrix,
    x_star: Option<&FactoredMatrix>,
    cfg: &SolverConfig,
) -> Result<(FactoredMatrix, SolverTrace)> {
    cfg.validate()?;
    let params = cfg.pproj_params();
    let mut rng = seeded(cfg.seed);
    let mut rec = Recorder::new(f, x_star, cfg.checkpoint_stride);
    let mut x = x0.clone();
    let mut x_dense = x.dense();
    rec.push(0, &x, &x_dense, 0.0, Branch::Init);
    let threshold = 2.0 * cfg.eta * params.epsilon / 3.0;
    let mut status = Status::MaxIters;
    for t in 1..=cfg.max_iters {
        let plus = match projgd_step(&x, f, cfg.eta, cfg.psd) {
            Ok(p) => p,
            Err(e) => {
                status = Status::Failed(e.to_string());
                break;
            }
        };
        let plus_dense = plus.dense();
        let step = (&plus_dense - &x_dense).norm();
        let (next, next_dense, branch) = if step >= threshold {
            (plus, plus_dense, Branch::Gradient)
        } else if x.sigma_r() > 2.0 * params.epsilon_t {
            let escaped = tangent_space_steps(
                &x,
                f,
                params.perturb_radius,
                params.eta_t,
                params.epsilon_t,
                params.max_tangent_iters,
                &mut rng,
            );
            match escaped {
                Ok(e) => {
                    let d = e.dense();
                    (e, d, Branch::TangentEscape)
                }
                Err(e) => {
                    status = Status::Failed(e.to_string());
                    break;
                }
            }
        } else {
            rec.push(t, &x, &x_dense, 0.0, Branch::Terminate);
            status = Status::SecondOrderStop;
            break;
        };
        let moved = (&next_dense - &x_dense).norm();
        x = next;
        x_dense = next_dense;
        rec.push(t, &x, &x_dense, moved, branch);
    }
    let trace = rec.finish(status, x.clone());
    Ok((x, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{haar_frame, seeded};
    use nalgebra::DVector;

    #[test]
    fn boundary_root_lands_on_sphere() {
        let mut rng = seeded(4);
        let u = haar_frame(5, 2, &mut rng);
        let v = haar_frame(4, 2, &mut rng);
        let x = FactoredMatrix::new(u, DVector::from_vec(vec![2.0, 1.0]), v).unwrap();
        for radius in [0.1, 1.0] {
            let s = TangentVector::random_sphere(&x, 0.5 * radius, &mut rng).unwrap();
            let g = TangentVector::random_sphere(&x, 3.0, &mut rng).unwrap();
            let t = boundary_step_length(&s, &g, radius);
            assert!(t > 0.0);
            assert!((s.axpy(-t, &g).norm() - radius).abs() < 1e-12);
        }
    }
}
