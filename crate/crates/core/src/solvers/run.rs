use std::time::Instant;

use nalgebra::DMatrix;

use super::config::{Algorithm, PrecReg, SolverConfig};
use super::factored::{fgd_step, precgd_step, Factors};
use super::pprojgd::pprojgd;
use super::projgd::projgd_step;
use super::trace::{Branch, Checkpoint, IterRecord, SolverTrace, Status};
use crate::error::{Error, Result};
use crate::linalg::FactoredMatrix;
use crate::objectives::Objective;

/// Builds the per-iteration telemetry of a run.
pub(crate) struct Recorder<'f, F: ?Sized> {
    f: &'f F,
    x_star: Option<(DMatrix<f64>, f64)>,
    f_star: Option<f64>,
    stride: usize,
    records: Vec<IterRecord>,
    checkpoints: Vec<Checkpoint>,
    breakdowns: Vec<usize>,
    max_gram_condition: f64,
    started: Instant,
}

impl<'f, F: Objective + ?Sized> Recorder<'f, F> {
    pub(crate) fn new(f: &'f F, x_star: Option<&FactoredMatrix>, stride: usize) -> Self {
        let x_star = x_star.map(|xs| {
            let d = xs.dense();
            let norm = d.norm();
            (d, norm)
        });
        let f_star = x_star.as_ref().map(|(d, _)| f.value(d));
        Self {
            f,
            x_star,
            f_star,
            stride: stride.max(1),
            records: Vec::new(),
            checkpoints: Vec::new(),
            breakdowns: Vec::new(),
            max_gram_condition: 0.0,
            started: Instant::now(),
        }
    }

    pub(crate) fn push(
        &mut self,
        iter: usize,
        x: &FactoredMatrix,
        x_dense: &DMatrix<f64>,
        step_norm: f64,
        branch: Branch,
    ) -> &IterRecord {
        let f_value = self.f.value(x_dense);
        let rel_err = match &self.x_star {
            Some((d, norm)) if *norm > 0.0 => Some((x_dense - d).norm() / norm),
            _ => None,
        };
        self.records.push(IterRecord {
            iter,
            f_value,
            f_gap: self.f_star.map(|fs| f_value - fs),
            rel_err,
            step_norm,
            sigma_r: x.sigma_r(),
            branch,
        });
        let phase = iter % self.stride;
        if phase <= 1 && self.checkpoints.last().is_none_or(|c| c.iter < iter) {
            self.checkpoints.push(Checkpoint { iter, x: x.clone() });
        }
        self.records.last().expect("just pushed")
    }

    pub(crate) fn gram(&mut self, iter: usize, condition: f64, breakdown: bool) {
        self.max_gram_condition = self.max_gram_condition.max(condition);
        if breakdown {
            self.breakdowns.push(iter);
        }
    }

    pub(crate) fn finish(self, status: Status, final_iterate: FactoredMatrix) -> SolverTrace {
        SolverTrace {
            records: self.records,
            checkpoints: self.checkpoints,
            status,
            final_iterate,
            breakdowns: self.breakdowns,
            max_gram_condition: self.max_gram_condition,
            wall_time: self.started.elapsed(),
        }
    }
}

fn stop_status(rec: &IterRecord, cfg: &SolverConfig) -> Option<Status> {
    if !rec.f_value.is_finite() {
        return Some(Status::Diverged);
    }
    let e = rec.rel_err?;
    if !e.is_finite() || e > cfg.diverge_threshold {
        Some(Status::Diverged)
    } else if e < cfg.tol_rel_err {
        Some(Status::Converged)
    } else {
        None
    }
}

/// Runs `algo` from `x0`.
///
/// Dense methods stop on `rel_err < tol_rel_err`, `rel_err >
/// diverge_threshold`, a non-finite value, or after `max_iters` iterations.
/// The perturbed method follows its own stopping rule (see
/// [`pprojgd`](super::pprojgd)). Factored methods start from the balanced
/// factors of `x0` padded to its search rank.
pub fn run_solver<F: Objective + ?Sized>(
    algo: Algorithm,
    f: &F,
    x0: &FactoredMatrix,
    x_star: Option<&FactoredMatrix>,
    cfg: &SolverConfig,
) -> Result<SolverTrace> {
    cfg.validate()?;
    if x0.shape() != f.shape() {
        return Err(Error::DimensionMismatch {
            expected: f.shape(),
            found: x0.shape(),
        });
    }
    if let Some(xs) = x_star {
        if xs.shape() != f.shape() {
            return Err(Error::DimensionMismatch {
                expected: f.shape(),
                found: xs.shape(),
            });
        }
    }
    match algo {
        Algorithm::PprojGd => pprojgd(f, x0, x_star, cfg).map(|(_, t)| t),
        Algorithm::ProjGd => Ok(run_projgd(f, x0, x_star, cfg)),
        Algorithm::Fgd | Algorithm::ScaledGd | Algorithm::PrecGd => {
            Ok(run_factored(algo, f, x0, x_star, cfg))
        }
    }
}

fn run_projgd<F: Objective + ?Sized>(
    f: &F,
    x0: &FactoredMatrix,
    x_star: Option<&FactoredMatrix>,
    cfg: &SolverConfig,
) -> SolverTrace {
    let mut rec = Recorder::new(f, x_star, cfg.checkpoint_stride);
    let mut x = x0.clone();
    let mut x_dense = x.dense();
    let mut status = stop_status(rec.push(0, &x, &x_dense, 0.0, Branch::Init), cfg);
    let mut t = 0;
    while status.is_none() && t < cfg.max_iters {
        t += 1;
        match projgd_step(&x, f, cfg.eta, cfg.psd) {
            Ok(next) => {
                let next_dense = next.dense();
                let step = (&next_dense - &x_dense).norm();
                x = next;
                x_dense = next_dense;
                status = stop_status(rec.push(t, &x, &x_dense, step, Branch::Gradient), cfg);
            }
            Err(e) => status = Some(failure(e, &x_dense)),
        }
    }
    rec.finish(status.unwrap_or(Status::MaxIters), x)
}

fn failure(e: Error, x: &DMatrix<f64>) -> Status {
    if x.iter().any(|v| !v.is_finite()) || matches!(e, Error::NonFinite) {
        Status::Diverged
    } else {
        Status::Failed(e.to_string())
    }
}

fn run_factored<F: Objective + ?Sized>(
    algo: Algorithm,
    f: &F,
    x0: &FactoredMatrix,
    x_star: Option<&FactoredMatrix>,
    cfg: &SolverConfig,
) -> SolverTrace {
    let mut rec = Recorder::new(f, x_star, cfg.checkpoint_stride);
    let mut factors = Factors::balanced(x0, cfg.psd);
    let mut x = x0.clone();
    let mut x_dense = factors.dense();
    let mut status = stop_status(rec.push(0, &x, &x_dense, 0.0, Branch::Init), cfg);
    let mut t = 0;
    while status.is_none() && t < cfg.max_iters {
        t += 1;
        let next = match algo {
            Algorithm::Fgd => fgd_step(f, &factors, cfg.eta),
            _ => {
                let reg = match (algo, cfg.prec_reg) {
                    (Algorithm::ScaledGd, _) => 0.0,
                    (_, PrecReg::Fixed(v)) => v,
                    (_, PrecReg::Adaptive { floor }) => (f.value(&x_dense) - floor).max(0.0).sqrt(),
                };
                let (next, report) = precgd_step(f, &factors, cfg.eta, reg);
                rec.gram(t, report.condition, report.breakdown);
                next
            }
        };
        let next_dense = next.dense();
        if next_dense.iter().any(|v| !v.is_finite()) {
            status = Some(Status::Diverged);
            break;
        }
        match next.to_factored() {
            Ok(fm) => {
                let step = (&next_dense - &x_dense).norm();
                factors = next;
                x = fm;
                x_dense = next_dense;
                status = stop_status(rec.push(t, &x, &x_dense, step, Branch::Gradient), cfg);
            }
            Err(e) => status = Some(failure(e, &next_dense)),
        }
    }
    rec.finish(status.unwrap_or(Status::MaxIters), x)
}
