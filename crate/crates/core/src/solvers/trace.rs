use std::fmt;
use std::time::Duration;

use crate::linalg::FactoredMatrix;

/// Which update produced an iterate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Init,
    Gradient,
    TangentEscape,
    Terminate,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Init => "init",
            Branch::Gradient => "gradient",
            Branch::TangentEscape => "tangent-escape",
            Branch::Terminate => "terminate",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Converged,
    Diverged,
    MaxIters,
    SecondOrderStop,
    /// A numerical kernel failed; the message names it.
    Failed(String),
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::MaxIters => "max-iters",
            Status::SecondOrderStop => "second-order-stop",
            Status::Failed(_) => "failed",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Failed(msg) => write!(f, "failed: {msg}"),
            other => f.write_str(other.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub iter: usize,
    pub f_value: f64,
    /// `f(X) - f(X*)`, when the ground truth is known.
    pub f_gap: Option<f64>,
    /// `|X - X*|_F / |X*|_F`, when the ground truth is known and nonzero.
    pub rel_err: Option<f64>,
    /// `|X_t - X_{t-1}|_F`; zero for the initial record.
    pub step_norm: f64,
    pub sigma_r: f64,
    pub branch: Branch,
}

/// A stored dense iterate.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub iter: usize,
    pub x: FactoredMatrix,
}

#[derive(Debug, Clone)]
pub struct SolverTrace {
    pub records: Vec<IterRecord>,
    pub checkpoints: Vec<Checkpoint>,
    pub status: Status,
    pub final_iterate: FactoredMatrix,
    /// Iterations at which a Gram matrix was too ill-conditioned to invert
    /// reliably (factored preconditioned methods only).
    pub breakdowns: Vec<usize>,
    /// Largest Gram condition number seen (factored preconditioned methods).
    pub max_gram_condition: f64,
    pub wall_time: Duration,
}

impl SolverTrace {
    pub fn last(&self) -> &IterRecord {
        self.records.last().expect("a trace always holds the initial record")
    }

    /// Number of iterations performed.
    pub fn iterations(&self) -> usize {
        self.last().iter
    }

    pub fn final_rel_err(&self) -> Option<f64> {
        self.last().rel_err
    }

    /// First iteration whose relative error is below `threshold`.
    pub fn first_below(&self, threshold: f64) -> Option<usize> {
        self.records
            .iter()
            .find(|r| r.rel_err.is_some_and(|e| e < threshold))
            .map(|r| r.iter)
    }

    pub fn checkpoint(&self, iter: usize) -> Option<&Checkpoint> {
        self.checkpoints
            .binary_search_by_key(&iter, |c| c.iter)
            .ok()
            .map(|i| &self.checkpoints[i])
    }
}
