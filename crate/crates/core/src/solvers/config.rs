use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    ProjGd,
    Fgd,
    ScaledGd,
    PrecGd,
    PprojGd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::ProjGd,
        Algorithm::Fgd,
        Algorithm::ScaledGd,
        Algorithm::PrecGd,
        Algorithm::PprojGd,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::ProjGd => "projgd",
            Algorithm::Fgd => "fgd",
            Algorithm::ScaledGd => "scaledgd",
            Algorithm::PrecGd => "precgd",
            Algorithm::PprojGd => "pprojgd",
        }
    }

    /// Whether the iterate is carried as factors `L R^T`.
    pub fn is_factored(self) -> bool {
        matches!(self, Algorithm::Fgd | Algorithm::ScaledGd | Algorithm::PrecGd)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown algorithm `{s}`")))
    }
}

/// Parameters of the perturbed method and its tangent space steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PprojParams {
    /// Improvement threshold: gradient steps shorter than `2 eta epsilon / 3`
    /// count as stalled.
    pub epsilon: f64,
    /// Radius of the tangent ball, and the `sigma_r > 2 epsilon_t` gate.
    pub epsilon_t: f64,
    /// Step size inside the tangent space.
    pub eta_t: f64,
    /// Radius of the random perturbation before scaling by `eta_t`.
    pub perturb_radius: f64,
    pub max_tangent_iters: usize,
}

impl PprojParams {
    /// `epsilon = 1e-4`, `epsilon_t = sqrt(epsilon)`, `eta_t = min(epsilon_t, eta)`,
    /// `perturb_radius = epsilon`, `max_tangent_iters = ceil(1 / (eta_t sqrt(epsilon)))`.
    pub fn defaults_for(eta: f64) -> Self {
        Self::from_epsilon(1e-4, eta)
    }

    /// The default schedule for a given `epsilon`.
    pub fn from_epsilon(epsilon: f64, eta: f64) -> Self {
        let epsilon_t = epsilon.sqrt();
        let eta_t = epsilon_t.min(eta);
        Self {
            epsilon,
            epsilon_t,
            eta_t,
            perturb_radius: epsilon,
            max_tangent_iters: (1.0 / (eta_t * epsilon.sqrt())).ceil() as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.epsilon) || !positive(self.epsilon_t) || !positive(self.eta_t) {
            return Err(Error::InvalidConfig(
                "epsilon, epsilon_t and eta_t must be positive".into(),
            ));
        }
        if !(self.perturb_radius.is_finite() && self.perturb_radius >= 0.0) {
            return Err(Error::InvalidConfig("perturb_radius must be >= 0".into()));
        }
        if self.max_tangent_iters == 0 {
            return Err(Error::InvalidConfig("max_tangent_iters must be >= 1".into()));
        }
        if self.eta_t * self.perturb_radius > self.epsilon_t {
            return Err(Error::InvalidConfig(
                "initial perturbation eta_t * perturb_radius leaves the epsilon_t ball".into(),
            ));
        }
        Ok(())
    }
}

/// Regularization added to the Gram matrices of the preconditioned method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrecReg {
    /// `sqrt(max(f(X) - floor, 0))`, recomputed every iteration.
    Adaptive { floor: f64 },
    Fixed(f64),
}

impl Default for PrecReg {
    fn default() -> Self {
        PrecReg::Adaptive { floor: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub eta: f64,
    pub max_iters: usize,
    /// Stop as converged once the relative error drops below this.
    pub tol_rel_err: f64,
    /// Stop as diverged once the relative error exceeds this.
    pub diverge_threshold: f64,
    /// Keep iterates symmetric positive semidefinite.
    pub psd: bool,
    /// Dense iterates are checkpointed at iterations `t` with
    /// `t % stride` in `{0, 1}`.
    pub checkpoint_stride: usize,
    /// Seed for the perturbations of the perturbed method.
    pub seed: u64,
    /// Explicit perturbed-method parameters; [`PprojParams::defaults_for`]
    /// when absent.
    pub pproj: Option<PprojParams>,
    pub prec_reg: PrecReg,
}

impl SolverConfig {
    pub fn new(eta: f64, max_iters: usize) -> Self {
        Self {
            eta,
            max_iters,
            tol_rel_err: 1e-14,
            diverge_threshold: 1e2,
            psd: false,
            checkpoint_stride: 1,
            seed: 0,
            pproj: None,
            prec_reg: PrecReg::default(),
        }
    }

    pub fn pproj_params(&self) -> PprojParams {
        self.pproj.unwrap_or_else(|| PprojParams::defaults_for(self.eta))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::InvalidConfig(format!("eta must be positive, got {}", self.eta)));
        }
        if self.tol_rel_err.is_nan() || self.tol_rel_err < 0.0 {
            return Err(Error::InvalidConfig("tol_rel_err must be >= 0".into()));
        }
        if self.diverge_threshold.is_nan() || self.diverge_threshold <= 0.0 {
            return Err(Error::InvalidConfig("diverge_threshold must be positive".into()));
        }
        if self.checkpoint_stride == 0 {
            return Err(Error::InvalidConfig("checkpoint_stride must be >= 1".into()));
        }
        match self.prec_reg {
            PrecReg::Fixed(v) if !(v.is_finite() && v >= 0.0) => {
                return Err(Error::InvalidConfig("regularization must be >= 0".into()))
            }
            PrecReg::Adaptive { floor } if !floor.is_finite() => {
                return Err(Error::InvalidConfig("regularization floor must be finite".into()))
            }
            _ => {}
        }
        self.pproj_params().validate()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule() {
        let p = PprojParams::defaults_for(0.3);
        assert_eq!(p.epsilon, 1e-4);
        assert!((p.epsilon_t - 1e-2).abs() < 1e-15);
        assert!((p.eta_t - 1e-2).abs() < 1e-15);
        assert_eq!(p.max_tangent_iters, 10_000);
        let q = PprojParams::defaults_for(0.005);
        assert_eq!(q.eta_t, 0.005);
        assert_eq!(q.max_tangent_iters, 20_000);
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.as_str().parse::<Algorithm>().unwrap(), a);
        }
        assert!("svp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn rejects_bad_eta() {
        assert!(SolverConfig::new(0.0, 10).validate().is_err());
        assert!(SolverConfig::new(f64::NAN, 10).validate().is_err());
        assert!(SolverConfig::new(0.5, 10).validate().is_ok());
    }
}
