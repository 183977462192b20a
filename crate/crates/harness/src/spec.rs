//! Experiment descriptions.
//!
//! A spec is a TOML file with four sections mirroring the blocks below.
//! Unknown keys are rejected.
//!
//! ```toml
//! [problem]
//! n = 10
//! r = 4
//! r_star = [4, 2]
//! kappa = [1, 20]
//! m_factor = 3
//!
//! [solver]
//! algorithms = ["projgd", "fgd"]
//! eta = [0.4]
//!
//! [run]
//! seed_count = 10
//! master_seed = 0
//! max_iters = 1000
//! ```

use std::path::{Path, PathBuf};

use lowrank::diagnostics::ProbeConfig;
use lowrank::objectives::SensingParams;
use lowrank::rng::split_seed;
use lowrank::solvers::{Algorithm, PprojParams, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub problem: ProblemBlock,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub run: RunBlock,
    #[serde(default)]
    pub output: OutputBlock,
    /// Only read by the `probe` verb.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub n: usize,
    /// Search rank.
    pub r: usize,
    pub r_star: Vec<usize>,
    pub kappa: Vec<f64>,
    /// `m = m_factor * n * r`.
    pub m_factor: usize,
    #[serde(default)]
    pub psd: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    pub algorithms: Vec<Algorithm>,
    pub eta: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pprojgd: Option<PprojParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunBlock {
    /// Explicit run seeds; overrides `seed_count`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    pub seed_count: usize,
    pub master_seed: u64,
    pub max_iters: usize,
    pub tol: f64,
    pub diverge_threshold: f64,
}

impl Default for RunBlock {
    fn default() -> Self {
        Self {
            seeds: None,
            seed_count: 10,
            master_seed: 0,
            max_iters: 1000,
            tol: 1e-14,
            diverge_threshold: 1e2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directory: Option<PathBuf>,
    pub formats: Vec<Format>,
    /// Dense iterates kept in memory every this many iterations. Defaults to
    /// 1 for `n <= 20` and 10 above.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint_stride: Option<usize>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self {
            directory: None,
            formats: vec![Format::Csv, Format::Json],
            checkpoint_stride: None,
        }
    }
}

/// One run of the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub algo: Algorithm,
    pub kappa: f64,
    pub r_star: usize,
    pub eta: f64,
    pub seed_index: usize,
    pub seed: u64,
}

impl Cell {
    /// `{algo}_k{kappa}_rs{rstar}_eta{eta}_s{seed}.csv`
    pub fn file_name(&self) -> String {
        format!(
            "{}_k{}_rs{}_eta{}_s{}.csv",
            self.algo, self.kappa, self.r_star, self.eta, self.seed
        )
    }
}

impl ExperimentSpec {
    pub fn from_toml(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml(&text).map_err(|message| HarnessError::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("spec serializes")
    }

    pub fn m(&self) -> usize {
        self.problem.m_factor * self.problem.n * self.problem.r
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.run.seeds {
            Some(s) => s.clone(),
            None => (0..self.run.seed_count as u64)
                .map(|i| split_seed(self.run.master_seed, i))
                .collect(),
        }
    }

    pub fn checkpoint_stride(&self) -> usize {
        self.output
            .checkpoint_stride
            .unwrap_or(if self.problem.n <= 20 { 1 } else { 10 })
    }

    pub fn sensing_params(&self, kappa: f64, r_star: usize, seed: u64) -> SensingParams {
        SensingParams {
            n: self.problem.n,
            r: self.problem.r,
            r_star,
            kappa,
            m: self.m(),
            seed,
            psd: self.problem.psd,
        }
    }

    pub fn solver_config(&self, eta: f64, seed: u64) -> SolverConfig {
        let mut cfg = SolverConfig::new(eta, self.run.max_iters);
        cfg.tol_rel_err = self.run.tol;
        cfg.diverge_threshold = self.run.diverge_threshold;
        cfg.psd = self.problem.psd;
        cfg.checkpoint_stride = self.checkpoint_stride();
        cfg.seed = seed;
        cfg.pproj = self.solver.pprojgd;
        cfg
    }

    /// Grid cells in output order: kappa, r_star, algorithm, eta, seed.
    pub fn cells(&self) -> Vec<Cell> {
        let seeds = self.seeds();
        let mut cells = Vec::new();
        for &kappa in &self.problem.kappa {
            for &r_star in &self.problem.r_star {
                for &algo in &self.solver.algorithms {
                    for &eta in &self.solver.eta {
                        for (seed_index, &seed) in seeds.iter().enumerate() {
                            cells.push(Cell {
                                algo,
                                kappa,
                                r_star,
                                eta,
                                seed_index,
                                seed,
                            });
                        }
                    }
                }
            }
        }
        cells
    }

    /// Checks every problem and solver configuration of the grid.
    pub fn validate(&self) -> Result<()> {
        let usage = |m: String| Err(HarnessError::Usage(m));
        if self.problem.r_star.is_empty() || self.problem.kappa.is_empty() {
            return usage("problem.r_star and problem.kappa must be non-empty".into());
        }
        if self.solver.algorithms.is_empty() || self.solver.eta.is_empty() {
            return usage("solver.algorithms and solver.eta must be non-empty".into());
        }
        if self.seeds().is_empty() {
            return usage("the run has no seeds".into());
        }
        if self.output.formats.is_empty() {
            return usage("output.formats must be non-empty".into());
        }
        if self.output.checkpoint_stride == Some(0) {
            return usage("output.checkpoint_stride must be >= 1".into());
        }
        for &kappa in &self.problem.kappa {
            for &r_star in &self.problem.r_star {
                self.sensing_params(kappa, r_star, 0).validate()?;
            }
        }
        for &eta in &self.solver.eta {
            self.solver_config(eta, 0).validate()?;
        }
        Ok(())
    }
}
