//! Replication presets.

use lowrank::solvers::Algorithm;

use crate::spec::{ExperimentSpec, Format, OutputBlock, ProblemBlock, RunBlock, SolverBlock};

pub const NAMES: [&str; 3] = ["fig1", "fig2", "fig3"];

/// Asymmetric sensing, `n = 10`, `r = 4`, `m = 3nr`, both ranks and both
/// condition numbers, `eta` in `{0.4, 0.6}`, 10 seeds of 1000 iterations.
pub fn fig1() -> ExperimentSpec {
    ExperimentSpec {
        problem: ProblemBlock {
            n: 10,
            r: 4,
            r_star: vec![4, 2],
            kappa: vec![1.0, 20.0],
            m_factor: 3,
            psd: false,
        },
        solver: SolverBlock {
            algorithms: vec![Algorithm::ProjGd, Algorithm::Fgd, Algorithm::ScaledGd],
            eta: vec![0.4, 0.6],
            pprojgd: None,
        },
        run: RunBlock {
            seeds: None,
            seed_count: 10,
            master_seed: 0,
            max_iters: 1000,
            tol: 1e-14,
            diverge_threshold: 1e2,
        },
        output: OutputBlock {
            directory: None,
            formats: vec![Format::Csv, Format::Svg, Format::Json],
            checkpoint_stride: None,
        },
        probe: None,
    }
}

/// The PSD variant of [`fig1`], with the preconditioned method added.
pub fn fig2() -> ExperimentSpec {
    let mut spec = fig1();
    spec.problem.psd = true;
    spec.solver.algorithms.push(Algorithm::PrecGd);
    spec
}

/// Step-size sweep: `m = 10nr`, `r* = 4`, 80 iterations, `eta` from 0.1 to
/// 1.2 in steps of 0.05.
pub fn fig3() -> ExperimentSpec {
    let mut spec = fig1();
    spec.problem.m_factor = 10;
    spec.problem.r_star = vec![4];
    spec.solver.eta = sweep_etas();
    spec.run.max_iters = 80;
    spec
}

/// `0.10, 0.15, ..., 1.20`, each the nearest double to its decimal.
pub fn sweep_etas() -> Vec<f64> {
    (0..=22).map(|i| (10 + 5 * i) as f64 / 100.0).collect()
}

pub fn by_name(name: &str) -> Option<ExperimentSpec> {
    match name {
        "fig1" => Some(fig1()),
        "fig2" => Some(fig2()),
        "fig3" => Some(fig3()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        for name in NAMES {
            by_name(name).unwrap().validate().unwrap();
        }
        assert_eq!(fig1().cells().len(), 2 * 2 * 3 * 2 * 10);
        assert_eq!(fig3().m(), 400);
        let etas = sweep_etas();
        assert_eq!((etas[0], etas[9], etas[22]), (0.1, 0.55, 1.2));
    }
}
