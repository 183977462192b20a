//! Batch execution of an experiment grid.

use std::path::{Path, PathBuf};

use lowrank::objectives::{generate_sensing, sensing_objective, spectral_init};
use lowrank::solvers::{run_solver, SolverTrace};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::plot;
use crate::spec::{Cell, ExperimentSpec, Format};
use crate::trace_csv::{format_trace, write_atomic};

/// A finished run held in memory.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub cell: Cell,
    pub trace: SolverTrace,
    /// Relative error of the spectral initialization.
    pub initial_rel_err: f64,
}

/// Regenerates the cell's problem from its seed, spectral-initializes and
/// runs the solver. `Err` carries the reason the cell was skipped.
pub fn run_cell(spec: &ExperimentSpec, cell: &Cell) -> std::result::Result<CellRun, String> {
    let params = spec.sensing_params(cell.kappa, cell.r_star, cell.seed);
    let problem = generate_sensing(params).map_err(|e| format!("problem generation: {e}"))?;
    let f = sensing_objective(&problem);
    let x0 = spectral_init(&problem, spec.problem.r).map_err(|e| format!("spectral init: {e}"))?;
    let cfg = spec.solver_config(cell.eta, cell.seed);
    let trace = run_solver(cell.algo, &f, &x0, Some(problem.ground_truth()), &cfg)
        .map_err(|e| format!("solver: {e}"))?;
    let initial_rel_err = trace.records[0].rel_err.unwrap_or(f64::NAN);
    Ok(CellRun {
        cell: *cell,
        trace,
        initial_rel_err,
    })
}

/// Runs every cell on a pool of `jobs` workers (all logical cores when
/// `None`). Results come back in grid order.
pub fn run_cells(
    spec: &ExperimentSpec,
    jobs: Option<usize>,
) -> Result<Vec<(Cell, std::result::Result<CellRun, String>)>> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| HarnessError::Usage(format!("worker pool: {e}")))?;
    let cells = spec.cells();
    Ok(pool.install(|| cells.par_iter().map(|c| (*c, run_cell(spec, c))).collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellOutcome {
    pub algo: String,
    pub kappa: f64,
    pub r_star: usize,
    pub eta: f64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
    pub status: String,
    pub iterations: usize,
    pub initial_rel_err: Option<f64>,
    pub final_rel_err: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub library: String,
    pub version: String,
    pub spec: ExperimentSpec,
    pub cells: Vec<CellOutcome>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.csv";

fn summary_csv(outcomes: &[CellOutcome]) -> String {
    let mut out = String::from("algo,kappa,r_star,eta,seed,status,iterations,initial_rel_err,final_rel_err,file\n");
    let mut buf = ryu::Buffer::new();
    let mut opt = |v: Option<f64>| v.map(|x| buf.format(x).to_string()).unwrap_or_default();
    for o in outcomes {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            o.algo,
            o.kappa,
            o.r_star,
            o.eta,
            o.seed,
            o.status,
            o.iterations,
            opt(o.initial_rel_err),
            opt(o.final_rel_err),
            o.file.as_deref().unwrap_or("")
        ));
    }
    out
}

/// Runs the grid and writes traces, `summary.csv`, `manifest.json` and plots
/// into `out` according to the spec's formats. Every file is written
/// atomically; the manifest is written last.
pub fn run_experiment(spec: &ExperimentSpec, out: &Path, jobs: Option<usize>) -> Result<Vec<CellOutcome>> {
    spec.validate()?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let formats = &spec.output.formats;
    let write_csv = formats.contains(&Format::Csv);

    let runs = run_cells(spec, jobs)?;
    let mut outcomes = Vec::with_capacity(runs.len());
    for (cell, run) in &runs {
        let outcome = match run {
            Ok(run) => {
                let file = cell.file_name();
                if write_csv {
                    write_atomic(&out.join(&file), format_trace(&run.trace).as_bytes())?;
                }
                CellOutcome {
                    algo: cell.algo.to_string(),
                    kappa: cell.kappa,
                    r_star: cell.r_star,
                    eta: cell.eta,
                    seed: cell.seed,
                    file: write_csv.then_some(file),
                    status: run.trace.status.to_string(),
                    iterations: run.trace.iterations(),
                    initial_rel_err: Some(run.initial_rel_err),
                    final_rel_err: run.trace.final_rel_err(),
                    skip_reason: None,
                }
            }
            Err(reason) => {
                log::warn!("skipping {}: {reason}", cell.file_name());
                CellOutcome {
                    algo: cell.algo.to_string(),
                    kappa: cell.kappa,
                    r_star: cell.r_star,
                    eta: cell.eta,
                    seed: cell.seed,
                    file: None,
                    status: "skipped".into(),
                    iterations: 0,
                    initial_rel_err: None,
                    final_rel_err: None,
                    skip_reason: Some(reason.clone()),
                }
            }
        };
        outcomes.push(outcome);
    }
    if write_csv {
        write_atomic(&out.join(SUMMARY), summary_csv(&outcomes).as_bytes())?;
    }
    if formats.contains(&Format::Svg) {
        let traces: Vec<plot::TraceInput> = runs
            .iter()
            .filter_map(|(cell, run)| run.as_ref().ok().map(|r| plot::TraceInput::from_run(cell, &r.trace)))
            .collect();
        plot::write_plots(&traces, spec.run.diverge_threshold, out)?;
    }
    if formats.contains(&Format::Json) {
        let manifest = Manifest {
            library: "lowrank".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            spec: spec.clone(),
            cells: outcomes.clone(),
        };
        let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        json.push('\n');
        write_atomic(&out.join(MANIFEST), json.as_bytes())?;
    }
    Ok(outcomes)
}

/// Output directory for a run: an explicit `--out`, else the spec's own
/// directory, else `root/name`.
pub fn output_dir(explicit: Option<&Path>, spec: &ExperimentSpec, root: &Path, name: &str) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| spec.output.directory.clone())
        .unwrap_or_else(|| root.join(name))
}
