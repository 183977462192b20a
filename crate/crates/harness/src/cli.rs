//! Command-line front end.
//!
//! Exit codes: 0 success, 1 acceptance failure, 2 usage error, 3 I/O error.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use lowrank::diagnostics::{landscape_probe, ProbeConfig};
use lowrank::objectives::{generate_sensing, sensing_objective};
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::plot::plot_dir;
use crate::presets;
use crate::runner::{output_dir, run_experiment, Manifest};
use crate::spec::{ExperimentSpec, Format};
use crate::trace_csv::write_atomic;
use crate::verify::{verify_suite, Fault, Level};

#[derive(Debug, Parser)]
#[command(name = "lowrank", version, about = "Run, plot and verify rank-constrained solver experiments")]
pub struct Cli {
    /// Output directory (default: <output root>/<experiment name>).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Master seed, overriding the spec.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output formats, overriding the spec.
    #[arg(long, global = true, value_delimiter = ',', value_enum)]
    pub format: Option<Vec<Format>>,
    /// Root for default output directories.
    #[arg(long, global = true, env = "LOWRANK_OUTPUT_DIR", default_value = "results")]
    pub output_root: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the grid described by a TOML spec, or replay a manifest.json.
    Run { spec: PathBuf },
    /// Run a replication preset.
    Preset {
        #[arg(value_enum)]
        name: Preset,
    },
    /// Render SVG plots for the trace CSVs in a directory.
    Plot {
        dir: PathBuf,
        #[arg(long, default_value_t = 1e2)]
        diverge_threshold: f64,
    },
    /// Run the acceptance suite and write verdict.json.
    Verify {
        #[arg(long, value_enum, default_value = "quick")]
        level: Level,
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Search a tiny sensing instance for stationary points.
    Probe { spec: PathBuf },
}

pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_spec(path: &Path) -> Result<ExperimentSpec> {
    if path.extension().is_some_and(|e| e == "json") {
        Ok(Manifest::load(path)?.spec)
    } else {
        ExperimentSpec::load(path)
    }
}

fn apply_overrides(cli: &Cli, spec: &mut ExperimentSpec) {
    if let Some(seed) = cli.seed {
        spec.run.master_seed = seed;
    }
    if let Some(formats) = &cli.format {
        spec.output.formats = formats.clone();
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("experiment")
        .to_string()
}

fn run_and_report(cli: &Cli, spec: &ExperimentSpec, name: &str) -> Result<i32> {
    let out = output_dir(cli.out.as_deref(), spec, &cli.output_root, name);
    let outcomes = run_experiment(spec, &out, cli.jobs)?;
    let skipped = outcomes.iter().filter(|o| o.skip_reason.is_some()).count();
    println!(
        "{}: {} runs, {} skipped, written to {}",
        name,
        outcomes.len(),
        skipped,
        out.display()
    );
    Ok(0)
}

#[derive(Serialize)]
struct ProbeOutput<'a> {
    spec: &'a ExperimentSpec,
    config: &'a ProbeConfig,
    points: Vec<ProbeRecord>,
}

#[derive(Serialize)]
struct ProbeRecord {
    f_value: f64,
    grad_norm: f64,
    members: usize,
    classification: String,
    min_eig: Option<f64>,
    /// Row-major.
    x: Vec<Vec<f64>>,
}

fn probe(cli: &Cli, spec: &ExperimentSpec, name: &str) -> Result<i32> {
    let p = &spec.problem;
    let (Some(&r_star), Some(&kappa)) = (p.r_star.first(), p.kappa.first()) else {
        return Err(HarnessError::Usage("problem.r_star and problem.kappa must be non-empty".into()));
    };
    let problem = generate_sensing(spec.sensing_params(kappa, r_star, spec.run.master_seed))?;
    let f = sensing_objective(&problem);
    let config = spec.probe.clone().unwrap_or_default();
    let points = landscape_probe(&f, p.n, p.r, &config)?;
    let records: Vec<ProbeRecord> = points
        .iter()
        .map(|pt| {
            let x = pt.x.dense();
            ProbeRecord {
                f_value: pt.f_value,
                grad_norm: pt.grad_norm,
                members: pt.members,
                classification: format!("{:?}", pt.certificate.classification),
                min_eig: pt.certificate.min_eig,
                x: (0..x.nrows()).map(|i| x.row(i).iter().copied().collect()).collect(),
            }
        })
        .collect();
    for r in &records {
        println!(
            "{:<22} f = {:<12.6e} |grad| = {:.1e}  min eig = {}  ({} starts)",
            r.classification,
            r.f_value,
            r.grad_norm,
            r.min_eig.map_or("-".to_string(), |e| format!("{e:.4}")),
            r.members
        );
    }
    let out = output_dir(cli.out.as_deref(), spec, &cli.output_root, name);
    std::fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
    let doc = ProbeOutput {
        spec,
        config: &config,
        points: records,
    };
    let mut json = serde_json::to_string_pretty(&doc).expect("probe output serializes");
    json.push('\n');
    write_atomic(&out.join("probe.json"), json.as_bytes())?;
    Ok(0)
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run { spec } => {
            let mut s = load_spec(spec)?;
            apply_overrides(cli, &mut s);
            run_and_report(cli, &s, &stem(spec))
        }
        Command::Preset { name } => {
            let name = name.to_possible_value().expect("named preset").get_name().to_string();
            let mut s = presets::by_name(&name).expect("known preset");
            apply_overrides(cli, &mut s);
            run_and_report(cli, &s, &name)
        }
        Command::Plot { dir, diverge_threshold } => {
            let written = plot_dir(dir, *diverge_threshold)?;
            println!("{} plots written to {}", written.len(), dir.display());
            Ok(0)
        }
        Command::Verify { level, inject_fault } => {
            let verdict = verify_suite(*level, *inject_fault);
            for c in &verdict.criteria {
                println!("{}", c.line());
            }
            let out = cli.out.clone().unwrap_or_else(|| cli.output_root.clone());
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
            let mut json = serde_json::to_string_pretty(&verdict).expect("verdict serializes");
            json.push('\n');
            let path = out.join("verdict.json");
            write_atomic(&path, json.as_bytes())?;
            println!("verdict: {} ({})", if verdict.passed { "pass" } else { "fail" }, path.display());
            Ok(if verdict.passed { 0 } else { 1 })
        }
        Command::Probe { spec } => {
            let mut s = load_spec(spec)?;
            apply_overrides(cli, &mut s);
            probe(cli, &s, &stem(spec))
        }
    }
}
