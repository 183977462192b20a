//! SVG convergence plots.
//!
//! One panel per `(kappa, r_star)`. Each `(algorithm, eta)` series is the
//! per-iteration median relative error over seeds on a log10 axis, with a
//! min-max band when there is more than one seed. A converged run holds its
//! last value; a diverged run counts as infinite from its abort onward, and
//! the median curve ends where it first exceeds the divergence threshold.
//! Panels with at least three step sizes also get a sweep plot of the
//! median final error against `eta`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use lowrank::solvers::{SolverTrace, Status};

use crate::error::{HarnessError, Result};
use crate::spec::Cell;
use crate::trace_csv::{read_trace, write_atomic};

/// Relative-error history of one run.
#[derive(Debug, Clone)]
pub struct TraceInput {
    pub algo: String,
    pub kappa: f64,
    pub r_star: usize,
    pub eta: f64,
    pub seed: u64,
    /// `(iteration, rel_err)`, in iteration order.
    pub points: Vec<(usize, f64)>,
    pub diverged: bool,
}

impl TraceInput {
    pub fn from_run(cell: &Cell, trace: &SolverTrace) -> Self {
        Self {
            algo: cell.algo.to_string(),
            kappa: cell.kappa,
            r_star: cell.r_star,
            eta: cell.eta,
            seed: cell.seed,
            points: trace
                .records
                .iter()
                .filter_map(|r| r.rel_err.map(|e| (r.iter, e)))
                .collect(),
            diverged: trace.status == Status::Diverged,
        }
    }
}

/// Parses `{algo}_k{kappa}_rs{rstar}_eta{eta}_s{seed}.csv`.
pub fn parse_file_name(name: &str) -> Option<(String, f64, usize, f64, u64)> {
    let stem = name.strip_suffix(".csv")?;
    let (rest, seed) = stem.rsplit_once("_s")?;
    let (rest, eta) = rest.rsplit_once("_eta")?;
    let (rest, r_star) = rest.rsplit_once("_rs")?;
    let (algo, kappa) = rest.rsplit_once("_k")?;
    Some((
        algo.to_string(),
        kappa.parse().ok()?,
        r_star.parse().ok()?,
        eta.parse().ok()?,
        seed.parse().ok()?,
    ))
}

/// Reads every trace CSV in `dir`. Files whose names do not follow the
/// schema are ignored; empty traces are skipped with a warning.
pub fn read_dir(dir: &Path, diverge_threshold: f64) -> Result<Vec<TraceInput>> {
    let entries = std::fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))?;
    let mut names: Vec<String> = Vec::new();
    for entry in entries {
        let entry = entry.map_err(|e| HarnessError::io(dir, e))?;
        if let Some(name) = entry.file_name().to_str() {
            names.push(name.to_string());
        }
    }
    names.sort();
    let mut traces = Vec::new();
    for name in names {
        let Some((algo, kappa, r_star, eta, seed)) = parse_file_name(&name) else {
            continue;
        };
        let rows = read_trace(&dir.join(&name))?;
        let points: Vec<(usize, f64)> = rows.iter().filter_map(|r| r.rel_err.map(|e| (r.iter, e))).collect();
        if points.is_empty() {
            log::warn!("{name}: empty trace, skipped");
            continue;
        }
        let last = points[points.len() - 1].1;
        traces.push(TraceInput {
            algo,
            kappa,
            r_star,
            eta,
            seed,
            diverged: !last.is_finite() || last > diverge_threshold,
            points,
        });
    }
    Ok(traces)
}

/// A plotted curve in data coordinates; y is already log10.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    /// `(x, lo, hi)`
    pub band: Vec<(f64, f64, f64)>,
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Value of a run at iteration `t`, following the hold/abort rule.
fn value_at(t: &TraceInput, iter: usize) -> f64 {
    match t.points.binary_search_by_key(&iter, |p| p.0) {
        Ok(i) => t.points[i].1,
        Err(i) if i >= t.points.len() => {
            if t.diverged {
                f64::INFINITY
            } else {
                t.points[t.points.len() - 1].1
            }
        }
        Err(i) => t.points[i.saturating_sub(1)].1,
    }
}

const FLOOR: f64 = 1e-16;

fn log_clamped(v: f64, top: f64) -> f64 {
    if v.is_nan() {
        return top.log10();
    }
    v.clamp(FLOOR, top).log10()
}

/// Median-over-seeds curve of one series.
pub fn median_series(label: String, runs: &[&TraceInput], diverge_threshold: f64) -> Series {
    let end = runs
        .iter()
        .filter_map(|r| r.points.last().map(|p| p.0))
        .max()
        .unwrap_or(0);
    let mut points = Vec::new();
    let mut band = Vec::new();
    for iter in 0..=end {
        let mut vals: Vec<f64> = runs.iter().map(|r| value_at(r, iter)).collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        let m = median(&vals);
        let x = iter as f64;
        points.push((x, log_clamped(m, diverge_threshold)));
        if runs.len() > 1 {
            band.push((
                x,
                log_clamped(vals[0], diverge_threshold),
                log_clamped(vals[vals.len() - 1], diverge_threshold),
            ));
        }
        if m.is_nan() || m > diverge_threshold {
            break;
        }
    }
    Series { label, points, band }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

/// Renders curves with a linear x axis and a log10 y axis. Each series is
/// exactly one `<polyline>`; bands are `<polygon>`s.
pub fn render_svg(title: &str, x_label: &str, series: &[Series]) -> String {
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    for s in series {
        for &(_, lo, hi) in &s.band {
            y0 = y0.min(lo);
            y1 = y1.max(hi);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, -1.0, 0.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    let (y0, y1) = (y0.floor(), y1.ceil().max(y0.floor() + 1.0));
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="20" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));

    let step = ((y1 - y0) / 8.0).ceil().max(1.0);
    let mut tick = y0;
    while tick <= y1 + 1e-9 {
        let y = sy(tick);
        let _ = writeln!(s, r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{}</text>"#, LEFT - 6.0, y + 4.0, tick as i64);
        tick += step;
    }
    for i in 0..=5 {
        let xv = x0 + (x1 - x0) * i as f64 / 5.0;
        let x = sx(xv);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(xv));
    }
    let _ = writeln!(s, r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#333"/>"##);
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, H - 12.0, escape(x_label));
    let _ = writeln!(s, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">relative error</text>"#, TOP + ph / 2.0, TOP + ph / 2.0);

    for (i, se) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        if !se.band.is_empty() {
            let mut pts = String::new();
            for &(x, _, hi) in &se.band {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(hi));
            }
            for &(x, lo, _) in se.band.iter().rev() {
                let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(lo));
            }
            let _ = writeln!(s, r#"<polygon points="{}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#, pts.trim_end());
        }
        let mut pts = String::new();
        for &(x, y) in &se.points {
            let _ = write!(pts, "{:.2},{:.2} ", sx(x), sy(y));
        }
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, pts.trim_end());
        let ly = TOP + 14.0 + 18.0 * i as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(s, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 20.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&se.label));
    }
    s.push_str("</svg>\n");
    s
}

fn tick_label(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == r.trunc() {
        format!("{}", r as i64)
    } else {
        format!("{r}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

type PanelKey = (u64, usize);

fn panel_key(t: &TraceInput) -> PanelKey {
    (t.kappa.to_bits(), t.r_star)
}

/// Writes one convergence SVG per panel, plus a sweep SVG for panels with
/// at least three step sizes. Returns the written paths in order.
pub fn write_plots(traces: &[TraceInput], diverge_threshold: f64, out: &Path) -> Result<Vec<PathBuf>> {
    let mut panels: BTreeMap<PanelKey, Vec<&TraceInput>> = BTreeMap::new();
    for t in traces.iter().filter(|t| !t.points.is_empty()) {
        panels.entry(panel_key(t)).or_default().push(t);
    }
    let mut written = Vec::new();
    for ((kappa_bits, r_star), runs) in panels {
        let kappa = f64::from_bits(kappa_bits);
        let mut groups: BTreeMap<(String, u64), Vec<&TraceInput>> = BTreeMap::new();
        for t in &runs {
            groups.entry((t.algo.clone(), t.eta.to_bits())).or_default().push(t);
        }
        let series: Vec<Series> = groups
            .iter()
            .map(|((algo, eta), g)| median_series(format!("{algo} eta={}", f64::from_bits(*eta)), g, diverge_threshold))
            .collect();
        let title = format!("kappa = {kappa}, r* = {r_star}");
        let path = out.join(format!("panel_k{kappa}_rs{r_star}.svg"));
        write_atomic(&path, render_svg(&title, "iteration", &series).as_bytes())?;
        written.push(path);

        let mut etas: Vec<f64> = runs.iter().map(|t| t.eta).collect();
        etas.sort_by(|a, b| a.total_cmp(b));
        etas.dedup();
        if etas.len() >= 3 {
            let sweep = sweep_series(&groups, diverge_threshold);
            let path = out.join(format!("sweep_k{kappa}_rs{r_star}.svg"));
            write_atomic(&path, render_svg(&title, "step size eta", &sweep).as_bytes())?;
            written.push(path);
        }
    }
    Ok(written)
}

fn sweep_series(groups: &BTreeMap<(String, u64), Vec<&TraceInput>>, diverge_threshold: f64) -> Vec<Series> {
    let mut by_algo: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for ((algo, eta), g) in groups {
        let mut finals: Vec<f64> = g
            .iter()
            .map(|t| if t.diverged { f64::INFINITY } else { t.points[t.points.len() - 1].1 })
            .collect();
        finals.sort_by(|a, b| a.total_cmp(b));
        by_algo
            .entry(algo)
            .or_default()
            .push((f64::from_bits(*eta), log_clamped(median(&finals), diverge_threshold)));
    }
    by_algo
        .into_iter()
        .map(|(algo, mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Series {
                label: algo.to_string(),
                points,
                band: Vec::new(),
            }
        })
        .collect()
}

/// `plot <dir>`: renders every trace CSV found in `dir` into `dir`.
pub fn plot_dir(dir: &Path, diverge_threshold: f64) -> Result<Vec<PathBuf>> {
    let traces = read_dir(dir, diverge_threshold)?;
    write_plots(&traces, diverge_threshold, dir)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(points: &[f64], diverged: bool) -> TraceInput {
        TraceInput {
            algo: "projgd".into(),
            kappa: 1.0,
            r_star: 2,
            eta: 0.4,
            seed: 0,
            points: points.iter().copied().enumerate().collect(),
            diverged,
        }
    }

    #[test]
    fn file_names_parse_back() {
        assert_eq!(
            parse_file_name("scaledgd_k20_rs4_eta0.45_s123.csv"),
            Some(("scaledgd".into(), 20.0, 4, 0.45, 123))
        );
        assert_eq!(parse_file_name("summary.csv"), None);
    }

    #[test]
    fn converged_runs_hold_their_last_value() {
        let a = run(&[1.0, 1e-3, 1e-15], false);
        let b = run(&[1.0, 0.5, 0.25, 0.125, 0.0625], false);
        let s = median_series("x".into(), &[&a, &b], 1e2);
        assert_eq!(s.points.len(), 5);
        let expected = (0.5 * (1e-15 + 0.0625f64)).log10();
        assert!((s.points[4].1 - expected).abs() < 1e-12);
    }

    #[test]
    fn diverged_median_is_truncated_at_abort() {
        let a = run(&[1.0, 10.0, 1e3], true);
        let s = median_series("x".into(), &[&a], 1e2);
        assert_eq!(s.points.len(), 3);
        assert_eq!(s.points[2].1, 2.0);
        assert!(s.band.is_empty());
    }

    #[test]
    fn single_series_has_one_polyline() {
        let a = run(&[1.0, 0.1, 0.01], false);
        let svg = render_svg("t", "iteration", &[median_series("projgd".into(), &[&a], 1e2)]);
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert_eq!(svg.matches("<polygon").count(), 0);
        assert_eq!(svg, render_svg("t", "iteration", &[median_series("projgd".into(), &[&a], 1e2)]));
    }
}
