//! Trace CSV files.
//!
//! Header `iter,f_value,f_gap,rel_err,step_norm,sigma_r,branch`. Floats are
//! printed as the shortest decimal that round-trips; unknown values are
//! empty fields.

use std::io::Write;
use std::path::Path;

use lowrank::solvers::{IterRecord, SolverTrace};

use crate::error::{HarnessError, Result};

pub const HEADER: &str = "iter,f_value,f_gap,rel_err,step_norm,sigma_r,branch";

/// A parsed CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub iter: usize,
    pub f_value: f64,
    pub f_gap: Option<f64>,
    pub rel_err: Option<f64>,
    pub step_norm: f64,
    pub sigma_r: f64,
    pub branch: String,
}

fn push_float(out: &mut String, v: f64) {
    let mut buf = ryu::Buffer::new();
    out.push_str(buf.format(v));
}

fn push_record(out: &mut String, r: &IterRecord) {
    out.push_str(&r.iter.to_string());
    out.push(',');
    push_float(out, r.f_value);
    out.push(',');
    if let Some(g) = r.f_gap {
        push_float(out, g);
    }
    out.push(',');
    if let Some(e) = r.rel_err {
        push_float(out, e);
    }
    out.push(',');
    push_float(out, r.step_norm);
    out.push(',');
    push_float(out, r.sigma_r);
    out.push(',');
    out.push_str(r.branch.as_str());
    out.push('\n');
}

pub fn format_trace(trace: &SolverTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.records.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for r in &trace.records {
        push_record(&mut out, r);
    }
    out
}

fn parse_float(field: &str, line: usize) -> std::result::Result<f64, String> {
    field
        .parse()
        .map_err(|_| format!("line {line}: bad number `{field}`"))
}

fn parse_opt(field: &str, line: usize) -> std::result::Result<Option<f64>, String> {
    if field.is_empty() {
        Ok(None)
    } else {
        parse_float(field, line).map(Some)
    }
}

pub fn parse_trace(text: &str) -> std::result::Result<Vec<Row>, String> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == HEADER => {}
        _ => return Err("missing or unexpected header".into()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!("line {n}: expected 7 fields, found {}", f.len()));
        }
        rows.push(Row {
            iter: f[0].parse().map_err(|_| format!("line {n}: bad iteration `{}`", f[0]))?,
            f_value: parse_float(f[1], n)?,
            f_gap: parse_opt(f[2], n)?,
            rel_err: parse_opt(f[3], n)?,
            step_norm: parse_float(f[4], n)?,
            sigma_r: parse_float(f[5], n)?,
            branch: f[6].to_string(),
        });
    }
    Ok(rows)
}

pub fn read_trace(path: &Path) -> Result<Vec<Row>> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_trace(&text).map_err(|message| HarnessError::Parse {
        path: path.to_path_buf(),
        message,
    })
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| HarnessError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| HarnessError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use lowrank::solvers::Branch;

    #[test]
    fn rows_round_trip() {
        let rec = IterRecord {
            iter: 3,
            f_value: 0.1 + 0.2,
            f_gap: None,
            rel_err: Some(1e-14),
            step_norm: 0.0,
            sigma_r: f64::INFINITY,
            branch: Branch::TangentEscape,
        };
        let mut s = String::from(HEADER);
        s.push('\n');
        push_record(&mut s, &rec);
        assert!(s.ends_with("3,0.30000000000000004,,1e-14,0.0,inf,tangent-escape\n"));
        let rows = parse_trace(&s).unwrap();
        assert_eq!(rows[0].f_value, 0.1 + 0.2);
        assert_eq!(rows[0].f_gap, None);
        assert_eq!(rows[0].rel_err, Some(1e-14));
        assert_eq!(rows[0].sigma_r, f64::INFINITY);
    }

    #[test]
    fn rejects_foreign_files() {
        assert!(parse_trace("a,b\n1,2\n").is_err());
        assert!(parse_trace(&format!("{HEADER}\n1,2\n")).is_err());
    }
}
