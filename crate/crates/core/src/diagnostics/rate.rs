use crate::error::{Error, Result};
use crate::solvers::SolverTrace;

/// Geometric-mean per-iteration ratio of the last `window + 1` values of
/// `gaps`, which must all be positive.
pub fn linear_rate_from_gaps(gaps: &[f64], window: usize) -> Result<f64> {
    let run = gaps.iter().rev().take_while(|g| g.is_finite() && **g > 0.0).count();
    if window == 0 || run < window + 1 {
        return Err(Error::InsufficientRecords {
            needed: window + 1,
            found: run,
        });
    }
    let last = gaps[gaps.len() - 1];
    let first = gaps[gaps.len() - 1 - window];
    Ok((last / first).powf(1.0 / window as f64))
}

/// Per-iteration contraction of the f-gap over the trailing `window`
/// iterations of `trace`. A value of 1 means stagnation.
pub fn estimate_linear_rate(trace: &SolverTrace, window: usize) -> Result<f64> {
    let gaps: Vec<f64> = trace
        .records
        .iter()
        .map(|r| r.f_gap.unwrap_or(f64::NAN))
        .collect();
    linear_rate_from_gaps(&gaps, window)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_gaps() {
        let gaps: Vec<f64> = (0..50).map(|k| 0.9f64.powi(k)).collect();
        assert!((linear_rate_from_gaps(&gaps, 20).unwrap() - 0.9).abs() < 1e-12);
    }

    #[test]
    fn stagnation_and_short_runs() {
        assert_eq!(linear_rate_from_gaps(&[2.0; 5], 4).unwrap(), 1.0);
        assert!(linear_rate_from_gaps(&[1.0, 0.0, 0.5], 2).is_err());
        assert!(linear_rate_from_gaps(&[1.0, 0.5], 0).is_err());
    }
}
