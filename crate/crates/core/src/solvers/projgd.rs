use crate::error::Result;
use crate::linalg::{project_psd_rank_r, project_rank_r, FactoredMatrix};
use crate::objectives::Objective;

/// `P_r(X - eta grad f(X))` at the search rank of `x`, using the PSD
/// projection when `psd` is set.
pub fn projgd_step<F: Objective + ?Sized>(
    x: &FactoredMatrix,
    f: &F,
    eta: f64,
    psd: bool,
) -> Result<FactoredMatrix> {
    let dense = x.dense();
    let y = &dense - f.gradient(&dense) * eta;
    if psd {
        project_psd_rank_r(&((&y + y.transpose()) * 0.5), x.search_rank())
    } else {
        project_rank_r(&y, x.search_rank())
    }
}
