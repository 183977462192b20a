//! Dense kernels for the rank-`r` variety.

mod decomp;
mod factored;
mod projection;
mod retraction;
mod tangent;

pub(crate) use decomp::{singular_values, symmetric_eigen};
pub use factored::{orthonormal_complement, FactoredMatrix};
pub use projection::{project_psd_rank_r, project_rank_r, RANK_DROP_TOL, SYMMETRY_TOL};
pub use retraction::{
    hessian_step, pullback_hessian, pullback_hessian_min_eig, pullback_value_grad, retract,
    retract_dense, PullbackHessian,
};
pub use tangent::{corner_decompose, project_tangent, CornerDecomposition, TangentVector};
