//! Rank-constrained optimization: `min f(X)` subject to `rank(X) = r`.
//!
//! [`linalg`] has the rank projections, the fixed-rank manifold geometry
//! and the retraction. [`objectives`] has quadratics and Gaussian matrix
//! sensing. [`solvers`] has projected gradient descent, its perturbed
//! saddle-escaping variant and the factored baselines. [`diagnostics`]
//! checks the solvers' guarantees numerically.

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod objectives;
pub mod rng;
pub mod solvers;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/projection.md")]
    mod projection {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/saddles.md")]
    mod saddles {}
    #[doc = include_str!("../../../book/src/diagnostics.md")]
    mod diagnostics {}
}
