//! Error metrics, optimality certificates and inequality checkers.

mod certificate;
mod lemmas;
mod metrics;
mod probe;
mod rate;
mod saddle;

pub use certificate::{
    certify_second_order, classify, CertifyParams, Classification, SecondOrderCertificate,
};
pub use lemmas::{
    check_descent_lemma, check_gradient_deviation, check_projection_lemma, check_stop_guarantee,
    stop_gradient_bound, DescentReport, DeviationReport, ProjectionReport, StopGuarantee,
};
pub use metrics::{relative_error, spectral_norm};
pub use probe::{landscape_probe, ProbeConfig, ProbePoint, PROBE_MAX_N, PROBE_MAX_R};
pub use rate::{estimate_linear_rate, linear_rate_from_gaps};
pub use saddle::{escape_decrease, invariant_saddle, SaddleInstance};
