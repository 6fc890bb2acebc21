//! Lyapunov and Kantorovich machinery, and equilibrium classification.

mod classify;
mod entropy;

pub use classify::{
    classify, ess_certificate_sample, is_fixed_point, is_nash, sample_ball, superiority,
    ClassificationReport, EssVerdict, DEFAULT_TOL, ESS_MARGIN,
};
pub(crate) use entropy::{g_excess, support_g_extremes};
pub use entropy::{
    g_factor, growth_factors, kantorovich_bound, lyapunov_first_difference, matrix_response,
    relative_entropy, response_entropy_bound, target_growth,
};
