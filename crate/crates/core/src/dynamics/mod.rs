//! Discrete multiplicative-weights maps, step-size rules and the trajectory engine.

mod maps;
mod rates;
mod trajectory;

pub use maps::{
    hedge_step, replicator_step, replicator_vector_field, step, uniform_rates, Dynamic,
    HEDGE_EXPONENT_LIMIT,
};
pub use rates::{
    ess_oracle_bound, ess_oracle_rate, line_search_rate, line_search_trial, per_population_rates,
    LineSearchTrial, OracleBound, StepRule, DEFAULT_ALPHA0, DEFAULT_MAX_HALVINGS,
    DEFAULT_ORACLE_SAFETY,
};
pub use trajectory::{run_trajectory, StepRecord, StopReason, Trajectory, TrajectoryConfig};
