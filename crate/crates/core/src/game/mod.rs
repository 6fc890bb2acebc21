//! State space, game fields, built-in families and normalization.

mod field;
mod network;
mod simplotope;
mod spec;

pub use field::{
    average_payoff, congestion_game, linear_symmetric_game, normalize_game, standard_qp_game,
    FieldFn, GameField, Orientation, PotentialFn, SYMMETRY_TOL,
};
pub use network::{Commodity, CongestionNetwork, LinkCost};
pub(crate) use simplotope::dot;
pub use simplotope::{make_simplotope, sample_interior, PopulationStructure, State, MASS_TOL};
pub use spec::GameSpec;
