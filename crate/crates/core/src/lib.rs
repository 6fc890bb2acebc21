//! Multiplicative-weights dynamics (Hedge and the discrete-time replicator) on population
//! games, with Lyapunov step-size rules, equilibrium classification, and a stability
//! toolkit for selfish routing on parallel links.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod numfmt;
pub mod routing;

pub use error::{Error, Result};
pub use game::{GameField, Orientation, PopulationStructure, State};
