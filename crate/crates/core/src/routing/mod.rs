//! Selfish routing: Wardrop flows on parallel links, their spectral stability under Hedge,
//! the chaos scanner and the dominance calculus.

mod chaos;
mod dominance;
mod parallel;
mod report;
mod spectral;

pub use chaos::{
    chaos_scan, find_periodic_orbits, hedge_scalar_map, write_chaos_csv, ChaosRow, HedgeScalarMap,
    PeriodicOrbit,
};
pub use dominance::{
    beckmann_potential, delta_epsilon, invades, invasion_barrier, is_incrementally_deployable,
    mixed_cost, Barrier, BARRIER_TOL, INVASION_MARGIN,
};
pub use parallel::{
    full_support_closed_form, wardrop_parallel_affine, FlowProfile, ParallelLinkSystem,
};
pub use report::{analyze_routing, RoutingReport, SpectralPoint};
pub use spectral::{
    alpha_bar, block_spectral_radius, classify_partial_support, deflated_k, eigenvalues,
    jacobian_full_support, spectral_radius, StabilityVerdict, STABILITY_MARGIN,
};
