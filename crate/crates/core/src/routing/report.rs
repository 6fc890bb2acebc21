//! The combined routing analysis behind the `analyze-routing` command.

use serde::Serialize;

use super::chaos::{hedge_scalar_map, PeriodicOrbit};
use super::parallel::{wardrop_parallel_affine, ParallelLinkSystem};
use super::spectral::{
    alpha_bar, block_spectral_radius, classify_partial_support, StabilityVerdict,
};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub alpha: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutingReport {
    pub wardrop: Vec<f64>,
    /// `None` for partial-support equilibria and when no link limits the rate.
    pub alpha_bar: Option<f64>,
    /// Spectral radius of the deflated supported block.
    pub spectral_radius_at: SpectralPoint,
    pub verdict: StabilityVerdict,
    /// Orbits of minimal period 1, 2 and 3 of the scalar map; two-link systems only.
    pub orbits: Vec<PeriodicOrbit>,
}

/// Wardrop flow, `ᾱ`, stability at `alpha` and, for two links, the periodic orbits of Hedge.
pub fn analyze_routing(
    system: &ParallelLinkSystem,
    alpha: f64,
    grid_n: usize,
    tol: f64,
) -> Result<RoutingReport> {
    let flow = wardrop_parallel_affine(system);
    let bar = if flow.is_full_support() {
        Some(alpha_bar(system, &flow)?).filter(|a| a.is_finite())
    } else {
        None
    };
    let rho = block_spectral_radius(system, &flow, alpha)?;
    let verdict = classify_partial_support(system, &flow, alpha)?;
    let mut orbits = Vec::new();
    if system.num_links() == 2 {
        let h = hedge_scalar_map(system, alpha)?;
        for p in 1..=3 {
            orbits.extend(h.periodic_orbits(p, grid_n, tol)?);
        }
    }
    Ok(RoutingReport {
        wardrop: flow.flows,
        alpha_bar: bar,
        spectral_radius_at: SpectralPoint { alpha, rho },
        verdict,
        orbits,
    })
}
