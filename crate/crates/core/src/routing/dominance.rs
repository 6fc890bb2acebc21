//! Invasion, barriers and incremental deployability between path flows of a congestion game.
//!
//! Flows are path-flow vectors in the network's commodity order. With `m = (1−ε)x + εy`,
//! `δ(ε|x,y) = c(x|m) − c(y|m)` is strictly decreasing in `ε` when every link cost is strictly
//! increasing, which reduces each question below to the sign of `δ` at one end.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{dot, CongestionNetwork, PopulationStructure, State};
use std::sync::Arc;

/// `y` invades `x` only when it is cheaper by more than this.
pub const INVASION_MARGIN: f64 = 1e-12;

/// Bisection tolerance for the invasion barrier.
pub const BARRIER_TOL: f64 = 1e-12;

fn check_flow(network: &CongestionNetwork, x: &[f64]) -> Result<()> {
    let structure = PopulationStructure::new(network.demands(), network.path_counts())?;
    State::new(Arc::new(structure), x.to_vec()).map(|_| ())
}

fn check_pair(network: &CongestionNetwork, x: &[f64], y: &[f64]) -> Result<()> {
    check_flow(network, x)?;
    check_flow(network, y)?;
    if x == y {
        return Err(Error::DegeneratePair);
    }
    Ok(())
}

/// `Σ_e ∫₀^{x_e} c_e(t) dt` at the link loads of the path flow `flow`.
pub fn beckmann_potential(network: &CongestionNetwork, flow: &[f64]) -> Result<f64> {
    let paths: usize = network.path_counts().iter().sum();
    if flow.len() != paths {
        return Err(Error::Dimension(format!(
            "{} path flows for {paths} paths",
            flow.len()
        )));
    }
    Ok(network.beckmann(flow))
}

/// `c(x|z) = Σ_e c_e(z_e) x_e`: the cost of routing `x` on the loads created by `z`.
pub fn mixed_cost(network: &CongestionNetwork, x: &[f64], z: &[f64]) -> Result<f64> {
    let paths: usize = network.path_counts().iter().sum();
    if x.len() != paths || z.len() != paths {
        return Err(Error::Dimension(format!(
            "{} and {} path flows for {paths} paths",
            x.len(),
            z.len()
        )));
    }
    Ok(dot(x, &network.path_costs(z)))
}

fn mix(x: &[f64], y: &[f64], eps: f64) -> Vec<f64> {
    x.iter()
        .zip(y)
        .map(|(a, b)| (1.0 - eps) * a + eps * b)
        .collect()
}

/// `δ(ε|x,y)` evaluated as `(x − y)·c(m)` to keep the difference exact.
fn delta_unchecked(network: &CongestionNetwork, x: &[f64], y: &[f64], eps: f64) -> f64 {
    let costs = network.path_costs(&mix(x, y, eps));
    x.iter()
        .zip(y)
        .zip(&costs)
        .map(|((a, b), c)| (a - b) * c)
        .sum()
}

/// `δ(ε|x,y) = c(x|(1−ε)x+εy) − c(y|(1−ε)x+εy)`.
pub fn delta_epsilon(network: &CongestionNetwork, x: &[f64], y: &[f64], eps: f64) -> Result<f64> {
    check_pair(network, x, y)?;
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("ε must lie in [0,1], got {eps}")));
    }
    Ok(delta_unchecked(network, x, y, eps))
}

/// `y` invades `x` when `c(y|x) < c(x|x) − 1e-12`.
pub fn invades(network: &CongestionNetwork, y: &[f64], x: &[f64]) -> Result<bool> {
    check_pair(network, x, y)?;
    Ok(delta_unchecked(network, x, y, 0.0) > INVASION_MARGIN)
}

/// Invasion barrier `b(y|x)` of the incumbent `x` against `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Barrier {
    /// `x` resists `y` at every share: dominance.
    Infinite,
    Finite(f64),
}

impl Barrier {
    /// `1` for an infinite barrier.
    pub fn value(self) -> f64 {
        match self {
            Barrier::Infinite => 1.0,
            Barrier::Finite(b) => b,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Barrier::Infinite
    }
}

/// Infinite when `y` cannot invade `x`; zero when `δ` stays positive on `[0,1]`; otherwise
/// the first root of `δ(·|x,y)`, bracketed on a `grid_n` scan and bisected to `1e-12`.
pub fn invasion_barrier(
    network: &CongestionNetwork,
    y: &[f64],
    x: &[f64],
    grid_n: usize,
) -> Result<Barrier> {
    check_pair(network, x, y)?;
    if grid_n < 1 {
        return Err(Error::Domain("grid_n must be at least 1".into()));
    }
    let delta = |e: f64| delta_unchecked(network, x, y, e);
    if delta(0.0) <= INVASION_MARGIN {
        return Ok(Barrier::Infinite);
    }
    let node = |k: usize| k as f64 / grid_n as f64;
    let Some(k) = (1..=grid_n).find(|&k| delta(node(k)) <= 0.0) else {
        return Ok(Barrier::Finite(0.0));
    };
    let (mut lo, mut hi) = (node(k - 1), node(k));
    while hi - lo > BARRIER_TOL {
        let mid = 0.5 * (lo + hi);
        if delta(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Barrier::Finite(0.5 * (lo + hi)))
}

/// `c(x|(1−ε)y+εx) ≤ c(y|(1−ε)y+εx)` at every grid share `ε = k/grid_n`, with the same
/// `1e-12` slack that separates invasion from non-invasion.
pub fn is_incrementally_deployable(
    network: &CongestionNetwork,
    x: &[f64],
    y: &[f64],
    grid_n: usize,
) -> Result<bool> {
    check_pair(network, x, y)?;
    if grid_n < 1 {
        return Err(Error::Domain("grid_n must be at least 1".into()));
    }
    Ok((0..=grid_n).all(|k| {
        let eps = k as f64 / grid_n as f64;
        let costs = network.path_costs(&mix(y, x, eps));
        let gap: f64 = x
            .iter()
            .zip(y)
            .zip(&costs)
            .map(|((a, b), c)| (a - b) * c)
            .sum();
        gap <= INVASION_MARGIN
    }))
}
