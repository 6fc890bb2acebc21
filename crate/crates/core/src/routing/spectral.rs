//! Linear stability of Hedge at parallel-link equilibria.
//!
//! All matrices are built for unit demand. A system with demand `d` is handled through the
//! shares `p = x/d`, whose costs `ρ_j + (σ_j d) p_j` are again affine.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::parallel::{FlowProfile, ParallelLinkSystem};
use crate::error::{Error, Result};

/// Spectral radii within this distance of one are inconclusive.
pub const STABILITY_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityVerdict {
    Stable,
    Unstable,
    Inconclusive,
}

impl StabilityVerdict {
    pub fn from_radius(rho: f64) -> Self {
        if rho < 1.0 - STABILITY_MARGIN {
            StabilityVerdict::Stable
        } else if rho > 1.0 + STABILITY_MARGIN {
            StabilityVerdict::Unstable
        } else {
            StabilityVerdict::Inconclusive
        }
    }
}

/// Offsets, rescaled slopes and shares of the links in `links`.
struct Block {
    offsets: Vec<f64>,
    slopes: Vec<f64>,
    shares: Vec<f64>,
}

impl Block {
    fn new(system: &ParallelLinkSystem, flow: &FlowProfile, links: &[usize]) -> Self {
        let d: f64 = links.iter().map(|&j| flow.flows[j]).sum();
        let (offsets, slopes) = system.restrict(links, d);
        Block {
            offsets,
            slopes,
            shares: links.iter().map(|&j| flow.flows[j] / d).collect(),
        }
    }

    fn full(system: &ParallelLinkSystem, flow: &FlowProfile) -> Result<Self> {
        if flow.flows.len() != system.num_links() {
            return Err(Error::Dimension(format!(
                "{} flows for {} links",
                flow.flows.len(),
                system.num_links()
            )));
        }
        if !flow.is_full_support() {
            return Err(Error::Support(
                "flow leaves links unused; use classify_partial_support for partial-support flows"
                    .into(),
            ));
        }
        let all: Vec<usize> = (0..system.num_links()).collect();
        Ok(Self::new(system, flow, &all))
    }

    /// Indices ordered by decreasing offset (stable in the original order).
    fn offset_order(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (0..self.offsets.len()).collect();
        perm.sort_by(|&a, &b| self.offsets[b].total_cmp(&self.offsets[a]));
        perm
    }

    /// `x_l (σ_l + ρ_l − ρ_1)`, the rate-one loss on the diagonal of `K`.
    fn damping(&self, l: usize, r1: f64) -> f64 {
        self.shares[l] * (self.slopes[l] + self.offsets[l] - r1)
    }

    fn deflated(&self, alpha: f64) -> (DMatrix<f64>, Vec<usize>) {
        let perm = self.offset_order();
        let n = perm.len() - 1;
        let r1 = self.offsets[perm[0]];
        let k = DMatrix::from_fn(n, n, |i, j| {
            let l = perm[i + 1];
            if i == j {
                1.0 - alpha * self.damping(l, r1)
            } else {
                alpha * self.shares[l] * (r1 - self.offsets[l])
            }
        });
        (k, perm)
    }
}

/// Jacobian of Hedge at a full-support flow:
/// `J(i,i) = (1 − α x_i σ_i)(1 − x_i)`, `J(i,j) = −x_i (1 − α x_j σ_j)`.
///
/// Its columns sum to zero.
pub fn jacobian_full_support(
    system: &ParallelLinkSystem,
    flow: &FlowProfile,
    alpha: f64,
) -> Result<DMatrix<f64>> {
    let b = Block::full(system, flow)?;
    let (x, s) = (&b.shares, &b.slopes);
    Ok(DMatrix::from_fn(x.len(), x.len(), |i, j| {
        if i == j {
            (1.0 - alpha * x[i] * s[i]) * (1.0 - x[i])
        } else {
            -x[i] * (1.0 - alpha * x[j] * s[j])
        }
    }))
}

/// Deflated Jacobian `K` with `K(i,i) = 1 − α x_{i+1}(σ_{i+1} + ρ_{i+1} − ρ_1)` and
/// `K(i,j) = α x_{i+1}(ρ_1 − ρ_{i+1})`, links ordered by decreasing offset.
///
/// Returns `K` and the ordering: entry `k` of the permutation is the original index of the
/// `k`-th link. The simplified form assumes equal delays on the links.
pub fn deflated_k(
    system: &ParallelLinkSystem,
    flow: &FlowProfile,
    alpha: f64,
) -> Result<(DMatrix<f64>, Vec<usize>)> {
    Ok(Block::full(system, flow)?.deflated(alpha))
}

/// `ᾱ = min_{j≥2} 1 / (x_j (σ_j + ρ_j − ρ_1))` in decreasing-offset order; terms with a
/// non-positive denominator impose no limit.
pub fn alpha_bar(system: &ParallelLinkSystem, flow: &FlowProfile) -> Result<f64> {
    let b = Block::full(system, flow).map_err(|e| match e {
        Error::Support(m) => Error::Domain(m),
        e => e,
    })?;
    let perm = b.offset_order();
    let r1 = b.offsets[perm[0]];
    let damping: Vec<f64> = perm[1..]
        .iter()
        .map(|&l| b.damping(l, r1))
        .filter(|d| *d > 0.0)
        .collect();
    let mut bar = damping
        .iter()
        .map(|d| 1.0 / d)
        .fold(f64::INFINITY, f64::min);
    // round down so the diagonal of K(ᾱ), computed as 1 − ᾱd, is never a negative rounding residue
    while bar.is_finite() && damping.iter().any(|d| 1.0 - bar * d < 0.0) {
        bar = bar.next_down();
    }
    Ok(bar)
}

/// All eigenvalues of a square matrix.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{}×{} matrix is not square",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.is_empty() {
        return Ok(Vec::new());
    }
    Ok(m.complex_eigenvalues().iter().copied().collect())
}

/// `max |λ|` over the spectrum; zero for an empty matrix.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// Support and common delay of a fixed point of Hedge.
fn fixed_point_delay(system: &ParallelLinkSystem, flow: &FlowProfile) -> Result<(f64, f64)> {
    if flow.flows.len() != system.num_links() {
        return Err(Error::Dimension(format!(
            "{} flows for {} links",
            flow.flows.len(),
            system.num_links()
        )));
    }
    let delays: Vec<f64> = flow
        .support
        .iter()
        .map(|&j| system.cost(j, flow.flows[j]))
        .collect();
    let lo = delays.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = delays.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * hi.abs().max(1.0);
    if hi - lo > tol {
        return Err(Error::Domain(format!(
            "supported delays differ by {:e}; not a fixed point",
            hi - lo
        )));
    }
    Ok((hi, tol))
}

/// Spectral radius of the deflated supported block at rate `alpha`; zero for a single link.
pub fn block_spectral_radius(
    system: &ParallelLinkSystem,
    flow: &FlowProfile,
    alpha: f64,
) -> Result<f64> {
    fixed_point_delay(system, flow)?;
    if flow.support.len() < 2 {
        return Ok(0.0);
    }
    let (k, _) = Block::new(system, flow, &flow.support).deflated(alpha);
    spectral_radius(&k)
}

/// Stability of a Hedge fixed point, full or partial support.
///
/// An unused link cheaper at zero load than the common delay makes the point unstable, a
/// tie within tolerance is inconclusive, and otherwise the supported block decides.
pub fn classify_partial_support(
    system: &ParallelLinkSystem,
    flow: &FlowProfile,
    alpha: f64,
) -> Result<StabilityVerdict> {
    let (delay, tol) = fixed_point_delay(system, flow)?;
    let idle: Vec<usize> = (0..system.num_links())
        .filter(|j| !flow.support.contains(j))
        .collect();
    if idle.iter().any(|&j| system.cost(j, 0.0) < delay - tol) {
        return Ok(StabilityVerdict::Unstable);
    }
    if idle
        .iter()
        .any(|&j| (system.cost(j, 0.0) - delay).abs() <= tol)
    {
        return Ok(StabilityVerdict::Inconclusive);
    }
    Ok(StabilityVerdict::from_radius(block_spectral_radius(
        system, flow, alpha,
    )?))
}
