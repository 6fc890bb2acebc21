//! Parallel links with affine costs `c_j(x) = ρ_j + σ_j x` and their Wardrop flows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{congestion_game, CongestionNetwork, GameField, LinkCost};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParallelLinkSystem {
    offsets: Vec<f64>,
    slopes: Vec<f64>,
    demand: f64,
}

impl ParallelLinkSystem {
    pub fn new(offsets: Vec<f64>, slopes: Vec<f64>, demand: f64) -> Result<Self> {
        if offsets.len() != slopes.len() {
            return Err(Error::Dimension(format!(
                "{} offsets, {} slopes",
                offsets.len(),
                slopes.len()
            )));
        }
        if offsets.len() < 2 {
            return Err(Error::Model("need at least two links".into()));
        }
        if let Some(s) = slopes.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::Model(format!("slopes must be positive, got {s}")));
        }
        if offsets.iter().any(|r| !r.is_finite()) {
            return Err(Error::Model("offsets must be finite".into()));
        }
        if !(demand > 0.0 && demand.is_finite()) {
            return Err(Error::Model(format!(
                "demand must be positive, got {demand}"
            )));
        }
        Ok(ParallelLinkSystem {
            offsets,
            slopes,
            demand,
        })
    }

    /// Unit demand.
    pub fn unit(offsets: Vec<f64>, slopes: Vec<f64>) -> Result<Self> {
        Self::new(offsets, slopes, 1.0)
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn demand(&self) -> f64 {
        self.demand
    }

    pub fn num_links(&self) -> usize {
        self.offsets.len()
    }

    pub fn cost(&self, j: usize, load: f64) -> f64 {
        self.offsets[j] + self.slopes[j] * load
    }

    pub fn costs(&self, flows: &[f64]) -> Vec<f64> {
        flows
            .iter()
            .enumerate()
            .map(|(j, &x)| self.cost(j, x))
            .collect()
    }

    pub fn network(&self) -> CongestionNetwork {
        let links = self
            .offsets
            .iter()
            .zip(&self.slopes)
            .map(|(&r, &s)| LinkCost::affine(r, s).expect("validated affine link"))
            .collect();
        CongestionNetwork::parallel(links, self.demand).expect("validated parallel network")
    }

    /// The routing game in cost orientation.
    pub fn game(&self) -> GameField {
        congestion_game(self.network()).expect("validated parallel network")
    }

    /// The links listed in `links`, carrying `demand`.
    pub(crate) fn restrict(&self, links: &[usize], demand: f64) -> (Vec<f64>, Vec<f64>) {
        (
            links.iter().map(|&j| self.offsets[j]).collect(),
            links.iter().map(|&j| self.slopes[j] * demand).collect(),
        )
    }
}

/// Link flows together with their support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowProfile {
    pub flows: Vec<f64>,
    pub support: Vec<usize>,
}

impl FlowProfile {
    pub fn new(flows: Vec<f64>, demand: f64) -> Result<Self> {
        if flows.iter().any(|x| !(*x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidState("flows must be nonnegative".into()));
        }
        let total: f64 = flows.iter().sum();
        if (total - demand).abs() > 1e-12 * demand.max(1.0) {
            return Err(Error::InvalidState(format!(
                "flows sum to {total}, demand is {demand}"
            )));
        }
        let support = (0..flows.len()).filter(|&j| flows[j] > 0.0).collect();
        Ok(FlowProfile { flows, support })
    }

    pub fn for_system(system: &ParallelLinkSystem, flows: Vec<f64>) -> Result<Self> {
        if flows.len() != system.num_links() {
            return Err(Error::Dimension(format!(
                "{} flows for {} links",
                flows.len(),
                system.num_links()
            )));
        }
        Self::new(flows, system.demand())
    }

    pub fn is_full_support(&self) -> bool {
        self.support.len() == self.flows.len()
    }
}

/// Equal-delay solve on `links`: `L = (d + Σ ρ/σ) / Σ 1/σ`, `x_j = (L − ρ_j)/σ_j`.
fn equal_delay(system: &ParallelLinkSystem, links: &[usize]) -> (f64, Vec<f64>) {
    let (r, s) = (system.offsets(), system.slopes());
    let inv: f64 = links.iter().map(|&j| 1.0 / s[j]).sum();
    let level = (system.demand() + links.iter().map(|&j| r[j] / s[j]).sum::<f64>()) / inv;
    (
        level,
        links.iter().map(|&j| (level - r[j]) / s[j]).collect(),
    )
}

/// The Wardrop flow, by active-set iteration on the equal-delay system.
///
/// Links with negative solved flow leave the candidate support; the common delay only
/// decreases, so dropped links stay unused and at most `m − 1` drops occur.
pub fn wardrop_parallel_affine(system: &ParallelLinkSystem) -> FlowProfile {
    let m = system.num_links();
    let mut active: Vec<usize> = (0..m).collect();
    let solved = loop {
        let (_, x) = equal_delay(system, &active);
        if x.iter().all(|v| *v >= 0.0) {
            break x;
        }
        active = active
            .iter()
            .zip(&x)
            .filter(|(_, v)| **v >= 0.0)
            .map(|(&j, _)| j)
            .collect();
    };

    let mut flows = vec![0.0; m];
    for (&j, &v) in active.iter().zip(&solved) {
        flows[j] = v;
    }
    // absorb the rounding of the solve into the largest flow so the total is exact
    let excess = flows.iter().sum::<f64>() - system.demand();
    let big = (0..m)
        .max_by(|&a, &b| flows[a].total_cmp(&flows[b]))
        .expect("at least two links");
    flows[big] -= excess;

    if active.len() == m {
        debug_assert!({
            let closed = full_support_closed_form(system);
            closed
                .iter()
                .zip(&flows)
                .all(|(a, b)| (a - b).abs() <= 1e-9 * system.demand().max(1.0))
        });
    }
    let support = (0..m).filter(|&j| flows[j] > 0.0).collect();
    FlowProfile { flows, support }
}

/// Elementary symmetric polynomial `e_k` of `values`.
fn elementary_symmetric(values: &[f64], k: usize) -> f64 {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &v in values {
        for i in (1..=k).rev() {
            e[i] += v * e[i - 1];
        }
    }
    e[k]
}

/// Closed-form full-support equilibrium
/// `x_j = [d Π_{i≠j} σ_i + Σ_{i≠j} (ρ_i − ρ_j) Π_{k≠i,j} σ_k] / e_{m−1}(σ)`.
///
/// Entries come out negative when the full support is not an equilibrium.
pub fn full_support_closed_form(system: &ParallelLinkSystem) -> Vec<f64> {
    let (r, s, d) = (system.offsets(), system.slopes(), system.demand());
    let m = system.num_links();
    let denom = elementary_symmetric(s, m - 1);
    (0..m)
        .map(|j| {
            let others: f64 = (0..m).filter(|&i| i != j).map(|i| s[i]).product();
            let cross: f64 = (0..m)
                .filter(|&i| i != j)
                .map(|i| {
                    (r[i] - r[j])
                        * (0..m)
                            .filter(|&k| k != i && k != j)
                            .map(|k| s[k])
                            .product::<f64>()
                })
                .sum();
            (d * others + cross) / denom
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wardrop_examples() {
        let w = wardrop_parallel_affine(
            &ParallelLinkSystem::unit(vec![0.0, 0.0], vec![1.0, 10.0]).unwrap(),
        );
        assert!(
            (w.flows[0] - 10.0 / 11.0).abs() < 1e-15 && (w.flows[1] - 1.0 / 11.0).abs() < 1e-15
        );
        let w = wardrop_parallel_affine(
            &ParallelLinkSystem::unit(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
        );
        assert_eq!(w.flows, vec![0.5, 0.5]);
        let w = wardrop_parallel_affine(
            &ParallelLinkSystem::unit(vec![0.0, 5.0], vec![1.0, 1.0]).unwrap(),
        );
        assert_eq!(w.flows, vec![1.0, 0.0]);
        assert_eq!(w.support, vec![0]);
    }

    #[test]
    fn closed_form_matches_solve() {
        let sys = ParallelLinkSystem::new(vec![0.3, 0.1, 0.0, 0.2], vec![1.0, 2.0, 0.5, 3.0], 2.0)
            .unwrap();
        let w = wardrop_parallel_affine(&sys);
        assert!(w.is_full_support());
        for (a, b) in full_support_closed_form(&sys).iter().zip(&w.flows) {
            assert!((a - b).abs() < 1e-14);
        }
        let c = sys.costs(&w.flows);
        assert!(c.iter().all(|v| (v - c[0]).abs() < 1e-14));
    }

    #[test]
    fn repeated_drops() {
        let sys =
            ParallelLinkSystem::unit(vec![0.0, 0.9, 3.0, 5.0], vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let w = wardrop_parallel_affine(&sys);
        assert!((w.flows[0] - 0.95).abs() < 1e-15 && (w.flows[1] - 0.05).abs() < 1e-15);
        assert_eq!(w.support, vec![0, 1]);
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(ParallelLinkSystem::unit(vec![0.0], vec![1.0]).is_err());
        assert!(ParallelLinkSystem::unit(vec![0.0, 0.0], vec![1.0, 0.0]).is_err());
        assert!(ParallelLinkSystem::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.0).is_err());
    }
}
