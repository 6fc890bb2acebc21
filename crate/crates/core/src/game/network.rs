//! Nonatomic congestion networks described by explicit path lists.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial link cost `c(t) = Σ_k a_k t^k` with nondecreasing shape on `t ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCost {
    coeffs: Vec<f64>,
}

impl LinkCost {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Model("link cost without coefficients".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Model("non-finite link cost coefficient".into()));
        }
        if coeffs.iter().skip(1).any(|&c| c < 0.0) {
            return Err(Error::Model(
                "link cost must be nondecreasing (negative higher-order coefficient)".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    /// `ρ + σ t`.
    pub fn affine(offset: f64, slope: f64) -> Result<Self> {
        Self::new(vec![offset, slope])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * t + a)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * t + k as f64 * a)
    }

    /// `∫₀ᵗ c(s) ds`.
    pub fn integral(&self, t: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (k, &a)| acc * t + a / (k + 1) as f64)
            * t
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.coeffs.iter().skip(1).any(|&c| c > 0.0)
    }
}

/// One commodity: a demand routed over an explicit list of paths (link index sets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Commodity {
    pub demand: f64,
    pub paths: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CongestionNetwork {
    links: Vec<LinkCost>,
    commodities: Vec<Commodity>,
}

impl CongestionNetwork {
    pub fn new(links: Vec<LinkCost>, commodities: Vec<Commodity>) -> Result<Self> {
        if links.is_empty() {
            return Err(Error::Model("network has no links".into()));
        }
        if commodities.is_empty() {
            return Err(Error::Model("network has no commodities".into()));
        }
        for (i, c) in commodities.iter().enumerate() {
            if c.paths.is_empty() {
                return Err(Error::Model(format!("commodity {i} has no path")));
            }
            if !(c.demand > 0.0 && c.demand.is_finite()) {
                return Err(Error::Model(format!(
                    "commodity {i} has demand {}",
                    c.demand
                )));
            }
            for p in &c.paths {
                if let Some(&e) = p.iter().find(|&&e| e >= links.len()) {
                    return Err(Error::Model(format!("commodity {i} uses unknown link {e}")));
                }
            }
        }
        Ok(Self { links, commodities })
    }

    /// `m` parallel links between one source and one sink.
    pub fn parallel(links: Vec<LinkCost>, demand: f64) -> Result<Self> {
        let paths = (0..links.len()).map(|e| vec![e]).collect();
        Self::new(links, vec![Commodity { demand, paths }])
    }

    pub fn links(&self) -> &[LinkCost] {
        &self.links
    }

    pub fn commodities(&self) -> &[Commodity] {
        &self.commodities
    }

    pub fn demands(&self) -> Vec<f64> {
        self.commodities.iter().map(|c| c.demand).collect()
    }

    pub fn path_counts(&self) -> Vec<usize> {
        self.commodities.iter().map(|c| c.paths.len()).collect()
    }

    pub fn total_demand(&self) -> f64 {
        self.commodities.iter().map(|c| c.demand).sum()
    }

    fn paths(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.commodities.iter().flat_map(|c| c.paths.iter())
    }

    /// Aggregate load `x_e` per link induced by a path flow.
    pub fn link_loads(&self, path_flow: &[f64]) -> Vec<f64> {
        let mut loads = vec![0.0; self.links.len()];
        for (p, &f) in self.paths().zip(path_flow) {
            for &e in p {
                loads[e] += f;
            }
        }
        loads
    }

    /// Per-path delays given link loads.
    pub fn path_costs_at_loads(&self, loads: &[f64]) -> Vec<f64> {
        let link_costs: Vec<f64> = self
            .links
            .iter()
            .zip(loads)
            .map(|(c, &t)| c.eval(t))
            .collect();
        self.paths()
            .map(|p| p.iter().map(|&e| link_costs[e]).sum())
            .collect()
    }

    pub fn path_costs(&self, path_flow: &[f64]) -> Vec<f64> {
        self.path_costs_at_loads(&self.link_loads(path_flow))
    }

    /// Beckmann potential `Σ_e ∫₀^{x_e} c_e`.
    pub fn beckmann(&self, path_flow: &[f64]) -> f64 {
        self.link_loads(path_flow)
            .iter()
            .zip(&self.links)
            .map(|(&t, c)| c.integral(t))
            .sum()
    }

    /// Analytic range of path costs over all feasible flows (costs are nondecreasing,
    /// so extremes occur at zero load and at full load).
    pub fn cost_bounds(&self) -> (f64, f64) {
        let total = self.total_demand();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for p in self.paths() {
            let min: f64 = p.iter().map(|&e| self.links[e].eval(0.0)).sum();
            let max: f64 = p.iter().map(|&e| self.links[e].eval(total)).sum();
            lo = lo.min(min);
            hi = hi.max(max);
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_evaluation() {
        let c = LinkCost::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(c.eval(2.0), 1.0 + 4.0 + 12.0);
        assert_eq!(c.derivative(2.0), 2.0 + 12.0);
        assert!((c.integral(2.0) - (2.0 + 4.0 + 8.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_decreasing_costs() {
        assert!(LinkCost::affine(0.0, -1.0).is_err());
        assert!(LinkCost::affine(-3.0, 1.0).is_ok());
    }

    #[test]
    fn unused_link_has_zero_load() {
        let links = vec![LinkCost::affine(0.0, 1.0).unwrap(); 3];
        let net = CongestionNetwork::new(
            links,
            vec![Commodity {
                demand: 1.0,
                paths: vec![vec![0], vec![1]],
            }],
        )
        .unwrap();
        assert_eq!(net.link_loads(&[0.3, 0.7]), vec![0.3, 0.7, 0.0]);
    }

    #[test]
    fn commodity_without_path_is_rejected() {
        let links = vec![LinkCost::affine(0.0, 1.0).unwrap()];
        let err = CongestionNetwork::new(
            links,
            vec![Commodity {
                demand: 1.0,
                paths: vec![],
            }],
        );
        assert!(matches!(err, Err(Error::Model(_))));
    }
}
