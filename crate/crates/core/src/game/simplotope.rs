//! The state space: a product of scaled simplices, one per population.

use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Absolute tolerance on per-population mass conservation (scaled by `max(1, ω_i)`).
pub const MASS_TOL: f64 = 1e-12;

/// Populations with masses `ω_i` and strategy counts `m_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationStructure {
    masses: Vec<f64>,
    strategy_counts: Vec<usize>,
    offsets: Vec<usize>,
}

impl PopulationStructure {
    pub fn new(masses: Vec<f64>, strategy_counts: Vec<usize>) -> Result<Self> {
        if masses.is_empty() || strategy_counts.is_empty() {
            return Err(Error::InvalidStructure("no populations".into()));
        }
        if masses.len() != strategy_counts.len() {
            return Err(Error::InvalidStructure(format!(
                "{} masses but {} strategy counts",
                masses.len(),
                strategy_counts.len()
            )));
        }
        if let Some((i, w)) = masses
            .iter()
            .enumerate()
            .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
        {
            return Err(Error::InvalidStructure(format!(
                "mass of population {i} is {w}"
            )));
        }
        if let Some(i) = strategy_counts.iter().position(|&m| m == 0) {
            return Err(Error::InvalidStructure(format!(
                "population {i} has no strategies"
            )));
        }
        let mut offsets = Vec::with_capacity(strategy_counts.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &m in &strategy_counts {
            acc += m;
            offsets.push(acc);
        }
        Ok(Self {
            masses,
            strategy_counts,
            offsets,
        })
    }

    /// Single population of unit mass.
    pub fn single(strategies: usize) -> Result<Self> {
        Self::new(vec![1.0], vec![strategies])
    }

    pub fn num_populations(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, population: usize) -> f64 {
        self.masses[population]
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Total dimension `m = Σ m_i`.
    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Index range of population `i` inside a flat state vector.
    pub fn block(&self, population: usize) -> Range<usize> {
        self.offsets[population]..self.offsets[population + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = (usize, Range<usize>)> + '_ {
        (0..self.num_populations()).map(move |i| (i, self.block(i)))
    }

    /// Population owning flat index `k`.
    pub fn population_of(&self, k: usize) -> usize {
        self.offsets.partition_point(|&o| o <= k) - 1
    }

    /// Same structure with masses rescaled to sum to one; returns the scale `Σω`.
    pub(crate) fn unit_mass(&self) -> (Self, f64) {
        let total = self.total_mass();
        let masses = self.masses.iter().map(|w| w / total).collect();
        (
            Self::new(masses, self.strategy_counts.clone()).unwrap(),
            total,
        )
    }

    /// Barycenter: every population spread evenly over its strategies.
    pub fn barycenter(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (i, r) in self.blocks() {
            let share = self.masses[i] / r.len() as f64;
            out[r].iter_mut().for_each(|v| *v = share);
        }
        out
    }

    pub fn validate(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "state has length {}, structure needs {}",
                values.len(),
                self.dim()
            )));
        }
        if let Some((k, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidState(format!("component {k} is {v}")));
        }
        for (i, r) in self.blocks() {
            let sum: f64 = values[r].iter().sum();
            let w = self.masses[i];
            if (sum - w).abs() > MASS_TOL * w.max(1.0) {
                return Err(Error::InvalidState(format!(
                    "population {i} sums to {sum}, expected mass {w}"
                )));
            }
        }
        Ok(())
    }
}

/// A point of the simplotope.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    structure: Arc<PopulationStructure>,
    values: Vec<f64>,
}

impl State {
    pub fn new(structure: Arc<PopulationStructure>, values: Vec<f64>) -> Result<Self> {
        structure.validate(&values)?;
        Ok(Self { structure, values })
    }

    /// Skips validation. Used by the maps, which preserve the invariants.
    pub(crate) fn from_parts(structure: Arc<PopulationStructure>, values: Vec<f64>) -> Self {
        debug_assert_eq!(structure.dim(), values.len());
        Self { structure, values }
    }

    pub fn barycenter(structure: Arc<PopulationStructure>) -> Self {
        let values = structure.barycenter();
        Self { structure, values }
    }

    pub fn structure(&self) -> &PopulationStructure {
        &self.structure
    }

    pub fn shared_structure(&self) -> &Arc<PopulationStructure> {
        &self.structure
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn population(&self, i: usize) -> &[f64] {
        &self.values[self.structure.block(i)]
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `∞`-norm distance to another state of the same structure.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        max_abs_diff(&self.values, &other.values)
    }

    pub fn is_interior(&self) -> bool {
        self.values.iter().all(|&v| v > 0.0)
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `n` interior states drawn uniformly from the simplotope (a flat Dirichlet per population).
pub fn sample_interior(structure: &Arc<PopulationStructure>, n: usize, seed: u64) -> Vec<State> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut values = vec![0.0; structure.dim()];
            for (i, r) in structure.blocks() {
                let block = &mut values[r];
                loop {
                    block
                        .iter_mut()
                        .for_each(|v| *v = rng.sample::<f64, _>(Exp1));
                    if block.iter().all(|v| *v > 0.0) {
                        break;
                    }
                }
                let total: f64 = block.iter().sum();
                block
                    .iter_mut()
                    .for_each(|v| *v *= structure.mass(i) / total);
            }
            State::from_parts(structure.clone(), values)
        })
        .collect()
}

/// Checked constructor used throughout the public API.
pub fn make_simplotope(masses: &[f64], strategy_counts: &[usize]) -> Result<PopulationStructure> {
    PopulationStructure::new(masses.to_vec(), strategy_counts.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_samples_are_valid_and_reproducible() {
        let s = Arc::new(make_simplotope(&[1.0, 2.5], &[3, 2]).unwrap());
        let a = sample_interior(&s, 50, 9);
        for x in &a {
            assert!(x.is_interior());
            s.validate(x.values()).unwrap();
        }
        assert_eq!(a, sample_interior(&s, 50, 9));
        assert_ne!(a, sample_interior(&s, 50, 10));
    }

    #[test]
    fn smallest_structure() {
        let s = make_simplotope(&[1.0], &[2]).unwrap();
        assert_eq!(s.num_populations(), 1);
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn two_populations() {
        let s = make_simplotope(&[0.5, 0.5], &[2, 3]).unwrap();
        assert_eq!(s.dim(), 5);
        assert_eq!(s.block(1), 2..5);
        assert_eq!(s.population_of(0), 0);
        assert_eq!(s.population_of(1), 0);
        assert_eq!(s.population_of(2), 1);
        assert_eq!(s.population_of(4), 1);
    }

    #[test]
    fn rejects_bad_structures() {
        assert!(matches!(
            make_simplotope(&[1.0, -1.0], &[2, 2]),
            Err(Error::InvalidStructure(_))
        ));
        assert!(matches!(
            make_simplotope(&[1.0], &[0]),
            Err(Error::InvalidStructure(_))
        ));
        assert!(matches!(
            make_simplotope(&[], &[]),
            Err(Error::InvalidStructure(_))
        ));
        assert!(matches!(
            make_simplotope(&[1.0], &[2, 2]),
            Err(Error::InvalidStructure(_))
        ));
    }

    #[test]
    fn state_validation() {
        let s = Arc::new(make_simplotope(&[0.5, 0.5], &[2, 1]).unwrap());
        assert!(State::new(s.clone(), vec![0.25, 0.25, 0.5]).is_ok());
        assert!(State::new(s.clone(), vec![0.5, 0.0, 0.5]).is_ok());
        assert!(matches!(
            State::new(s.clone(), vec![0.6, -0.1, 0.5]),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            State::new(s.clone(), vec![0.3, 0.3, 0.5]),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            State::new(s, vec![0.5, 0.5]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn barycenter_conserves_mass() {
        let s = Arc::new(make_simplotope(&[2.0, 0.5], &[3, 4]).unwrap());
        let b = State::barycenter(s.clone());
        assert!(s.validate(b.values()).is_ok());
    }
}
