//! Payoff (or cost) vector fields over the simplotope and the built-in game families.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::network::CongestionNetwork;
use super::simplotope::{dot, PopulationStructure, State};
use crate::error::{Error, Result};

/// Symmetry tolerance for doubly symmetric (standard QP) games.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `evaluate` returns payoffs; agents move toward larger values.
    Maximize,
    /// `evaluate` returns costs; agents move toward smaller values.
    Minimize,
}

impl Orientation {
    /// Factor turning an evaluated value into a payoff.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Maximize => 1.0,
            Orientation::Minimize => -1.0,
        }
    }
}

pub type FieldFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type PotentialFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Family {
    /// `F(X) = A X + b`; carries a potential `½ X·AX + b·X` when `A` is symmetric.
    Linear {
        matrix: DMatrix<f64>,
        offset: DVector<f64>,
        potential: bool,
    },
    Congestion(CongestionNetwork),
    Custom {
        eval: FieldFn,
        potential: Option<PotentialFn>,
        bounds: Option<(f64, f64)>,
    },
}

/// An evaluatable field `F: 𝕏 → ℝᵐ`.
///
/// Outputs are `(raw(s·X) + shift) / scale`, where `raw` is the family's native field,
/// `s` undoes a mass normalization, and `(shift, scale)` is the affine payoff rescaling
/// applied by [`normalize_game`].
#[derive(Clone)]
pub struct GameField {
    structure: Arc<PopulationStructure>,
    orientation: Orientation,
    family: Family,
    shift: f64,
    scale: f64,
    mass_scale: f64,
}

impl fmt::Debug for GameField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let family = match &self.family {
            Family::Linear { .. } => "linear",
            Family::Congestion(_) => "congestion",
            Family::Custom { .. } => "custom",
        };
        f.debug_struct("GameField")
            .field("structure", &self.structure)
            .field("orientation", &self.orientation)
            .field("family", &family)
            .field("shift", &self.shift)
            .field("scale", &self.scale)
            .field("mass_scale", &self.mass_scale)
            .finish()
    }
}

impl GameField {
    fn with_family(
        structure: PopulationStructure,
        orientation: Orientation,
        family: Family,
    ) -> Self {
        Self {
            structure: Arc::new(structure),
            orientation,
            family,
            shift: 0.0,
            scale: 1.0,
            mass_scale: 1.0,
        }
    }

    /// Linear population game `F(X) = A X + b` on an arbitrary simplotope.
    pub fn linear(
        structure: PopulationStructure,
        matrix: DMatrix<f64>,
        offset: DVector<f64>,
    ) -> Result<Self> {
        let m = structure.dim();
        if matrix.nrows() != m || matrix.ncols() != m || offset.len() != m {
            return Err(Error::Dimension(format!(
                "linear game needs a {m}x{m} matrix and length-{m} offset, got {}x{} and {}",
                matrix.nrows(),
                matrix.ncols(),
                offset.len()
            )));
        }
        if matrix.iter().chain(offset.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite payoff entry".into()));
        }
        Ok(Self::with_family(
            structure,
            Orientation::Maximize,
            Family::Linear {
                matrix,
                offset,
                potential: false,
            },
        ))
    }

    /// User-supplied field. `bounds` must be given for the game to be normalizable.
    pub fn custom(
        structure: PopulationStructure,
        orientation: Orientation,
        eval: FieldFn,
        potential: Option<PotentialFn>,
        bounds: Option<(f64, f64)>,
    ) -> Self {
        Self::with_family(
            structure,
            orientation,
            Family::Custom {
                eval,
                potential,
                bounds,
            },
        )
    }

    pub fn structure(&self) -> &PopulationStructure {
        &self.structure
    }

    pub fn shared_structure(&self) -> &Arc<PopulationStructure> {
        &self.structure
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn dim(&self) -> usize {
        self.structure.dim()
    }

    /// Payoff matrix of a single-population linear game (after any rescaling).
    pub fn payoff_matrix(&self) -> Option<DMatrix<f64>> {
        match &self.family {
            Family::Linear { matrix, offset, .. } => {
                let mut c = matrix * self.mass_scale;
                for (k, mut row) in c.row_iter_mut().enumerate() {
                    row.add_scalar_mut(offset[k] + self.shift);
                }
                Some(c / self.scale)
            }
            _ => None,
        }
    }

    pub fn network(&self) -> Option<&CongestionNetwork> {
        match &self.family {
            Family::Congestion(net) => Some(net),
            _ => None,
        }
    }

    /// A state for this game from raw values (validated).
    pub fn state(&self, values: Vec<f64>) -> Result<State> {
        State::new(self.structure.clone(), values)
    }

    pub fn barycenter(&self) -> State {
        State::barycenter(self.structure.clone())
    }

    pub(crate) fn check(&self, state: &State) -> Result<()> {
        if Arc::ptr_eq(state.shared_structure(), &self.structure)
            || state.structure() == &*self.structure
        {
            Ok(())
        } else {
            Err(Error::Dimension(
                "state structure does not match the game".into(),
            ))
        }
    }

    fn raw(&self, x: &[f64]) -> Vec<f64> {
        match &self.family {
            Family::Linear { matrix, offset, .. } => {
                let v = DVector::from_column_slice(x);
                (matrix * v + offset).as_slice().to_vec()
            }
            Family::Congestion(net) => net.path_costs(x),
            Family::Custom { eval, .. } => eval(x),
        }
    }

    fn raw_potential(&self, x: &[f64]) -> Option<f64> {
        match &self.family {
            Family::Linear {
                matrix,
                offset,
                potential: true,
            } => {
                let v = DVector::from_column_slice(x);
                Some(0.5 * v.dot(&(matrix * &v)) + offset.dot(&v))
            }
            Family::Linear { .. } => None,
            Family::Congestion(net) => Some(net.beckmann(x)),
            Family::Custom { potential, .. } => potential.as_ref().map(|p| p(x)),
        }
    }

    /// Evaluates the field on raw values assumed to lie in this game's simplotope.
    pub fn evaluate_values(&self, x: &[f64]) -> Vec<f64> {
        let scaled;
        let input = if self.mass_scale == 1.0 {
            x
        } else {
            scaled = x.iter().map(|v| v * self.mass_scale).collect::<Vec<_>>();
            &scaled
        };
        let mut out = self.raw(input);
        if self.shift != 0.0 || self.scale != 1.0 {
            out.iter_mut()
                .for_each(|v| *v = (*v + self.shift) / self.scale);
        }
        out
    }

    /// `F(X)` (payoffs, or costs under [`Orientation::Minimize`]).
    pub fn evaluate(&self, state: &State) -> Result<Vec<f64>> {
        self.check(state)?;
        Ok(self.evaluate_values(state.values()))
    }

    /// Field expressed as payoffs: `F` when maximizing, `-c` when minimizing.
    pub fn payoffs(&self, state: &State) -> Result<Vec<f64>> {
        let sign = self.orientation.sign();
        let mut v = self.evaluate(state)?;
        if sign < 0.0 {
            v.iter_mut().for_each(|p| *p = -*p);
        }
        Ok(v)
    }

    pub fn has_potential(&self) -> bool {
        match &self.family {
            Family::Linear { potential, .. } => *potential,
            Family::Congestion(_) => true,
            Family::Custom { potential, .. } => potential.is_some(),
        }
    }

    /// Potential whose gradient is the field, when the game has one.
    pub fn potential_values(&self, x: &[f64]) -> Option<f64> {
        if let Family::Linear {
            offset,
            potential: true,
            ..
        } = &self.family
        {
            // Standard QP: keep the quadratic form ½ X·S'X of the rescaled matrix.
            if self.structure.num_populations() == 1 && offset.iter().all(|&b| b == 0.0) {
                let c = self.payoff_matrix()?;
                let v = DVector::from_column_slice(x);
                return Some(0.5 * v.dot(&(c * &v)));
            }
        }
        let s = self.mass_scale;
        let scaled: Vec<f64> = x.iter().map(|v| v * s).collect();
        let raw = self.raw_potential(&scaled)? / s;
        let total: f64 = x.iter().sum();
        Some((raw + self.shift * total) / self.scale)
    }

    pub fn potential(&self, state: &State) -> Result<Option<f64>> {
        self.check(state)?;
        Ok(self.potential_values(state.values()))
    }

    /// Range `[lo, hi]` of the field over the simplotope, when known.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        let (lo, hi) = match &self.family {
            Family::Linear { matrix, offset, .. } => {
                linear_bounds(&self.structure, self.mass_scale, matrix, offset)
            }
            Family::Congestion(net) => net.cost_bounds(),
            Family::Custom { bounds, .. } => (*bounds)?,
        };
        Some((
            (lo + self.shift) / self.scale,
            (hi + self.shift) / self.scale,
        ))
    }

    /// Whether values lie in `(0, 1)` and masses sum to one.
    pub fn is_normalized(&self) -> bool {
        let unit = (self.structure.total_mass() - 1.0).abs() <= 1e-12;
        unit && matches!(self.bounds(), Some((lo, hi)) if lo > 0.0 && hi < 1.0)
    }

    /// Per-population average `(1/ω_i) X_i·F_i(X)`.
    pub fn average_payoff(&self, state: &State) -> Result<Vec<f64>> {
        let f = self.evaluate(state)?;
        Ok(population_averages(state, &f))
    }
}

fn population_averages(state: &State, f: &[f64]) -> Vec<f64> {
    let s = state.structure();
    s.blocks()
        .map(|(i, r)| dot(&state.values()[r.clone()], &f[r]) / s.mass(i))
        .collect()
}

fn linear_bounds(
    s: &PopulationStructure,
    mass_scale: f64,
    a: &DMatrix<f64>,
    b: &DVector<f64>,
) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..a.nrows() {
        let mut row_lo = b[k];
        let mut row_hi = b[k];
        for (i, r) in s.blocks() {
            let w = s.mass(i) * mass_scale;
            let entries = r.map(|j| a[(k, j)]);
            let (mn, mx) = entries.fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), v| {
                (mn.min(v), mx.max(v))
            });
            row_lo += w * mn;
            row_hi += w * mx;
        }
        lo = lo.min(row_lo);
        hi = hi.max(row_hi);
    }
    (lo, hi)
}

fn square(c: &DMatrix<f64>) -> Result<usize> {
    if c.nrows() != c.ncols() || c.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "payoff matrix must be square, got {}x{}",
            c.nrows(),
            c.ncols()
        )));
    }
    Ok(c.nrows())
}

/// Symmetric bimatrix game `(C, Cᵀ)` as a single unit-mass population with `F(X) = CX`.
pub fn linear_symmetric_game(c: DMatrix<f64>) -> Result<GameField> {
    let n = square(&c)?;
    GameField::linear(PopulationStructure::single(n)?, c, DVector::zeros(n))
}

/// Doubly symmetric game `F(X) = SX` with potential `½ X·SX`.
pub fn standard_qp_game(s: DMatrix<f64>) -> Result<GameField> {
    let n = square(&s)?;
    let asym = (&s - s.transpose()).amax();
    if asym > SYMMETRY_TOL {
        return Err(Error::Symmetry(asym));
    }
    let mut g = GameField::linear(PopulationStructure::single(n)?, s, DVector::zeros(n))?;
    if let Family::Linear { potential, .. } = &mut g.family {
        *potential = true;
    }
    Ok(g)
}

/// Nonatomic congestion game: one population per commodity, costs are path delays.
pub fn congestion_game(network: CongestionNetwork) -> Result<GameField> {
    let structure = PopulationStructure::new(network.demands(), network.path_counts())?;
    Ok(GameField::with_family(
        structure,
        Orientation::Minimize,
        Family::Congestion(network),
    ))
}

/// Affinely rescales values into `(0, 1)` and masses to `Σω = 1`.
///
/// The payoff map is `F ↦ (F + a)/b` with `a = 1 − lo` and `b = hi − lo + 2`, shared across
/// all components, so the image is `[1/b, 1 − 1/b]`. A game that already satisfies both
/// conditions is returned unchanged.
pub fn normalize_game(game: &GameField) -> Result<GameField> {
    let (lo, hi) = game
        .bounds()
        .ok_or_else(|| Error::Normalization("field has no declared bounds".into()))?;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Normalization(format!("invalid bounds [{lo}, {hi}]")));
    }
    if game.is_normalized() {
        return Ok(game.clone());
    }
    let mut out = game.clone();
    let (structure, total) = game.structure.unit_mass();
    if (total - 1.0).abs() > 1e-12 {
        out.structure = Arc::new(structure);
        out.mass_scale = game.mass_scale * total;
    }
    if !(lo > 0.0 && hi < 1.0) {
        let a = 1.0 - lo;
        let b = hi - lo + 2.0;
        // compose with any existing rescaling: ((F+s)/k + a)/b = (F + s + a k)/(k b)
        out.shift = game.shift + a * game.scale;
        out.scale = game.scale * b;
    }
    Ok(out)
}

/// Free-function form of [`GameField::average_payoff`].
pub fn average_payoff(game: &GameField, state: &State) -> Result<Vec<f64>> {
    game.average_payoff(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::network::LinkCost;
    use nalgebra::dmatrix;

    fn hawk_dove() -> GameField {
        linear_symmetric_game(dmatrix![-1.0, 2.0; 0.0, 1.0]).unwrap()
    }

    #[test]
    fn matrix_vector_product() {
        let g = linear_symmetric_game(dmatrix![0.2, 0.8; 0.4, 0.6]).unwrap();
        let f = g.evaluate(&g.state(vec![0.9, 0.1]).unwrap()).unwrap();
        assert!((f[0] - 0.26).abs() < 1e-15);
        assert!((f[1] - 0.42).abs() < 1e-15);
    }

    #[test]
    fn constant_matrix_gives_constant_field() {
        let g = linear_symmetric_game(DMatrix::from_element(3, 3, 0.7)).unwrap();
        let f = g.evaluate(&g.state(vec![0.2, 0.3, 0.5]).unwrap()).unwrap();
        assert!(f.iter().all(|v| (v - 0.7).abs() < 1e-15));
    }

    #[test]
    fn non_square_matrix_rejected() {
        assert!(matches!(
            linear_symmetric_game(DMatrix::zeros(1, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn qp_requires_symmetry() {
        assert!(matches!(
            standard_qp_game(dmatrix![0.2, 0.8; 0.4, 0.6]),
            Err(Error::Symmetry(_))
        ));
    }

    #[test]
    fn qp_potential_after_normalization() {
        let g = normalize_game(&standard_qp_game(dmatrix![1.0, 0.0; 0.0, 1.0]).unwrap()).unwrap();
        let sp = g.payoff_matrix().unwrap();
        // (S + 1)/3
        assert!((sp[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((sp[(0, 1)] - 1.0 / 3.0).abs() < 1e-15);
        let x = g.state(vec![0.5, 0.5]).unwrap();
        let v = DVector::from_column_slice(x.values());
        let expected = 0.5 * v.dot(&(&sp * &v));
        assert!((g.potential(&x).unwrap().unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn hawk_dove_normalization() {
        let g = normalize_game(&hawk_dove()).unwrap();
        let c = g.payoff_matrix().unwrap();
        let expected = dmatrix![0.2, 0.8; 0.4, 0.6];
        assert!((c - expected).amax() < 1e-15);
        assert!(g.is_normalized());
    }

    #[test]
    fn normalization_is_idempotent() {
        let g = normalize_game(&hawk_dove()).unwrap();
        let h = normalize_game(&g).unwrap();
        assert!((g.payoff_matrix().unwrap() - h.payoff_matrix().unwrap()).amax() < 1e-15);
    }

    #[test]
    fn masses_rescaled_to_unit_total() {
        let net = CongestionNetwork::new(
            vec![
                LinkCost::affine(0.0, 1.0).unwrap(),
                LinkCost::affine(1.0, 2.0).unwrap(),
            ],
            vec![
                crate::game::network::Commodity {
                    demand: 2.0,
                    paths: vec![vec![0], vec![1]],
                },
                crate::game::network::Commodity {
                    demand: 2.0,
                    paths: vec![vec![0], vec![1]],
                },
            ],
        )
        .unwrap();
        let g = congestion_game(net).unwrap();
        let n = normalize_game(&g).unwrap();
        assert_eq!(n.structure().masses(), &[0.5, 0.5]);
        // evaluating the normalized game at x/4 matches the affine image of the raw costs at x
        let raw = g.state(vec![1.0, 1.0, 0.5, 1.5]).unwrap();
        let scaled = n
            .state(raw.values().iter().map(|v| v / 4.0).collect())
            .unwrap();
        let (lo, hi) = g.bounds().unwrap();
        let fr = g.evaluate(&raw).unwrap();
        let fs = n.evaluate(&scaled).unwrap();
        for (a, b) in fr.iter().zip(&fs) {
            assert!(((a + 1.0 - lo) / (hi - lo + 2.0) - b).abs() < 1e-14);
        }
    }

    #[test]
    fn user_field_without_bounds_cannot_be_normalized() {
        let s = PopulationStructure::single(2).unwrap();
        let g = GameField::custom(
            s,
            Orientation::Maximize,
            Arc::new(|x: &[f64]| x.to_vec()),
            None,
            None,
        );
        assert!(matches!(normalize_game(&g), Err(Error::Normalization(_))));
    }

    #[test]
    fn average_payoffs() {
        let g = normalize_game(&hawk_dove()).unwrap();
        let avg = average_payoff(&g, &g.state(vec![0.9, 0.1]).unwrap()).unwrap();
        assert!((avg[0] - 0.276).abs() < 1e-15);

        let s = PopulationStructure::new(vec![0.5, 0.5], vec![2, 2]).unwrap();
        let c = GameField::linear(s, DMatrix::zeros(4, 4), DVector::from_element(4, 0.3)).unwrap();
        let avg = c
            .average_payoff(&c.state(vec![0.1, 0.4, 0.25, 0.25]).unwrap())
            .unwrap();
        assert_eq!(avg.len(), 2);
        assert!(avg.iter().all(|v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn structure_mismatch_is_reported() {
        let g = normalize_game(&hawk_dove()).unwrap();
        let other = Arc::new(PopulationStructure::single(3).unwrap());
        let x = State::barycenter(other);
        assert!(matches!(g.evaluate(&x), Err(Error::Dimension(_))));
    }
}
