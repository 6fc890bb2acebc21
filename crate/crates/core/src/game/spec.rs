//! JSON game definitions.
//!
//! ```json
//! {"kind": "bimatrix", "matrix": [[-1, 2], [0, 1]], "normalize": true}
//! {"kind": "qp", "matrix": [[1, 0], [0, 1]]}
//! {"kind": "linear", "masses": [0.5, 0.5], "strategy_counts": [2, 2], "matrix": [[...]], "offset": [...]}
//! {"kind": "parallel_links", "offsets": [0, 0], "slopes": [1, 10], "demand": 1}
//! {"kind": "congestion", "links": [[0, 1], [2, 0.5]], "commodities": [{"demand": 1, "paths": [[0], [1]]}]}
//! ```
//!
//! Congestion links are polynomial coefficient lists `[a0, a1, ...]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::{
    congestion_game, linear_symmetric_game, normalize_game, standard_qp_game, GameField,
};
use super::network::{Commodity, CongestionNetwork, LinkCost};
use super::simplotope::PopulationStructure;
use crate::error::{Error, Result};

fn default_demand() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GameSpec {
    Bimatrix {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        normalize: bool,
    },
    Qp {
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        normalize: bool,
    },
    Linear {
        masses: Vec<f64>,
        strategy_counts: Vec<usize>,
        matrix: Vec<Vec<f64>>,
        #[serde(default)]
        offset: Option<Vec<f64>>,
        #[serde(default)]
        normalize: bool,
    },
    ParallelLinks {
        offsets: Vec<f64>,
        slopes: Vec<f64>,
        #[serde(default = "default_demand")]
        demand: f64,
        #[serde(default)]
        normalize: bool,
    },
    Congestion {
        links: Vec<Vec<f64>>,
        commodities: Vec<Commodity>,
        #[serde(default)]
        normalize: bool,
    },
}

fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

impl GameSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Model(format!("invalid game JSON: {e}")))
    }

    fn wants_normalization(&self) -> bool {
        match self {
            GameSpec::Bimatrix { normalize, .. }
            | GameSpec::Qp { normalize, .. }
            | GameSpec::Linear { normalize, .. }
            | GameSpec::ParallelLinks { normalize, .. }
            | GameSpec::Congestion { normalize, .. } => *normalize,
        }
    }

    /// Underlying network for routing families.
    pub fn network(&self) -> Result<Option<CongestionNetwork>> {
        match self {
            GameSpec::ParallelLinks {
                offsets,
                slopes,
                demand,
                ..
            } => {
                if offsets.len() != slopes.len() {
                    return Err(Error::Dimension(format!(
                        "{} offsets but {} slopes",
                        offsets.len(),
                        slopes.len()
                    )));
                }
                let links = offsets
                    .iter()
                    .zip(slopes)
                    .map(|(&r, &s)| LinkCost::affine(r, s))
                    .collect::<Result<Vec<_>>>()?;
                CongestionNetwork::parallel(links, *demand).map(Some)
            }
            GameSpec::Congestion {
                links, commodities, ..
            } => {
                let links = links
                    .iter()
                    .map(|c| LinkCost::new(c.clone()))
                    .collect::<Result<Vec<_>>>()?;
                CongestionNetwork::new(links, commodities.clone()).map(Some)
            }
            _ => Ok(None),
        }
    }

    pub fn build(&self) -> Result<GameField> {
        let game = match self {
            GameSpec::Bimatrix { matrix, .. } => linear_symmetric_game(matrix_from_rows(matrix)?)?,
            GameSpec::Qp { matrix, .. } => standard_qp_game(matrix_from_rows(matrix)?)?,
            GameSpec::Linear {
                masses,
                strategy_counts,
                matrix,
                offset,
                ..
            } => {
                let s = PopulationStructure::new(masses.clone(), strategy_counts.clone())?;
                let m = s.dim();
                let offset = match offset {
                    Some(o) => DVector::from_column_slice(o),
                    None => DVector::zeros(m),
                };
                GameField::linear(s, matrix_from_rows(matrix)?, offset)?
            }
            GameSpec::ParallelLinks { .. } | GameSpec::Congestion { .. } => {
                congestion_game(self.network()?.expect("routing family has a network"))?
            }
        };
        if self.wants_normalization() {
            normalize_game(&game)
        } else {
            Ok(game)
        }
    }
}
