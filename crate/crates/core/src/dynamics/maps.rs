//! The two multiplicative-weights maps and the continuous-time reference field.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{dot, GameField, State};

/// Largest exponent magnitude accepted by the Hedge map.
pub const HEDGE_EXPONENT_LIMIT: f64 = 700.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dynamic {
    /// Discrete-time replicator: `X ∝ X (1 + αF)`.
    Replicator,
    /// Exponential weights: `X ∝ X exp(αF)`.
    Hedge,
}

/// The same rate for every population.
pub fn uniform_rates(game: &GameField, alpha: f64) -> Vec<f64> {
    vec![alpha; game.structure().num_populations()]
}

fn check_rates(game: &GameField, rates: &[f64]) -> Result<()> {
    let n = game.structure().num_populations();
    if rates.len() != n {
        return Err(Error::Dimension(format!(
            "{} rates for {n} populations",
            rates.len()
        )));
    }
    if let Some((i, a)) = rates
        .iter()
        .enumerate()
        .find(|(_, a)| !(**a >= 0.0 && a.is_finite()))
    {
        return Err(Error::Rate(format!("population {i} has rate {a}")));
    }
    Ok(())
}

/// One step of the general discrete-time replicator
/// `X̂_i^j = X_i^j (1 + α_i F_i^j) / (1 + α_i (1/ω_i) X_i·F_i)`.
///
/// Under cost orientation `F` is replaced by `-c`.
pub fn replicator_step(game: &GameField, state: &State, rates: &[f64]) -> Result<State> {
    check_rates(game, rates)?;
    let p = game.payoffs(state)?;
    replicator_from_payoffs(state, &p, rates)
}

fn replicator_from_payoffs(state: &State, p: &[f64], rates: &[f64]) -> Result<State> {
    let s = state.structure();
    let x = state.values();
    let mut out = vec![0.0; x.len()];
    for (i, r) in s.blocks() {
        let alpha = rates[i];
        let avg = dot(&x[r.clone()], &p[r.clone()]) / s.mass(i);
        let denom = 1.0 + alpha * avg;
        if denom <= 0.0 {
            return Err(Error::Step {
                population: i,
                reason: format!("non-positive denominator {denom}"),
            });
        }
        for k in r {
            if x[k] > 0.0 {
                let num = 1.0 + alpha * p[k];
                if num <= 0.0 {
                    return Err(Error::Step {
                        population: i,
                        reason: format!("rate {alpha} drives strategy {k} out of the simplex"),
                    });
                }
                out[k] = x[k] * num / denom;
            }
        }
    }
    Ok(State::from_parts(state.shared_structure().clone(), out))
}

/// One step of Hedge `X̂_i^j = X_i^j exp(α_i F_i^j) / ((1/ω_i) Σ_k X_i^k exp(α_i F_i^k))`.
pub fn hedge_step(game: &GameField, state: &State, rates: &[f64]) -> Result<State> {
    check_rates(game, rates)?;
    let p = game.payoffs(state)?;
    hedge_from_payoffs(state, &p, rates)
}

fn hedge_from_payoffs(state: &State, p: &[f64], rates: &[f64]) -> Result<State> {
    let s = state.structure();
    let x = state.values();
    let mut out = vec![0.0; x.len()];
    for (i, r) in s.blocks() {
        let alpha = rates[i];
        let mut top = f64::NEG_INFINITY;
        for k in r.clone().filter(|&k| x[k] > 0.0) {
            let e = alpha * p[k];
            if e.abs() > HEDGE_EXPONENT_LIMIT {
                return Err(Error::Step {
                    population: i,
                    reason: format!("exponent {e} overflows"),
                });
            }
            top = top.max(e);
        }
        // shift by the largest exponent; the normalization cancels it
        let mut total = 0.0;
        for k in r.clone().filter(|&k| x[k] > 0.0) {
            out[k] = x[k] * (alpha * p[k] - top).exp();
            total += out[k];
        }
        let factor = s.mass(i) / total;
        out[r].iter_mut().for_each(|v| *v *= factor);
    }
    Ok(State::from_parts(state.shared_structure().clone(), out))
}

pub fn step(dynamic: Dynamic, game: &GameField, state: &State, rates: &[f64]) -> Result<State> {
    match dynamic {
        Dynamic::Replicator => replicator_step(game, state, rates),
        Dynamic::Hedge => hedge_step(game, state, rates),
    }
}

/// Continuous-time replicator field `X_i^j (F_i^j − (1/ω_i) X_i·F_i)` (sign flipped for costs).
pub fn replicator_vector_field(game: &GameField, state: &State) -> Result<Vec<f64>> {
    let p = game.payoffs(state)?;
    let s = state.structure();
    let x = state.values();
    let mut out = vec![0.0; x.len()];
    for (i, r) in s.blocks() {
        let avg = dot(&x[r.clone()], &p[r.clone()]) / s.mass(i);
        for k in r {
            out[k] = x[k] * (p[k] - avg);
        }
    }
    Ok(out)
}
