//! Step-size rules.

use serde::{Deserialize, Serialize};

use crate::analysis::{g_excess, is_fixed_point, support_g_extremes};
use crate::error::{Error, Result};
use crate::game::{dot, GameField, Orientation, State};

pub const DEFAULT_ALPHA0: f64 = 1.0;
pub const DEFAULT_MAX_HALVINGS: u32 = 60;
pub const DEFAULT_ORACLE_SAFETY: f64 = 0.9;

/// Payoff spread below which a state counts as a fixed point for the line search.
const LINE_SEARCH_FIXED_TOL: f64 = 1e-14;

fn default_alpha0() -> f64 {
    DEFAULT_ALPHA0
}
fn default_max_halvings() -> u32 {
    DEFAULT_MAX_HALVINGS
}
fn default_safety() -> f64 {
    DEFAULT_ORACLE_SAFETY
}

/// A step-size policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepRule {
    Constant {
        alpha: f64,
    },
    /// `α_i = κ ω_i / (X_i·F_i(X))`.
    PerPopulation {
        kappa: f64,
    },
    /// Halving search on the Lyapunov surrogate `f̂(α) < 1`.
    LineSearch {
        #[serde(default = "default_alpha0")]
        alpha0: f64,
        #[serde(default = "default_max_halvings")]
        max_halvings: u32,
    },
    /// Safety fraction of the step bound computed from a known ESS.
    EssOracle {
        target: Vec<f64>,
        #[serde(default = "default_safety")]
        safety: f64,
    },
}

impl StepRule {
    pub fn line_search() -> Self {
        StepRule::LineSearch {
            alpha0: DEFAULT_ALPHA0,
            max_halvings: DEFAULT_MAX_HALVINGS,
        }
    }

    pub fn validate(&self, game: &GameField) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidStepRule(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        match self {
            StepRule::Constant { alpha } => positive("alpha", *alpha),
            StepRule::PerPopulation { kappa } => positive("kappa", *kappa),
            StepRule::LineSearch {
                alpha0,
                max_halvings,
            } => {
                positive("alpha0", *alpha0)?;
                if *max_halvings < 1 {
                    return Err(Error::InvalidStepRule(
                        "max_halvings must be at least 1".into(),
                    ));
                }
                Ok(())
            }
            StepRule::EssOracle { target, safety } => {
                if !(*safety > 0.0 && *safety < 1.0) {
                    return Err(Error::InvalidStepRule(format!(
                        "safety must lie in (0,1), got {safety}"
                    )));
                }
                game.state(target.clone())
                    .map(|_| ())
                    .map_err(|e| Error::InvalidStepRule(format!("oracle target: {e}")))
            }
        }
    }

    /// The rule's intrinsic rate when it has one.
    pub fn fixed_rates(&self, game: &GameField) -> Option<Vec<f64>> {
        match self {
            StepRule::Constant { alpha } => Some(super::maps::uniform_rates(game, *alpha)),
            _ => None,
        }
    }

    /// Per-population rates for a transition out of `state`.
    ///
    /// `support_tol` is the mass threshold defining the support used by the line search.
    pub fn rates(&self, game: &GameField, state: &State, support_tol: f64) -> Result<Vec<f64>> {
        match self {
            StepRule::Constant { alpha } => Ok(super::maps::uniform_rates(game, *alpha)),
            StepRule::PerPopulation { kappa } => per_population_rates(game, state, *kappa),
            StepRule::LineSearch {
                alpha0,
                max_halvings,
            } => {
                let a = line_search_rate(game, state, *alpha0, *max_halvings, support_tol)?;
                Ok(super::maps::uniform_rates(game, a))
            }
            StepRule::EssOracle { target, safety } => {
                let target = game.state(target.clone())?;
                let a = ess_oracle_rate(game, state, &target, *safety)?;
                Ok(super::maps::uniform_rates(game, a))
            }
        }
    }
}

/// One evaluation of the line-search surrogate at a candidate rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchTrial {
    pub alpha: f64,
    /// Kantorovich factor `g(α) = (½(G_min+G_max))² / (G_min G_max)`.
    pub g: f64,
    /// `ĥ(α) = (1 + (α/(1+α)) (X̂(α)−X)·F(X))⁻¹`.
    pub h_hat: f64,
    /// `f̂ = g · ĥ`.
    pub f_hat: f64,
    /// `f̂ < 1`, decided by comparing `g − 1` with `ĥ⁻¹ − 1` directly.
    pub accepted: bool,
}

/// Evaluates `f̂(α)` at `state`. `G` extremes run over strategies with mass above `support_tol`.
pub fn line_search_trial(
    game: &GameField,
    state: &State,
    alpha: f64,
    support_tol: f64,
) -> Result<LineSearchTrial> {
    let p = game.payoffs(state)?;
    let s = state.structure();
    let x = state.values();
    let (lo, hi) = support_g_extremes(state, &p, alpha, support_tol)?;
    let g_excess = g_excess(lo, hi);

    // (X̂ − X)·F(X) from X̂_j − X_j = X_j α (F_j − F̄_i) / (1 + α F̄_i), without cancellation
    let mut gain = 0.0;
    for (i, r) in s.blocks() {
        let avg = dot(&x[r.clone()], &p[r.clone()]) / s.mass(i);
        let denom = 1.0 + alpha * avg;
        if denom <= 0.0 {
            return Err(Error::Step {
                population: i,
                reason: format!("non-positive denominator {denom}"),
            });
        }
        for k in r {
            gain += x[k] * alpha * (p[k] - avg) / denom * p[k];
        }
    }
    let h_excess = alpha / (1.0 + alpha) * gain;
    let g = 1.0 + g_excess;
    let h_hat = 1.0 / (1.0 + h_excess);
    Ok(LineSearchTrial {
        alpha,
        g,
        h_hat,
        f_hat: g * h_hat,
        accepted: g_excess < h_excess,
    })
}

/// Halving line search: the first `α_k = α₀/2^k`, `k ≤ max_halvings`, with `f̂(α_k) < 1`.
pub fn line_search_rate(
    game: &GameField,
    state: &State,
    alpha0: f64,
    max_halvings: u32,
    support_tol: f64,
) -> Result<f64> {
    if is_fixed_point(game, state, LINE_SEARCH_FIXED_TOL)? {
        return Err(Error::FixedPoint);
    }
    let mut alpha = alpha0;
    for _ in 0..=max_halvings {
        if line_search_trial(game, state, alpha, support_tol)?.accepted {
            return Ok(alpha);
        }
        alpha *= 0.5;
    }
    Err(Error::LineSearchExhausted {
        halvings: max_halvings,
    })
}

/// Parts of the ESS-oracle bound, exposed for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBound {
    /// `(CX)_max − (CX)_min` over `supp(X)`.
    pub spread: f64,
    /// `X*·CX − X·CX`.
    pub superiority: f64,
    pub discriminant: f64,
    /// `−½ + √Δ / (½ spread²)`.
    pub bound: f64,
}

pub fn ess_oracle_bound(game: &GameField, state: &State, target: &State) -> Result<OracleBound> {
    if game.structure().num_populations() != 1 || game.orientation() != Orientation::Maximize {
        return Err(Error::OracleInapplicable(
            "needs a single-population payoff game".into(),
        ));
    }
    game.check(target)?;
    let f = game.payoffs(state)?;
    let x = state.values();
    let (lo, hi) = x
        .iter()
        .zip(&f)
        .filter(|(xj, _)| **xj > 0.0)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| {
            (lo.min(v), hi.max(v))
        });
    let spread = hi - lo;
    if !(spread > 0.0) {
        return Err(Error::OracleInapplicable(
            "zero payoff spread on the support".into(),
        ));
    }
    // (X* − X)·F(X) directly: the two products agree to O(δ²) near X*
    let superiority: f64 = target
        .values()
        .iter()
        .zip(x)
        .zip(&f)
        .map(|((t, xj), fj)| (t - xj) * fj)
        .sum();
    let s2 = spread * spread;
    let discriminant = s2 * s2 / 16.0 + superiority * s2;
    if !(superiority > 0.0) || !(discriminant > 0.0) {
        return Err(Error::OracleInapplicable(format!(
            "target is not superior at this state (X*·CX − X·CX = {superiority:e})"
        )));
    }
    let bound = -0.5 + discriminant.sqrt() / (0.5 * s2);
    Ok(OracleBound {
        spread,
        superiority,
        discriminant,
        bound,
    })
}

/// `safety` times the ESS-oracle step bound.
pub fn ess_oracle_rate(
    game: &GameField,
    state: &State,
    target: &State,
    safety: f64,
) -> Result<f64> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidStepRule(format!(
            "safety must lie in (0,1), got {safety}"
        )));
    }
    Ok(safety * ess_oracle_bound(game, state, target)?.bound)
}

/// `α_i = κ ω_i / (X_i·F_i(X))`.
pub fn per_population_rates(game: &GameField, state: &State, kappa: f64) -> Result<Vec<f64>> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::Rate(format!("kappa must be positive, got {kappa}")));
    }
    if game.orientation() != Orientation::Maximize {
        return Err(Error::Rate(
            "per-population rates need positive payoffs (maximize orientation)".into(),
        ));
    }
    let f = game.evaluate(state)?;
    let s = state.structure();
    s.blocks()
        .map(|(i, r)| {
            let total = dot(&state.values()[r.clone()], &f[r]);
            if total > 0.0 {
                Ok(kappa * s.mass(i) / total)
            } else {
                Err(Error::Rate(format!(
                    "population {i} has average payoff {total}"
                )))
            }
        })
        .collect()
}
