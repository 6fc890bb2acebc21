//! Relative entropy as a Lyapunov function, and the bounds used to control its first difference.

use nalgebra::{DMatrix, DVector};

use crate::dynamics::{step, Dynamic};
use crate::error::{Error, Result};
use crate::game::{dot, GameField, State};

/// `RE(P, Q) = Σ P_i ln(P_i / Q_i)` with the conventions `0 ln 0 = 0`, `0/0 = 1`.
pub fn relative_entropy(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension(format!(
            "{} vs {} entries",
            p.len(),
            q.len()
        )));
    }
    let mut total = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi < 0.0 || qi < 0.0 {
            return Err(Error::Domain(format!("negative entry at {i}")));
        }
        if pi > 0.0 {
            if qi == 0.0 {
                return Err(Error::Support(format!(
                    "P has mass at {i} where Q has none"
                )));
            }
            total += pi * (pi / qi).ln();
        }
    }
    Ok(total)
}

/// `V(T(X)) − V(X)` for `V = RE(target, ·)`.
///
/// Evaluated as `Σ X*_j ln(X_j / X̂_j)`, which avoids cancelling the two entropies.
pub fn lyapunov_first_difference(
    game: &GameField,
    state: &State,
    target: &State,
    rates: &[f64],
    dynamic: Dynamic,
) -> Result<f64> {
    game.check(target)?;
    let x = state.values();
    let t = target.values();
    if let Some(j) = (0..x.len()).find(|&j| t[j] > 0.0 && x[j] == 0.0) {
        return Err(Error::Support(format!(
            "target uses strategy {j} outside the state's support"
        )));
    }
    let y = step(dynamic, game, state, rates)?;
    let y = y.values();
    Ok((0..x.len())
        .filter(|&j| t[j] > 0.0)
        .map(|j| t[j] * (x[j] / y[j]).ln())
        .sum())
}

/// Both sides of the Kantorovich inequality `(Σλx)(Σλ/x) ≤ (½(x_min+x_max))² / (x_min x_max)`.
///
/// Extremes are taken over values carrying positive weight.
pub fn kantorovich_bound(values: &[f64], weights: &[f64]) -> Result<(f64, f64)> {
    if values.len() != weights.len() || values.is_empty() {
        return Err(Error::Dimension(format!(
            "{} values, {} weights",
            values.len(),
            weights.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::Domain(format!("values must be positive, got {v}")));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Domain("weights must be nonnegative".into()));
    }
    let wsum: f64 = weights.iter().sum();
    if (wsum - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("weights sum to {wsum}")));
    }
    let mut mean = 0.0;
    let mut inv_mean = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&x, &w) in values.iter().zip(weights) {
        if w > 0.0 {
            mean += w * x;
            inv_mean += w / x;
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    let rhs = (0.5 * (lo + hi)).powi(2) / (lo * hi);
    Ok((mean * inv_mean, rhs))
}

/// Growth factors `G_ij = (1 + α F_i^j) / (1 + α (1/ω_i) X_i·F_i)` of the replicator.
pub fn growth_factors(game: &GameField, state: &State, alpha: f64) -> Result<Vec<f64>> {
    let p = game.payoffs(state)?;
    Ok(growth_excess(state, &p, alpha)?
        .into_iter()
        .map(|e| 1.0 + e)
        .collect())
}

/// `G_ij − 1 = α (F_i^j − F̄_i) / (1 + α F̄_i)`, formed without subtracting values near one.
fn growth_excess(state: &State, p: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let s = state.structure();
    let x = state.values();
    let mut out = vec![0.0; x.len()];
    for (i, r) in s.blocks() {
        let avg = dot(&x[r.clone()], &p[r.clone()]) / s.mass(i);
        let denom = 1.0 + alpha * avg;
        if denom <= 0.0 {
            return Err(Error::Domain(format!(
                "population {i}: non-positive replicator denominator"
            )));
        }
        for k in r {
            out[k] = alpha * (p[k] - avg) / denom;
        }
    }
    Ok(out)
}

/// Extremes `(G_min − 1, G_max − 1)` over strategies whose mass exceeds `support_tol`.
pub(crate) fn support_g_extremes(
    state: &State,
    p: &[f64],
    alpha: f64,
    support_tol: f64,
) -> Result<(f64, f64)> {
    let e = growth_excess(state, p, alpha)?;
    let (lo, hi) = state
        .values()
        .iter()
        .zip(&e)
        .filter(|(x, _)| **x > support_tol)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, &v)| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        return Err(Error::Domain("empty support".into()));
    }
    if 1.0 + lo <= 0.0 {
        return Err(Error::Domain(format!(
            "non-positive growth factor {}",
            1.0 + lo
        )));
    }
    Ok((lo, hi))
}

/// `g − 1 = (G_max − G_min)² / (4 G_min G_max)` from the excess extremes.
pub(crate) fn g_excess(lo: f64, hi: f64) -> f64 {
    (hi - lo).powi(2) / (4.0 * (1.0 + lo) * (1.0 + hi))
}

/// Kantorovich factor `g(α) = (½(G_min+G_max))² / (G_min G_max)` over the support of `state`.
pub fn g_factor(game: &GameField, state: &State, alpha: f64) -> Result<f64> {
    let p = game.payoffs(state)?;
    let (lo, hi) = support_g_extremes(state, &p, alpha, 0.0)?;
    Ok(1.0 + g_excess(lo, hi))
}

/// `Σ_ij X*_i^j G_ij(X)` at a uniform rate; exceeds `Σω_i` when `X*` is superior to `X`.
pub fn target_growth(game: &GameField, state: &State, target: &State, alpha: f64) -> Result<f64> {
    game.check(target)?;
    let g = growth_factors(game, state, alpha)?;
    Ok(dot(target.values(), &g))
}

/// Replicator response of `p` to an opponent mix `q` in the symmetric game `(C, Cᵀ)`:
/// `P̂_i = P_i (1 + α (CQ)_i) / (1 + α P·CQ)`.
pub fn matrix_response(c: &DMatrix<f64>, p: &[f64], q: &[f64], alpha: f64) -> Result<Vec<f64>> {
    let n = c.nrows();
    if c.ncols() != n || p.len() != n || q.len() != n {
        return Err(Error::Dimension(
            "matrix response needs an n×n matrix and two length-n mixes".into(),
        ));
    }
    let cq = c * DVector::from_column_slice(q);
    let denom = 1.0 + alpha * dot(p, cq.as_slice());
    Ok(p.iter()
        .zip(cq.iter())
        .map(|(pi, v)| pi * (1.0 + alpha * v) / denom)
        .collect())
}

/// Realized entropy change and its upper bound for the matrix response:
/// `RE(P*, P̂) − RE(P*, P) ≤ Σ P*(i) / G_i(P, Q) − 1`.
pub fn response_entropy_bound(
    c: &DMatrix<f64>,
    p_star: &[f64],
    p: &[f64],
    q: &[f64],
    alpha: f64,
) -> Result<(f64, f64)> {
    if let Some(i) = (0..p.len()).find(|&i| p_star.get(i).is_some_and(|&s| s > 0.0) && p[i] == 0.0)
    {
        return Err(Error::Support(format!(
            "P* has mass at {i} outside supp(P)"
        )));
    }
    let p_hat = matrix_response(c, p, q, alpha)?;
    let mut realized = 0.0;
    let mut bound = -1.0;
    for i in 0..p.len() {
        if p_star[i] > 0.0 {
            let g = p_hat[i] / p[i];
            realized += p_star[i] * (1.0 / g).ln();
            bound += p_star[i] / g;
        }
    }
    Ok((realized, bound))
}
