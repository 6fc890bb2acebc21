//! Fixed-point, Nash and sampled ESS classification of candidate states.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{dot, GameField, State};

/// Default tolerance of [`is_fixed_point`] and [`is_nash`].
pub const DEFAULT_TOL: f64 = 1e-9;

/// Superiority `(X* − X)·F(X)` must exceed this for a sample to count as certified.
pub const ESS_MARGIN: f64 = 1e-12;

/// Per-population spread of supported payoffs and the largest gain from an unsupported strategy.
fn support_gaps(game: &GameField, state: &State) -> Result<(f64, f64)> {
    let p = game.payoffs(state)?;
    let x = state.values();
    let mut spread: f64 = 0.0;
    let mut gain = f64::NEG_INFINITY;
    for (_, r) in state.structure().blocks() {
        let (lo, hi) = r
            .clone()
            .filter(|&k| x[k] > 0.0)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| {
                (lo.min(p[k]), hi.max(p[k]))
            });
        spread = spread.max(hi - lo);
        for k in r.filter(|&k| x[k] == 0.0) {
            gain = gain.max(p[k] - hi);
        }
    }
    Ok((spread, gain))
}

/// Fixed point of both maps: supported payoffs are constant within each population.
pub fn is_fixed_point(game: &GameField, state: &State, tol: f64) -> Result<bool> {
    Ok(support_gaps(game, state)?.0 <= tol)
}

/// Nash: a fixed point where no unsupported strategy does better than the supported ones.
pub fn is_nash(game: &GameField, state: &State, tol: f64) -> Result<bool> {
    let (spread, gain) = support_gaps(game, state)?;
    Ok(spread <= tol && gain <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub enum EssVerdict {
    /// Every sample was strictly inferior to the candidate; `min_superiority` is the weakest margin.
    CertifiedOnSamples {
        samples: usize,
        min_superiority: f64,
    },
    /// A sampled state the candidate fails to beat by more than [`ESS_MARGIN`].
    Refuted { witness: Vec<f64>, superiority: f64 },
    /// The candidate is not a Nash equilibrium.
    Inapplicable,
}

impl EssVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            EssVerdict::CertifiedOnSamples { .. } => "certified",
            EssVerdict::Refuted { .. } => "refuted",
            EssVerdict::Inapplicable => "inapplicable",
        }
    }
}

/// `(X* − X)·F(X)` in the payoff orientation.
pub fn superiority(game: &GameField, candidate: &State, x: &State) -> Result<f64> {
    let p = game.payoffs(x)?;
    let diff: Vec<f64> = candidate
        .values()
        .iter()
        .zip(x.values())
        .map(|(a, b)| a - b)
        .collect();
    Ok(dot(&diff, &p))
}

/// Draws states uniformly from the Euclidean ball of `radius` around `center`, intersected
/// with the simplotope.
///
/// Directions are isotropic in the tangent space (Gaussian, block means removed), radii
/// follow `r·U^{1/d}`, and draws leaving the nonnegative orthant are rejected.
pub fn sample_ball(center: &State, radius: f64, n_samples: usize, seed: u64) -> Result<Vec<State>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    let s = center.structure();
    let d: usize = s.strategy_counts().iter().map(|m| m - 1).sum();
    if d == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 1000 * n_samples.max(1) + 10_000;
    let mut out = Vec::with_capacity(n_samples);
    let mut z = vec![0.0; center.dim()];
    for _ in 0..max_attempts {
        if out.len() == n_samples {
            break;
        }
        for (_, r) in s.blocks() {
            let len = r.len() as f64;
            z[r.clone()]
                .iter_mut()
                .for_each(|v| *v = rng.sample(StandardNormal));
            let mean = z[r.clone()].iter().sum::<f64>() / len;
            z[r].iter_mut().for_each(|v| *v -= mean);
        }
        let norm = dot(&z, &z).sqrt();
        let u: f64 = rng.random();
        if norm == 0.0 || u == 0.0 {
            continue;
        }
        let scale = radius * u.powf(1.0 / d as f64) / norm;
        let x: Vec<f64> = center
            .values()
            .iter()
            .zip(&z)
            .map(|(c, v)| c + scale * v)
            .collect();
        if x.iter().all(|v| *v >= 0.0) {
            out.push(State::from_parts(center.shared_structure().clone(), x));
        }
    }
    if out.len() < n_samples {
        return Err(Error::Domain(format!(
            "only {} of {n_samples} samples landed in the simplotope",
            out.len()
        )));
    }
    Ok(out)
}

/// Sampled evolutionary-stability check of `candidate`.
///
/// The witness of a refutation is the sample with the smallest superiority, so it is
/// non-positive whenever any sample is.
pub fn ess_certificate_sample(
    game: &GameField,
    candidate: &State,
    radius: f64,
    n_samples: usize,
    seed: u64,
) -> Result<EssVerdict> {
    if !(radius > 0.0) {
        return Err(Error::Domain(format!(
            "radius must be positive, got {radius}"
        )));
    }
    game.check(candidate)?;
    if !is_nash(game, candidate, DEFAULT_TOL)? {
        return Ok(EssVerdict::Inapplicable);
    }
    let mut worst: Option<(f64, State)> = None;
    for x in sample_ball(candidate, radius, n_samples, seed)? {
        if x.max_abs_diff(candidate) == 0.0 {
            continue;
        }
        let s = superiority(game, candidate, &x)?;
        if worst.as_ref().is_none_or(|(w, _)| s < *w) {
            worst = Some((s, x));
        }
    }
    Ok(match worst {
        Some((s, x)) if s <= ESS_MARGIN => EssVerdict::Refuted {
            witness: x.into_values(),
            superiority: s,
        },
        Some((s, _)) => EssVerdict::CertifiedOnSamples {
            samples: n_samples,
            min_superiority: s,
        },
        None => EssVerdict::CertifiedOnSamples {
            samples: 0,
            min_superiority: f64::INFINITY,
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub is_fixed_point: bool,
    pub is_nash: bool,
    pub ess_verdict: EssVerdict,
    pub residuals: BTreeMap<String, f64>,
}

impl Serialize for ClassificationReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Wire<'a> {
            fixed_point: bool,
            nash: bool,
            ess: &'static str,
            #[serde(skip_serializing_if = "Option::is_none")]
            witness: Option<&'a [f64]>,
            residuals: &'a BTreeMap<String, f64>,
        }
        let witness = match &self.ess_verdict {
            EssVerdict::Refuted { witness, .. } => Some(witness.as_slice()),
            _ => None,
        };
        Wire {
            fixed_point: self.is_fixed_point,
            nash: self.is_nash,
            ess: self.ess_verdict.label(),
            witness,
            residuals: &self.residuals,
        }
        .serialize(serializer)
    }
}

/// Runs every test on `candidate`.
///
/// Residuals: `payoff_spread` (largest supported spread), `nash_gain` (largest advantage of
/// an unsupported strategy, present only when one exists) and `min_superiority` (weakest
/// sampled margin, present when sampling ran).
pub fn classify(
    game: &GameField,
    candidate: &State,
    radius: f64,
    n_samples: usize,
    seed: u64,
    tol: f64,
) -> Result<ClassificationReport> {
    game.check(candidate)?;
    let (spread, gain) = support_gaps(game, candidate)?;
    let ess_verdict = ess_certificate_sample(game, candidate, radius, n_samples, seed)?;
    let mut residuals = BTreeMap::new();
    residuals.insert("payoff_spread".to_string(), spread);
    if gain.is_finite() {
        residuals.insert("nash_gain".to_string(), gain);
    }
    match &ess_verdict {
        EssVerdict::CertifiedOnSamples {
            min_superiority, ..
        } if min_superiority.is_finite() => {
            residuals.insert("min_superiority".to_string(), *min_superiority);
        }
        EssVerdict::Refuted { superiority, .. } => {
            residuals.insert("min_superiority".to_string(), *superiority);
        }
        _ => {}
    }
    Ok(ClassificationReport {
        is_fixed_point: spread <= tol,
        is_nash: spread <= tol && gain <= tol,
        ess_verdict,
        residuals,
    })
}
