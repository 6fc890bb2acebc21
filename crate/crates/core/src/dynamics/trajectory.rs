//! The trajectory engine and its CSV export.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use super::maps::{step, uniform_rates, Dynamic};
use super::rates::StepRule;
use crate::analysis::relative_entropy;
use crate::error::{Error, Result};
use crate::game::{GameField, State};
use crate::numfmt::sig17;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIters,
    StepRuleFailure,
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub dynamic: Dynamic,
    pub step_rule: StepRule,
    pub max_iters: usize,
    pub stop_tol: f64,
    /// Lyapunov target `X*`; `RE(X*, X_k)` is logged for every iterate when set.
    pub target: Option<State>,
}

/// Per-transition record.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub rates: Vec<f64>,
    /// `‖X_{k+1} − X_k‖∞`.
    pub residual: f64,
    /// `(1/ω_i) X_i·F_i` at the state the step leaves.
    pub average_payoffs: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub iterates: Vec<State>,
    /// Largest per-population rate of each transition.
    pub step_sizes: Vec<f64>,
    pub steps: Vec<StepRecord>,
    /// `RE(target, X_k)` per iterate, when a target was configured.
    pub lyapunov: Vec<Option<f64>>,
    pub stop_reason: StopReason,
    /// The error that ended the run under [`StopReason::StepRuleFailure`].
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn last(&self) -> &State {
        self.iterates
            .last()
            .expect("trajectory holds its initial state")
    }

    pub fn transitions(&self) -> usize {
        self.step_sizes.len()
    }

    /// CSV with columns `iter, x_0..x_{m−1}, alpha, residual, lyapunov`.
    ///
    /// Row `k` holds iterate `k` and the transition leaving it; the last row has empty
    /// `alpha` and `residual`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let m = self.iterates[0].dim();
        let mut header = vec!["iter".to_string()];
        header.extend((0..m).map(|j| format!("x_{j}")));
        header.extend(["alpha", "residual", "lyapunov"].map(String::from));
        writeln!(w, "{}", header.join(","))?;
        for (k, x) in self.iterates.iter().enumerate() {
            let mut row = vec![k.to_string()];
            row.extend(x.values().iter().map(|&v| sig17(v)));
            match self.steps.get(k) {
                Some(s) => {
                    row.push(sig17(self.step_sizes[k]));
                    row.push(sig17(s.residual));
                }
                None => {
                    row.push(String::new());
                    row.push(String::new());
                }
            }
            row.push(self.lyapunov[k].map(sig17).unwrap_or_default());
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn lyapunov(target: Option<&State>, x: &State) -> Option<f64> {
    target.and_then(|t| relative_entropy(t.values(), x.values()).ok())
}

/// Iterates `dynamic` from `init` until the fixed-point residual drops below `stop_tol`,
/// `max_iters` transitions were taken, or the step rule fails.
///
/// The residual is `‖T(X) − X‖∞` at the rule's own rate for constant rules and at the
/// probe rate `α = 1` otherwise.
pub fn run_trajectory(
    game: &GameField,
    init: &State,
    config: &TrajectoryConfig,
) -> Result<Trajectory> {
    if !(config.stop_tol > 0.0) {
        return Err(Error::Domain(format!(
            "stop_tol must be positive, got {}",
            config.stop_tol
        )));
    }
    game.check(init)?;
    config.step_rule.validate(game)?;
    if let Some(t) = &config.target {
        game.check(t)?;
    }
    let target = config.target.as_ref();
    let probe_rates = config
        .step_rule
        .fixed_rates(game)
        .unwrap_or_else(|| uniform_rates(game, 1.0));

    let mut traj = Trajectory {
        iterates: vec![init.clone()],
        step_sizes: Vec::new(),
        steps: Vec::new(),
        lyapunov: vec![lyapunov(target, init)],
        stop_reason: StopReason::MaxIters,
        failure: None,
    };
    let converged = |x: &State| {
        step(config.dynamic, game, x, &probe_rates)
            .map(|y| y.max_abs_diff(x) < config.stop_tol)
            .unwrap_or(false)
    };

    let mut x = init.clone();
    for _ in 0..config.max_iters {
        if converged(&x) {
            traj.stop_reason = StopReason::Converged;
            return Ok(traj);
        }
        let next = config
            .step_rule
            .rates(game, &x, config.stop_tol)
            .and_then(|rates| step(config.dynamic, game, &x, &rates).map(|y| (rates, y)));
        let (rates, y) = match next {
            Ok(v) => v,
            Err(e) => {
                traj.stop_reason = StopReason::StepRuleFailure;
                traj.failure = Some(e);
                return Ok(traj);
            }
        };
        let record = StepRecord {
            residual: y.max_abs_diff(&x),
            average_payoffs: game.average_payoff(&x)?,
            rates,
        };
        traj.step_sizes
            .push(record.rates.iter().cloned().fold(0.0, f64::max));
        traj.steps.push(record);
        traj.lyapunov.push(lyapunov(target, &y));
        traj.iterates.push(y.clone());
        x = y;
    }
    if converged(&x) {
        traj.stop_reason = StopReason::Converged;
    }
    Ok(traj)
}
