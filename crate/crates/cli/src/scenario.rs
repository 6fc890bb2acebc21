//! Scenario files for `simulate`.
//!
//! ```json
//! {
//!   "game": {"kind": "bimatrix", "matrix": [[-1, 2], [0, 1]], "normalize": true},
//!   "dynamic": "replicator",
//!   "step_rule": {"kind": "ess_oracle", "target": [0.5, 0.5]},
//!   "init": [0.9, 0.1],
//!   "max_iters": 100000,
//!   "stop_tol": 1e-9,
//!   "target": [0.5, 0.5],
//!   "output": "trajectory.csv"
//! }
//! ```
//!
//! `init` may also be `"random_interior"`, drawn with `seed` (or `--seed`, which wins).

use std::path::{Path, PathBuf};
use std::sync::Arc;

use mwdyn::dynamics::{run_trajectory, Dynamic, StepRule, StopReason, TrajectoryConfig};
use mwdyn::game::{sample_interior, GameSpec};
use mwdyn::numfmt::sig17;
use serde::Deserialize;

use crate::{read_file, Context, InputError};

fn default_max_iters() -> usize {
    10_000
}

fn default_stop_tol() -> f64 {
    1e-9
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Init {
    State(Vec<f64>),
    Named(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    game: GameSpec,
    dynamic: Dynamic,
    step_rule: StepRule,
    init: Init,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_stop_tol")]
    stop_tol: f64,
    #[serde(default)]
    target: Option<Vec<f64>>,
    #[serde(default)]
    seed: Option<u64>,
    /// Relative paths resolve against the scenario file's directory.
    #[serde(default)]
    output: Option<PathBuf>,
}

pub fn simulate(ctx: &Context, path: &Path) -> Result<u8, InputError> {
    let scenario: Scenario = serde_json::from_str(&read_file(path)?)?;
    let game = scenario.game.build()?;
    let init = match scenario.init {
        Init::State(v) => game.state(v)?,
        Init::Named(name) if name == "random_interior" => {
            let seed = ctx.seed.or(scenario.seed).ok_or_else(|| {
                InputError(
                    "random_interior start needs a seed (scenario \"seed\" or --seed)".into(),
                )
            })?;
            let structure = Arc::clone(game.shared_structure());
            sample_interior(&structure, 1, seed).remove(0)
        }
        Init::Named(name) => return Err(InputError(format!("unknown init \"{name}\""))),
    };
    let target = scenario.target.map(|t| game.state(t)).transpose()?;
    let config = TrajectoryConfig {
        dynamic: scenario.dynamic,
        step_rule: scenario.step_rule,
        max_iters: scenario.max_iters,
        stop_tol: scenario.stop_tol,
        target,
    };
    let traj = run_trajectory(&game, &init, &config)?;

    let mut csv = Vec::new();
    traj.write_csv(&mut csv)?;
    let csv = String::from_utf8(csv)?;
    let destination = ctx.out.clone().or_else(|| {
        scenario
            .output
            .map(|o| path.parent().map_or(o.clone(), |dir| dir.join(&o)))
    });
    match &destination {
        Some(p) => crate::write_file(p, &csv)?,
        None => ctx.emit(&csv)?,
    }

    let (reason, code) = match traj.stop_reason {
        StopReason::Converged => ("converged", 0),
        StopReason::MaxIters => ("max_iters", 1),
        StopReason::StepRuleFailure => ("step_rule_failure", 3),
    };
    let last: Vec<String> = traj.last().values().iter().map(|&v| sig17(v)).collect();
    let mut line = format!(
        "final=[{}] stop_reason={reason} iterations={}",
        last.join(","),
        traj.transitions()
    );
    if let Some(e) = &traj.failure {
        line.push_str(&format!(" failure=\"{e}\""));
    }
    ctx.summary(&line, destination.is_none());
    Ok(code)
}
