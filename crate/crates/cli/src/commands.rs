//! The analysis subcommands: routing report, chaos scan, classification and dominance.

use std::path::Path;
use std::sync::Arc;

use mwdyn::analysis::classify;
use mwdyn::game::{sample_interior, CongestionNetwork, GameSpec, PopulationStructure};
use mwdyn::routing::{
    analyze_routing as routing_report, chaos_scan as scan, invades, invasion_barrier,
    is_incrementally_deployable, wardrop_parallel_affine, write_chaos_csv, ParallelLinkSystem,
};
use serde::{Deserialize, Serialize};

use crate::{read_file, Context, InputError};

fn default_demand() -> f64 {
    1.0
}

/// A parallel-link system, either bare or as a `parallel_links` game spec.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemFile {
    #[serde(default)]
    kind: Option<String>,
    offsets: Vec<f64>,
    slopes: Vec<f64>,
    #[serde(default = "default_demand")]
    demand: f64,
    #[serde(default)]
    #[allow(dead_code)]
    normalize: bool,
}

fn load_system(path: &Path) -> Result<ParallelLinkSystem, InputError> {
    let file: SystemFile = serde_json::from_str(&read_file(path)?)?;
    if let Some(kind) = file.kind.as_deref().filter(|k| *k != "parallel_links") {
        return Err(InputError(format!(
            "expected a parallel_links system, got kind \"{kind}\""
        )));
    }
    Ok(ParallelLinkSystem::new(
        file.offsets,
        file.slopes,
        file.demand,
    )?)
}

fn to_json<T: Serialize>(value: &T) -> Result<String, InputError> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

pub fn analyze_routing(
    ctx: &Context,
    path: &Path,
    alpha: f64,
    grid: usize,
    tol: f64,
) -> Result<(), InputError> {
    let system = load_system(path)?;
    let report = routing_report(&system, alpha, grid, tol)?;
    ctx.emit(&to_json(&report)?)
}

/// `start:stop:count`, inclusive of both ends.
pub fn parse_range(spec: &str) -> Result<Vec<f64>, InputError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts.as_slice() else {
        return Err(InputError(format!(
            "alpha range \"{spec}\" is not start:stop:count"
        )));
    };
    let (start, stop): (f64, f64) = (start.trim().parse()?, stop.trim().parse()?);
    let count: usize = count.trim().parse()?;
    if !(start.is_finite() && stop.is_finite()) || count == 0 {
        return Err(InputError(format!(
            "alpha range \"{spec}\" must be finite with a positive count"
        )));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    Ok((0..count)
        .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
        .collect())
}

pub fn chaos_scan(
    ctx: &Context,
    path: &Path,
    alphas: &[f64],
    max_period: usize,
    grid: usize,
    tol: f64,
) -> Result<(), InputError> {
    let system = load_system(path)?;
    if system.num_links() != 2 {
        return Err(InputError(format!(
            "chaos scan needs exactly two links, got {}",
            system.num_links()
        )));
    }
    let rows = scan(&system, alphas, max_period, grid, tol)?;
    let mut csv = Vec::new();
    write_chaos_csv(&rows, &mut csv)?;
    ctx.emit(&String::from_utf8(csv)?)
}

pub fn verify(
    ctx: &Context,
    path: &Path,
    candidate: Vec<f64>,
    radius: f64,
    samples: usize,
    tol: f64,
) -> Result<(), InputError> {
    let seed = ctx.require_seed("ESS sampling")?;
    let game = GameSpec::from_json(&read_file(path)?)?.build()?;
    let candidate = game.state(candidate)?;
    let report = classify(&game, &candidate, radius, samples, seed, tol)?;
    ctx.emit(&to_json(&report)?)
}

#[derive(Debug, Serialize)]
struct PairReport {
    delta0: f64,
    /// One when the barrier is infinite.
    barrier: f64,
    dominant: bool,
    deployable: bool,
}

#[derive(Debug, Serialize)]
struct BatchReport {
    n: usize,
    dominant: usize,
    deployable: usize,
    /// Opponents `x` fails to dominate.
    counterexamples: usize,
    /// Pairs where dominance and deployability disagree.
    disagreements: usize,
    pairs: Vec<PairReport>,
}

fn parse_flow(text: &str) -> Result<Vec<f64>, InputError> {
    text.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(InputError::from))
        .collect()
}

fn compare(
    network: &CongestionNetwork,
    x: &[f64],
    y: &[f64],
    grid: usize,
) -> Result<PairReport, InputError> {
    let barrier = invasion_barrier(network, y, x, grid)?;
    let delta0: f64 = {
        let costs = network.path_costs(x);
        x.iter()
            .zip(y)
            .zip(&costs)
            .map(|((a, b), c)| (a - b) * c)
            .sum()
    };
    debug_assert_eq!(barrier.is_infinite(), !invades(network, y, x)?);
    Ok(PairReport {
        delta0,
        barrier: barrier.value(),
        dominant: barrier.is_infinite(),
        deployable: is_incrementally_deployable(network, x, y, grid)?,
    })
}

pub fn dominance(
    ctx: &Context,
    path: &Path,
    x: &str,
    y: Option<&str>,
    random: Option<usize>,
    grid: usize,
) -> Result<(), InputError> {
    let spec = GameSpec::from_json(&read_file(path)?)?;
    let network = spec.network()?.ok_or_else(|| {
        InputError("dominance needs a parallel_links or congestion network".into())
    })?;
    let x = if x.trim() == "wardrop" {
        let GameSpec::ParallelLinks {
            offsets,
            slopes,
            demand,
            ..
        } = &spec
        else {
            return Err(InputError(
                "\"wardrop\" is available for parallel_links networks only".into(),
            ));
        };
        wardrop_parallel_affine(&ParallelLinkSystem::new(
            offsets.clone(),
            slopes.clone(),
            *demand,
        )?)
        .flows
    } else {
        parse_flow(x)?
    };

    let json = match (y, random) {
        (Some(y), _) => to_json(&compare(&network, &x, &parse_flow(y)?, grid)?)?,
        (None, Some(n)) => {
            let seed = ctx.require_seed("random opponents")?;
            let structure = Arc::new(PopulationStructure::new(
                network.demands(),
                network.path_counts(),
            )?);
            let pairs = sample_interior(&structure, n, seed)
                .iter()
                .map(|y| compare(&network, &x, y.values(), grid))
                .collect::<Result<Vec<_>, _>>()?;
            let dominant = pairs.iter().filter(|p| p.dominant).count();
            to_json(&BatchReport {
                n,
                dominant,
                deployable: pairs.iter().filter(|p| p.deployable).count(),
                counterexamples: n - dominant,
                disagreements: pairs.iter().filter(|p| p.dominant != p.deployable).count(),
                pairs,
            })?
        }
        (None, None) => return Err(InputError("pass --y or --random".into())),
    };
    ctx.emit(&json)
}
