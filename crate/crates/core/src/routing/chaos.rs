//! The scalar Hedge map of a two-link system and a scanner for its periodic orbits.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::parallel::ParallelLinkSystem;
use crate::error::{Error, Result};
use crate::numfmt::sig17;

/// Points of a candidate orbit must return within this distance to count as periodic.
const ORBIT_MATCH: f64 = 1e-6;

/// `H(x) = x e^{−αc₁(x)} / (x e^{−αc₁(x)} + (1−x) e^{−αc₂(1−x)})` on the share `x` of link 1.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeScalarMap {
    system: ParallelLinkSystem,
    alpha: f64,
}

pub fn hedge_scalar_map(system: &ParallelLinkSystem, alpha: f64) -> Result<HedgeScalarMap> {
    if system.num_links() != 2 {
        return Err(Error::Model(format!(
            "the scalar map needs two links, got {}",
            system.num_links()
        )));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::Rate(format!(
            "rate must be nonnegative, got {alpha}"
        )));
    }
    Ok(HedgeScalarMap {
        system: system.clone(),
        alpha,
    })
}

impl HedgeScalarMap {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn apply(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let d = self.system.demand();
        // ratio of the two weights in log space
        let a = x.ln() - self.alpha * self.system.cost(0, d * x);
        let b = (1.0 - x).ln() - self.alpha * self.system.cost(1, d * (1.0 - x));
        1.0 / (1.0 + (b - a).exp())
    }

    pub fn iterate(&self, x: f64, times: usize) -> f64 {
        (0..times).fold(x, |y, _| self.apply(y))
    }

    pub fn periodic_orbits(
        &self,
        period: usize,
        grid_n: usize,
        tol: f64,
    ) -> Result<Vec<PeriodicOrbit>> {
        find_periodic_orbits(|x| self.apply(x), period, grid_n, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicOrbit {
    pub period: usize,
    /// Orbit points in iteration order, starting from the smallest.
    pub points: Vec<f64>,
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> f64 {
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Orbits of `map` on `[0,1]` whose minimal period is exactly `period`.
///
/// Roots of `H^p(x) − x` are located by a sign-change scan over `grid_n` equal intervals
/// (exact zeros at grid nodes included) and refined by bisection to `tol`. Roots closer
/// than `10·tol` are merged. Each root is followed under the map to find its minimal
/// period, and the roots on one orbit are reported once. Tangential roots without a sign
/// change are not detected.
pub fn find_periodic_orbits<F>(
    map: F,
    period: usize,
    grid_n: usize,
    tol: f64,
) -> Result<Vec<PeriodicOrbit>>
where
    F: Fn(f64) -> f64 + Sync,
{
    if period == 0 {
        return Err(Error::Domain("period must be at least 1".into()));
    }
    if grid_n < 10 {
        return Err(Error::Domain(format!(
            "grid_n must be at least 10, got {grid_n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol must be positive, got {tol}")));
    }
    let residual = |x: f64| power_n(&map, x, period) - x;
    let node = |k: usize| k as f64 / grid_n as f64;

    let values: Vec<f64> = (0..=grid_n)
        .into_par_iter()
        .map(|k| residual(node(k)))
        .collect();
    let mut roots: Vec<f64> = (0..=grid_n)
        .into_par_iter()
        .flat_map_iter(|k| {
            let mut found = Vec::with_capacity(2);
            if values[k] == 0.0 {
                found.push(node(k));
            }
            if k < grid_n && values[k] * values[k + 1] < 0.0 {
                found.push(bisect(&residual, node(k), node(k + 1), values[k], tol));
            }
            found
        })
        .collect();
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= 10.0 * tol);

    let minimal_period = |x: f64| {
        (1..=period)
            .find(|q| period.is_multiple_of(*q) && (power_n(&map, x, *q) - x).abs() <= ORBIT_MATCH)
    };
    let mut taken = vec![false; roots.len()];
    let mut orbits = Vec::new();
    for i in 0..roots.len() {
        if taken[i] {
            continue;
        }
        taken[i] = true;
        let x0 = roots[i];
        if minimal_period(x0) != Some(period) {
            continue;
        }
        let mut points = vec![x0];
        let mut y = x0;
        for _ in 1..period {
            y = map(y);
            // prefer the refined root over the propagated iterate
            match roots.iter().position(|r| (r - y).abs() <= ORBIT_MATCH) {
                Some(j) => {
                    taken[j] = true;
                    points.push(roots[j]);
                }
                None => points.push(y),
            }
        }
        orbits.push(PeriodicOrbit { period, points });
    }
    Ok(orbits)
}

fn power_n<F: Fn(f64) -> f64>(map: &F, x: f64, n: usize) -> f64 {
    (0..n).fold(x, |y, _| map(y))
}

/// Orbit counts of minimal periods `1..=counts.len()` at one rate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChaosRow {
    pub alpha: f64,
    pub counts: Vec<usize>,
}

/// Periodic-orbit census of the scalar map over `alphas`, periods `1..=max_period`.
pub fn chaos_scan(
    system: &ParallelLinkSystem,
    alphas: &[f64],
    max_period: usize,
    grid_n: usize,
    tol: f64,
) -> Result<Vec<ChaosRow>> {
    if max_period == 0 {
        return Err(Error::Domain("max_period must be at least 1".into()));
    }
    alphas
        .iter()
        .map(|&alpha| {
            let h = hedge_scalar_map(system, alpha)?;
            let counts = (1..=max_period)
                .map(|p| h.periodic_orbits(p, grid_n, tol).map(|o| o.len()))
                .collect::<Result<_>>()?;
            Ok(ChaosRow { alpha, counts })
        })
        .collect()
}

/// CSV with columns `alpha, n_period1, …, n_periodP`.
pub fn write_chaos_csv<W: Write>(rows: &[ChaosRow], mut w: W) -> io::Result<()> {
    let periods = rows.first().map_or(3, |r| r.counts.len());
    let mut header = vec!["alpha".to_string()];
    header.extend((1..=periods).map(|p| format!("n_period{p}")));
    writeln!(w, "{}", header.join(","))?;
    for r in rows {
        let mut row = vec![sig17(r.alpha)];
        row.extend(r.counts.iter().map(|c| c.to_string()));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_link_map(alpha: f64) -> HedgeScalarMap {
        hedge_scalar_map(
            &ParallelLinkSystem::unit(vec![0.0, 0.0], vec![1.0, 10.0]).unwrap(),
            alpha,
        )
        .unwrap()
    }

    #[test]
    fn map_basics() {
        let h = two_link_map(5.0);
        assert!((h.apply(10.0 / 11.0) - 10.0 / 11.0).abs() < 1e-15);
        assert_eq!(h.apply(0.0), 0.0);
        assert_eq!(h.apply(1.0), 1.0);
        // at α = 5 some images lie within 1e-19 of 1 and round onto it
        let h = two_link_map(1.0);
        for k in 1..1000 {
            let y = h.apply(k as f64 / 1000.0);
            assert!(y > 0.0 && y < 1.0);
        }
    }

    #[test]
    fn fixed_points_at_high_rate() {
        let orbits = two_link_map(5.0).periodic_orbits(1, 10_000, 1e-12).unwrap();
        let pts: Vec<f64> = orbits.iter().map(|o| o.points[0]).collect();
        assert_eq!(pts.len(), 3, "{pts:?}");
        assert_eq!(pts[0], 0.0);
        assert!((pts[1] - 10.0 / 11.0).abs() < 1e-10);
        assert_eq!(pts[2], 1.0);
    }

    #[test]
    fn period_three_at_high_rate() {
        let h = two_link_map(5.0);
        let orbits = h.periodic_orbits(3, 20_000, 1e-12).unwrap();
        assert!(!orbits.is_empty());
        for o in &orbits {
            assert_eq!(o.points.len(), 3);
            let x = o.points[0];
            assert!((h.iterate(x, 3) - x).abs() < 1e-8);
            assert!((h.apply(x) - x).abs() > 1e-3);
        }
    }

    #[test]
    fn no_period_three_at_low_rate() {
        assert!(two_link_map(0.1)
            .periodic_orbits(3, 10_000, 1e-12)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(matches!(
            two_link_map(1.0).periodic_orbits(1, 9, 1e-12),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn logistic_two_cycle() {
        // r = 3.2: period-2 orbit at (r+1 ± √((r+1)(r−3)))/(2r)
        let r = 3.2;
        let orbits = find_periodic_orbits(|x| r * x * (1.0 - x), 2, 1000, 1e-13).unwrap();
        assert_eq!(orbits.len(), 1);
        let disc = ((r + 1.0) * (r - 3.0)).sqrt();
        assert!((orbits[0].points[0] - (r + 1.0 - disc) / (2.0 * r)).abs() < 1e-10);
        assert!((orbits[0].points[1] - (r + 1.0 + disc) / (2.0 * r)).abs() < 1e-10);
    }

    #[test]
    fn csv_rows() {
        let sys = ParallelLinkSystem::unit(vec![0.0, 0.0], vec![1.0, 10.0]).unwrap();
        let rows = chaos_scan(&sys, &[0.1], 3, 1000, 1e-12).unwrap();
        assert_eq!(rows[0].counts, vec![3, 0, 0]);
        let mut buf = Vec::new();
        write_chaos_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "alpha,n_period1,n_period2,n_period3\n1.0000000000000001e-1,3,0,0\n"
        );
    }
}
