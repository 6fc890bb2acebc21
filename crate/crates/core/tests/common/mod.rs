//! Independent oracles and random instance generators shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use mwdyn::game::{
    congestion_game, linear_symmetric_game, normalize_game, Commodity, CongestionNetwork,
    GameField, GameSpec, LinkCost, State,
};
use nalgebra::{dmatrix, DMatrix};
use rand::Rng;

pub fn hawk_dove() -> GameField {
    normalize_game(&linear_symmetric_game(dmatrix![-1.0, 2.0; 0.0, 1.0]).unwrap()).unwrap()
}

pub fn rps() -> GameField {
    normalize_game(
        &linear_symmetric_game(dmatrix![0.0, -1.0, 1.0; 1.0, 0.0, -1.0; -1.0, 1.0, 0.0]).unwrap(),
    )
    .unwrap()
}

/// A point drawn uniformly from the simplex of size `n` scaled to `mass`.
pub fn simplex_point<R: Rng>(rng: &mut R, n: usize, mass: f64) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    e.iter().map(|v| v * mass / total).collect()
}

/// Normalized single-population bimatrix game with entries in `[-2, 2]`.
pub fn random_bimatrix<R: Rng>(rng: &mut R, n: usize) -> GameField {
    let c = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
    normalize_game(&linear_symmetric_game(c).unwrap()).unwrap()
}

/// Normalized two-population linear game, 3 strategies each, with the given masses.
pub fn random_two_population<R: Rng>(
    rng: &mut R,
    masses: [f64; 2],
    offset: Option<Vec<f64>>,
) -> GameField {
    let matrix: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    GameSpec::Linear {
        masses: masses.to_vec(),
        strategy_counts: vec![3, 3],
        matrix,
        offset,
        normalize: true,
    }
    .build()
    .unwrap()
}

/// Water-filling Wardrop oracle: links enter in order of increasing offset while their
/// zero-load cost is below the running common delay.
pub fn water_filling(offsets: &[f64], slopes: &[f64], demand: f64) -> Vec<f64> {
    let mut order: Vec<usize> = (0..offsets.len()).collect();
    order.sort_by(|&a, &b| offsets[a].total_cmp(&offsets[b]));
    let mut level = 0.0;
    let mut used = 0;
    for k in 1..=order.len() {
        let links = &order[..k];
        let inv: f64 = links.iter().map(|&j| 1.0 / slopes[j]).sum();
        let l = (demand + links.iter().map(|&j| offsets[j] / slopes[j]).sum::<f64>()) / inv;
        if k > 1 && offsets[order[k - 1]] >= level {
            break;
        }
        level = l;
        used = k;
    }
    let mut x = vec![0.0; offsets.len()];
    for &j in &order[..used] {
        x[j] = ((level - offsets[j]) / slopes[j]).max(0.0);
    }
    x
}

/// Affine parallel-link system that keeps every link in use: offsets below the slope scale.
pub fn random_full_support_system<R: Rng>(rng: &mut R, m: usize) -> (Vec<f64>, Vec<f64>) {
    loop {
        let slopes: Vec<f64> = (0..m).map(|_| rng.random_range(0.2..5.0)).collect();
        let offsets: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..0.3)).collect();
        let w = water_filling(&offsets, &slopes, 1.0);
        if w.iter().all(|v| *v > 1e-3) {
            return (offsets, slopes);
        }
    }
}

/// Largest eigenvalue of a nonnegative matrix by power iteration on `K + I`, whose Perron
/// root is `ρ(K) + 1` and which has no other eigenvalue of that modulus.
pub fn perron_root(k: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    let shifted = k + DMatrix::<f64>::identity(n, n);
    let mut v = nalgebra::DVector::from_element(n, 1.0 / n as f64);
    let mut lambda = 0.0;
    for _ in 0..100_000 {
        let w = &shifted * &v;
        let norm = w.sum();
        let next = norm / v.sum();
        v = w / norm;
        if (next - lambda).abs() < 1e-15 {
            return next - 1.0;
        }
        lambda = next;
    }
    lambda - 1.0
}

/// Multiset distance between two complex spectra by greedy nearest matching.
pub fn spectra_match(a: &[num_complex::Complex64], b: &[num_complex::Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut used = vec![false; b.len()];
    a.iter().all(|z| {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (b[i] - z).norm().total_cmp(&(b[j] - z).norm()));
        match best {
            Some(j) if (b[j] - z).norm() <= tol => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

/// Zeroes a random proper subset of each block of `x` and restores the block masses.
pub fn to_boundary<R: Rng>(rng: &mut R, x: &mut [f64], blocks: &[std::ops::Range<usize>]) {
    for r in blocks {
        let mass: f64 = x[r.clone()].iter().sum();
        let keep = rng.random_range(r.clone());
        for k in r.clone() {
            if k != keep && rng.random_bool(0.5) {
                x[k] = 0.0;
            }
        }
        let left: f64 = x[r.clone()].iter().sum();
        x[r.clone()].iter_mut().for_each(|v| *v *= mass / left);
    }
}

/// Two commodities on a five-link graph with shared links and random polynomial costs
/// (nonnegative coefficients, positive linear term).
pub fn random_congestion<R: Rng>(rng: &mut R) -> CongestionNetwork {
    let links = (0..5)
        .map(|_| {
            let degree = rng.random_range(1..=3);
            let mut c: Vec<f64> = (0..=degree).map(|_| rng.random_range(0.0..2.0)).collect();
            c[1] += 0.1;
            LinkCost::new(c).unwrap()
        })
        .collect();
    let commodities = vec![
        Commodity {
            demand: rng.random_range(0.3..1.5),
            paths: vec![vec![0, 1], vec![2, 3], vec![0, 4, 3]],
        },
        Commodity {
            demand: rng.random_range(0.3..1.5),
            paths: vec![vec![1], vec![4, 3]],
        },
    ];
    CongestionNetwork::new(links, commodities).unwrap()
}

/// A random interior path flow of `network`.
pub fn random_flow<R: Rng>(rng: &mut R, network: &CongestionNetwork) -> Vec<f64> {
    network
        .commodities()
        .iter()
        .flat_map(|c| simplex_point(rng, c.paths.len(), c.demand))
        .collect()
}

/// Per-commodity index ranges of a path-flow vector.
pub fn commodity_blocks(network: &CongestionNetwork) -> Vec<std::ops::Range<usize>> {
    let mut start = 0;
    network
        .path_counts()
        .into_iter()
        .map(|n| {
            start += n;
            start - n..start
        })
        .collect()
}

/// A random normalized game with a random (possibly boundary) state, and the largest safe rate.
pub fn instance<R: Rng>(rng: &mut R, boundary: bool) -> (GameField, State, f64) {
    let (game, max_alpha) = match rng.random_range(0..3) {
        0 => {
            let n = rng.random_range(2..6);
            (random_bimatrix(rng, n), 10.0)
        }
        1 => (random_two_population(rng, [0.3, 0.7], None), 10.0),
        // costs in (0, 1): the replicator needs 1 − α c > 0
        _ => (
            normalize_game(&congestion_game(random_congestion(rng)).unwrap()).unwrap(),
            0.99,
        ),
    };
    let structure = Arc::clone(game.shared_structure());
    let blocks: Vec<_> = structure.blocks().map(|(_, r)| r).collect();
    let mut x: Vec<f64> = structure
        .blocks()
        .flat_map(|(i, r)| simplex_point(rng, r.len(), structure.mass(i)))
        .collect();
    if boundary {
        to_boundary(rng, &mut x, &blocks);
    }
    (game, State::new(structure, x).unwrap(), max_alpha)
}

/// A 3x3 two-population linear game and a state on random supports. With `equalize` the
/// offsets are chosen so every supported payoff in a population is the same.
pub fn support_instance<R: Rng>(rng: &mut R, equalize: bool, boundary: bool) -> (GameField, State) {
    let a: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..6).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let mut x = [simplex_point(rng, 3, 0.5), simplex_point(rng, 3, 0.5)].concat();
    if boundary {
        to_boundary(rng, &mut x, &[0..3, 3..6]);
    }
    let mut b: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    if equalize {
        for r in [0..3, 3..6] {
            let level = rng.random_range(-1.0..1.0);
            for j in r.filter(|&j| x[j] > 0.0) {
                let ax: f64 = (0..6).map(|k| a[j][k] * x[k]).sum();
                b[j] = level - ax;
            }
        }
    }
    let game = GameSpec::Linear {
        masses: vec![0.5, 0.5],
        strategy_counts: vec![3, 3],
        matrix: a,
        offset: Some(b),
        normalize: true,
    }
    .build()
    .unwrap();
    let state = State::new(Arc::clone(game.shared_structure()), x).unwrap();
    (game, state)
}
