mod common;

use common::*;
use mwdyn::dynamics::{hedge_step, replicator_vector_field, uniform_rates};
use mwdyn::game::{congestion_game, State};
use mwdyn::routing::{
    alpha_bar, beckmann_potential, deflated_k, delta_epsilon, eigenvalues,
    full_support_closed_form, invades, invasion_barrier, is_incrementally_deployable,
    jacobian_full_support, spectral_radius, wardrop_parallel_affine, ParallelLinkSystem,
};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full_support(rng: &mut ChaCha8Rng) -> ParallelLinkSystem {
    let m = rng.random_range(2..=8);
    let (offsets, slopes) = random_full_support_system(rng, m);
    ParallelLinkSystem::unit(offsets, slopes).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn wardrop_matches_water_filling(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..=8);
        let offsets: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..3.0)).collect();
        let slopes: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..5.0)).collect();
        let demand = rng.random_range(0.1..4.0);
        let system = ParallelLinkSystem::new(offsets.clone(), slopes.clone(), demand).unwrap();
        let w = wardrop_parallel_affine(&system);
        let oracle = water_filling(&offsets, &slopes, demand);
        for (a, b) in w.flows.iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-9, "{:?} vs {oracle:?}", w.flows);
        }
        if w.is_full_support() {
            let closed = full_support_closed_form(&system);
            prop_assert!(w.flows.iter().zip(&closed).all(|(a, b)| (a - b).abs() <= 1e-9));
        }
    }

    #[test]
    fn wardrop_minimizes_the_beckmann_potential(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(2..=6);
        let offsets: Vec<f64> = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
        let slopes: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..5.0)).collect();
        let system = ParallelLinkSystem::new(offsets, slopes, 1.5).unwrap();
        let net = system.network();
        let w = wardrop_parallel_affine(&system).flows;
        let best = beckmann_potential(&net, &w).unwrap();
        let y = simplex_point(&mut rng, m, 1.5);
        let other = beckmann_potential(&net, &y).unwrap();
        let gap = y.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(best <= other);
        if gap > 1e-9 {
            prop_assert!(best < other);
        }
    }

    #[test]
    fn deflation_keeps_the_spectrum(seed in any::<u64>(), u in 0.01f64..0.99) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let system = full_support(&mut rng);
        let w = wardrop_parallel_affine(&system);
        let alpha = u * alpha_bar(&system, &w).unwrap();
        let j = jacobian_full_support(&system, &w, alpha).unwrap();
        // columns of J sum to zero, so zero is always an eigenvalue
        for c in 0..j.ncols() {
            prop_assert!(j.column(c).sum().abs() < 1e-12);
        }
        let (k, _) = deflated_k(&system, &w, alpha).unwrap();
        let mut expected = eigenvalues(&k).unwrap();
        expected.push(Complex64::new(0.0, 0.0));
        prop_assert!(spectra_match(&eigenvalues(&j).unwrap(), &expected, 1e-9));
    }

    #[test]
    fn deflated_matrix_is_stable_and_nonnegative_at_the_threshold(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let system = full_support(&mut rng);
        let w = wardrop_parallel_affine(&system);
        let (k, _) = deflated_k(&system, &w, alpha_bar(&system, &w).unwrap()).unwrap();
        prop_assert!(k.iter().all(|v| *v >= 0.0));
        let rho = spectral_radius(&k).unwrap();
        prop_assert!(rho < 1.0, "{rho}");
        prop_assert!((rho - perron_root(&k.map(|v| v.max(0.0)))).abs() < 1e-8);
    }

    #[test]
    fn learning_descends_the_potential(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_congestion(&mut rng);
        let game = congestion_game(net.clone()).unwrap();
        let x = State::new(game.shared_structure().clone(), random_flow(&mut rng, &net)).unwrap();
        let v = replicator_vector_field(&game, &x).unwrap();
        let c = game.evaluate(&x).unwrap();
        let slope: f64 = v.iter().zip(&c).map(|(a, b)| a * b).sum();
        prop_assert!(slope < 0.0);
        let y = hedge_step(&game, &x, &uniform_rates(&game, 1e-4)).unwrap();
        prop_assert!(net.beckmann(y.values()) < net.beckmann(x.values()));
    }

    #[test]
    fn delta_falls_and_invasion_matches_dominance(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = random_congestion(&mut rng);
        let x = random_flow(&mut rng, &net);
        let y = random_flow(&mut rng, &net);
        let deltas: Vec<f64> = (0..=20).map(|k| delta_epsilon(&net, &x, &y, k as f64 / 20.0).unwrap()).collect();
        let scale = deltas.iter().fold(1.0f64, |m, d| m.max(d.abs()));
        prop_assert!(deltas.windows(2).all(|d| d[1] - d[0] < -1e-12 * scale), "{deltas:?}");

        let barrier = invasion_barrier(&net, &y, &x, 101).unwrap();
        prop_assert_eq!(barrier.is_infinite(), !invades(&net, &y, &x).unwrap());
        prop_assert_eq!(barrier.is_infinite(), is_incrementally_deployable(&net, &x, &y, 101).unwrap());
        // monotone δ means at least one of the pair can invade the other
        prop_assert!(invades(&net, &y, &x).unwrap() || invades(&net, &x, &y).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn one_is_never_an_eigenvalue(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let system = full_support(&mut rng);
        let w = wardrop_parallel_affine(&system);
        for step in 1..=1000 {
            let (k, _) = deflated_k(&system, &w, 0.01 * step as f64).unwrap();
            let n = k.nrows();
            let det = (k - DMatrix::<f64>::identity(n, n)).determinant();
            prop_assert!(det.abs() > 0.0);
        }
    }
}
