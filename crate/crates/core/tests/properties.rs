use mera_qec::channel::{build_transfer_operator, spectral_decomposition};
use mera_qec::dynamics::{self, LocalHamiltonian};
use mera_qec::haar::{haar_isometry_matrix, random_density, GaussianSource};
use mera_qec::linalg::{isometry_defect, singular_values};
use mera_qec::mera::{ascend_operator, LocalOperator, MeraNetwork, Region};
use mera_qec::qec::{bures_distance, trace_distance};
use mera_qec::schmidt::operator_schmidt_decompose;
use mera_qec::{contract, Tensor};
use proptest::prelude::*;

fn random(shape: Vec<usize>, seed: u64) -> Tensor {
    let n: usize = shape.iter().product();
    let mut g = GaussianSource::new(seed);
    Tensor::new(shape, (0..n).map(|_| g.complex()).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn contraction_is_associative(a in 1usize..4, b in 1usize..4, c in 1usize..4, d in 1usize..4, seed in 0u64..1000) {
        let x = random(vec![a, b], seed);
        let y = random(vec![b, c], seed + 1);
        let z = random(vec![c, d], seed + 2);
        let left = contract(&contract(&x, &y, &[(1, 0)]).unwrap(), &z, &[(1, 0)]).unwrap();
        let right = contract(&x, &contract(&y, &z, &[(1, 0)]).unwrap(), &[(1, 0)]).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn permutation_inverts(d0 in 1usize..4, d1 in 1usize..4, d2 in 1usize..4, seed in 0u64..1000) {
        let t = random(vec![d0, d1, d2], seed);
        let p = t.permute(&[2, 0, 1]).unwrap();
        prop_assert_eq!(p.shape(), &[d2, d0, d1]);
        prop_assert!(p.permute(&[1, 2, 0]).unwrap().max_abs_diff(&t) < 1e-15);
    }

    #[test]
    fn haar_isometries_are_isometric(out_dim in 1usize..12, in_frac in 0.1f64..1.0, seed in 0u64..10_000) {
        let in_dim = ((out_dim as f64 * in_frac).ceil() as usize).clamp(1, out_dim);
        let w = haar_isometry_matrix(out_dim, in_dim, seed).unwrap();
        prop_assert!(isometry_defect(&w) < 1e-12);
    }

    #[test]
    fn schmidt_weights_carry_the_norm(d1 in 1usize..4, d2 in 1usize..4, seed in 0u64..1000) {
        let dim = d1 * d2;
        let o = random(vec![dim, dim], seed);
        let terms = operator_schmidt_decompose(&o, d1, d2).unwrap();
        let total: f64 = terms.iter().map(|t| t.weight * t.weight).sum();
        prop_assert!((total - o.norm().powi(2)).abs() < 1e-10 * o.norm().powi(2));
        prop_assert!(terms.windows(2).all(|w| w[0].weight >= w[1].weight));
    }

    #[test]
    fn distance_sandwich(dim in 2usize..6, seed in 0u64..1000) {
        let rho = random_density(dim, seed);
        let sigma = random_density(dim, seed + 7);
        let b = bures_distance(&rho, &sigma).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        prop_assert!(2.0 * b * b <= t + 1e-9);
        prop_assert!(t <= 2.0 * std::f64::consts::SQRT_2 * b + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn transfer_operator_is_contractive(seed in 0u64..10_000) {
        let net = MeraNetwork::haar(2, 1, 1, seed).unwrap();
        let sd = spectral_decomposition(&build_transfer_operator(&net).unwrap()).unwrap();
        prop_assert!(sd.spectral_radius() <= 1.0 + 1e-10);
        prop_assert!((sd.eigenvalues[0] - 1.0).norm() < 1e-8);
    }

    #[test]
    fn ascent_preserves_the_identity(seed in 0u64..10_000, site in 0usize..8) {
        let net = MeraNetwork::haar(2, 3, 1, seed).unwrap();
        let r = Region::new(0, 8, vec![site]).unwrap();
        let up = ascend_operator(&net, &LocalOperator::identity(r, 2, 1), 2).unwrap();
        let n = up.matrix().nrows();
        prop_assert!((up.matrix() - mera_qec::linalg::identity(n)).norm() < 1e-10);
    }

    #[test]
    fn evolution_is_unitary(t in -3.0f64..3.0, seed in 0u64..1000) {
        let h = LocalHamiltonian::heisenberg(6, true).unwrap();
        let op = mera_qec::qec::identities::random_local_operator(Region::new(0, 6, vec![2]).unwrap(), 2, 1, seed);
        let before = singular_values(&op.extend_to(&h.full_region()).unwrap().into_matrix());
        let after = singular_values(dynamics::evolve_operator(&h, &op, t).unwrap().matrix());
        let err = before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9);
    }

    #[test]
    fn truncation_error_is_bounded_and_vanishes_on_the_chain(t in 0.1f64..1.5) {
        let h = LocalHamiltonian::heisenberg(8, true).unwrap();
        let o = dynamics::pauli_operator('X', 0, 8).unwrap();
        let samples = dynamics::lr_samples(&h, &o, &[0, 1, 2, 3, 4], &[t]).unwrap();
        prop_assert!(samples.iter().all(|s| s.error <= 2.0 + 1e-10), "{:?}", samples);
        prop_assert!(samples[4].error < 1e-10);
    }

    #[test]
    fn truncation_error_shrinks_with_radius_at_short_times(t in 0.05f64..0.3) {
        let h = LocalHamiltonian::heisenberg(8, true).unwrap();
        let o = dynamics::pauli_operator('X', 0, 8).unwrap();
        let samples = dynamics::lr_samples(&h, &o, &[0, 1, 2, 3], &[t]).unwrap();
        for w in samples.windows(2) {
            prop_assert!(w[1].error <= w[0].error + 1e-10, "{:?}", samples);
        }
    }
}
