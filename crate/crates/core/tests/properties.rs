use std::sync::Arc;

use finite_cz::calculus::{
    bmo_norm, expand_pairing, paraproduct, paraproduct_dual_form, stopping_family, extract_symbol, extraction,
};
use finite_cz::dyadic::probability::Wilson;
use finite_cz::dyadic::shifted::default_depth;
use finite_cz::dyadic::{build_shifted_integer_grid, DyadicSystem};
use finite_cz::norms::{
    duality_map, mixed_norm, operator_norm_lower_bound, spectral_norm_oracle, DenseOperator, MixedNormDescriptor,
};
use finite_cz::{rng, FiniteMetricMeasureSpace, TruncatedKernel, VectorField};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn weighted_path(weights: Vec<f64>) -> Arc<FiniteMetricMeasureSpace> {
    Arc::new(FiniteMetricMeasureSpace::path_weighted(weights).unwrap())
}

fn system(n: usize, bits: u64) -> DyadicSystem {
    let space = Arc::new(FiniteMetricMeasureSpace::path(n).unwrap());
    build_shifted_integer_grid(space, bits, default_depth(n)).unwrap()
}

fn field(n: usize, d: usize, seed: u64) -> VectorField {
    VectorField::gaussian(n, d, &mut rng::stream(seed, 0))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn inner_exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(f64::INFINITY), 1.05f64..8.0]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn volumes_grow_with_radius(weights in prop::collection::vec(0.1f64..5.0, 2..40), u in 0usize..40, t in 0.5f64..50.0) {
        let space = weighted_path(weights);
        let u = u % space.len();
        let small = space.volume(u, t).unwrap();
        let large = space.volume(u, 2.0 * t).unwrap();
        prop_assert!(small >= space.weight(u));
        prop_assert!(large >= small);
        prop_assert!(large <= space.doubling_constant() * small * (1.0 + 1e-12));
        prop_assert!(space.ball(u, t).unwrap().contains(&u));
    }

    #[test]
    fn mixed_norm_is_a_norm(
        n in 1usize..12, d in 1usize..5, s in 1.05f64..8.0, p in inner_exponent(),
        c in -10.0f64..10.0, seed in any::<u64>(),
    ) {
        let desc = MixedNormDescriptor::new(s, p, d).unwrap();
        let w: Vec<f64> = (0..n).map(|i| 0.5 + (i % 3) as f64).collect();
        let f = field(n, d, seed);
        let g = field(n, d, seed ^ 1);
        let nf = mixed_norm(&f, &desc, &w).unwrap();
        prop_assert!(close(mixed_norm(&f.scaled(c), &desc, &w).unwrap(), c.abs() * nf, 1e-12));
        let sum = mixed_norm(&f.add(&g).unwrap(), &desc, &w).unwrap();
        prop_assert!(sum <= nf + mixed_norm(&g, &desc, &w).unwrap() + 1e-12);
    }

    #[test]
    fn duality_map_attains_the_norm(
        n in 1usize..12, d in 1usize..5, s in 1.05f64..8.0, p in inner_exponent(), seed in any::<u64>(),
    ) {
        let desc = MixedNormDescriptor::new(s, p, d).unwrap();
        let w: Vec<f64> = (0..n).map(|i| 1.0 + (i % 4) as f64 / 2.0).collect();
        let f = field(n, d, seed);
        let j = duality_map(&f, &desc, &w).unwrap();
        prop_assert!(close(f.pairing(&j, &w).unwrap(), mixed_norm(&f, &desc, &w).unwrap(), 1e-10));
        prop_assert!(close(mixed_norm(&j, &desc.dual(), &w).unwrap(), 1.0, 1e-10));
    }

    #[test]
    fn shifted_grids_are_nested_filtrations(n in 2usize..150, bits in any::<u64>(), seed in any::<u64>()) {
        let sys = system(n, bits);
        prop_assert!(sys.check_invariants().is_ok());
        let f = field(n, 2, seed);
        let depth = sys.depth();
        prop_assert!(sys.level(depth).len() == n);
        let mut rebuilt = sys.average_op(0, &f).unwrap();
        for i in 0..depth {
            rebuilt = rebuilt.add(&sys.difference_op(i, &f).unwrap()).unwrap();
        }
        prop_assert!(rebuilt.sub(&f).unwrap().max_abs() <= 1e-10 * f.max_abs().max(1.0));
        let (i, j) = (bits as usize % (depth + 1), (bits >> 8) as usize % (depth + 1));
        let twice = sys.average_op(i, &sys.average_op(j, &f).unwrap()).unwrap();
        let once = sys.average_op(i.min(j), &f).unwrap();
        prop_assert!(twice.sub(&once).unwrap().max_abs() <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn ledger_reconstructs_the_pairing(
        n in 2usize..48, bits in any::<u64>(), d in 1usize..4, radius in 0.1f64..1.0, seed in any::<u64>(),
    ) {
        let outer = (radius * n as f64).max(1.5);
        let kernel = TruncatedKernel::truncated_hilbert(n, 1.0, outer).unwrap();
        let sys = build_shifted_integer_grid(Arc::clone(kernel.space()), bits, default_depth(n)).unwrap();
        let depth = sys.depth();
        let sigma = bits as usize % (depth + 1);
        let tau = sigma + (bits >> 16) as usize % (depth + 1 - sigma);
        let f = field(n, d, seed);
        let g = field(n, d, seed ^ 7);
        let ledger = expand_pairing(&kernel, &sys, &f, &g, sigma, tau).unwrap();
        prop_assert!(ledger.relative_residual() <= 1e-9);
        let ext = extraction(&kernel, &sys, &f, &g, sigma, tau).unwrap();
        prop_assert!(ext.relative_residual() <= 1e-9);
    }

    #[test]
    fn paraproduct_matches_its_dual_form(n in 2usize..64, bits in any::<u64>(), seed in any::<u64>()) {
        let sys = system(n, bits);
        let b = field(n, 1, seed).into_values();
        let f = field(n, 2, seed ^ 3);
        let g = field(n, 2, seed ^ 5);
        let depth = sys.depth();
        let direct = paraproduct(&sys, &b, &f, 0, depth).unwrap().pairing(&g, sys.space().weights()).unwrap();
        let dual = paraproduct_dual_form(&sys, &b, &f, &g, 0, depth).unwrap();
        prop_assert!(close(direct, dual, 1e-10));
    }

    #[test]
    fn stopping_families_are_sparse(n in 8usize..128, bits in any::<u64>(), seed in any::<u64>(), sigma in 0usize..3) {
        let sys = system(n, bits);
        let sigma = sigma.min(sys.depth());
        let b = field(n, 1, seed).into_values();
        let f: Vec<f64> = field(n, 1, seed ^ 9).values().iter().map(|x| x.powi(4)).collect();
        let fam = stopping_family(&sys, &f, &b, 2.0 * bmo_norm(&sys, &b), sigma).unwrap();
        prop_assert!(fam.majors_disjoint(n));
        prop_assert!(fam.majors_inside(&sys));
        prop_assert!(fam.major_ratio(&sys) >= 0.5 - 1e-12);
        prop_assert!(fam.first_kind_ratio(&sys) <= 0.25 + 1e-12);
    }

    #[test]
    fn symbol_of_an_odd_kernel_is_centred(n in 2usize..64) {
        let kernel = TruncatedKernel::finite_hilbert(n).unwrap();
        let b = extract_symbol(&kernel);
        let total: f64 = b.iter().sum();
        prop_assert!(total.abs() <= 1e-9 * n as f64);
    }

    #[test]
    fn wilson_intervals_hold_the_estimate(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let successes = (frac * trials as f64).round() as u64;
        let w = Wilson::new(successes, trials);
        prop_assert!(0.0 <= w.lower && w.lower <= w.estimate && w.estimate <= w.upper && w.upper <= 1.0);
        // endpoints solve (p_hat - x)^2 = z^2 x (1 - x) / n
        let z = Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.975);
        let n = trials as f64;
        for x in [w.lower, w.upper] {
            if x > 0.0 && x < 1.0 {
                prop_assert!(((w.estimate - x).powi(2) - z * z * x * (1.0 - x) / n).abs() <= 1e-9);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_iteration_stays_below_the_spectral_norm(n in 1usize..10, d in 1usize..4, seed in any::<u64>()) {
        let op = DenseOperator::random(n, d, seed).unwrap();
        let desc = MixedNormDescriptor::new(2.0, 2.0, d).unwrap();
        let est = operator_norm_lower_bound(&op, &desc, 2, 500, seed).unwrap();
        let exact = spectral_norm_oracle(&op, d).unwrap();
        prop_assert!(est.estimate <= exact * (1.0 + 1e-10));
        prop_assert!(est.history.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12)));
    }

    #[test]
    fn estimates_respect_the_schur_bound(
        n in 4usize..40, radius in 0.2f64..1.0, s in 1.2f64..6.0, p in 1.2f64..6.0, d in 1usize..3,
    ) {
        let kernel = TruncatedKernel::truncated_hilbert(n, 1.0, (radius * n as f64).max(1.5)).unwrap();
        let desc = MixedNormDescriptor::new(s, p, d).unwrap();
        let est = operator_norm_lower_bound(&kernel, &desc, 2, 300, 1).unwrap();
        prop_assert!(est.estimate <= kernel.schur_row_bound().lp_bound(s) * (1.0 + 1e-9));
    }
}
