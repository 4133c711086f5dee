// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use qconfine::estimate::estimate;
use qconfine::{
    analytic_bounds, analytic_peaks, dft, eigendecompose, exact_leakage, family, phase_match, propagate,
    random_hermitian, random_leaky_hamiltonian, sample_trace, CMatrix, Family, Flags, SamplingPlan,
};

const TOL: f64 = 1e-10;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 64, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn ground_weights_sum_to_one(dim in 2usize..=8, seed in any::<u64>()) {
        let h = random_hermitian(dim, seed).unwrap();
        let total: f64 = eigendecompose(&h).ground_weights().iter().sum();
        prop_assert!((total - 1.0).abs() < TOL, "sum {total}");
    }

    #[test]
    fn peak_heights_sum_to_one(dim in 2usize..=8, seed in any::<u64>()) {
        let h = random_hermitian(dim, seed).unwrap();
        let total = analytic_peaks(&h).total();
        prop_assert!((total - 1.0).abs() < TOL, "total {total}");
    }

    #[test]
    fn bounds_sandwich_dense(dim in 3usize..=10, seed in any::<u64>()) {
        let h = random_hermitian(dim, seed).unwrap();
        let eps = exact_leakage(&h);
        if let Ok((lo, hi)) = analytic_bounds(&analytic_peaks(&h)) {
            prop_assert!(lo <= eps + 1e-12, "low {lo} > eps {eps}");
            prop_assert!(eps <= hi + 1e-12, "eps {eps} > high {hi}");
        }
    }

    #[test]
    fn bounds_sandwich_weakly_leaky(seed in any::<u64>()) {
        let h = random_leaky_hamiltonian(seed);
        let eps = exact_leakage(&h);
        let (lo, hi) = analytic_bounds(&analytic_peaks(&h)).unwrap();
        prop_assert!(lo <= eps + 1e-12 && eps <= hi + 1e-12, "{lo} <= {eps} <= {hi}");
    }

    #[test]
    fn three_levels_upper_bound_is_exact(seed in any::<u64>()) {
        let h = random_hermitian(3, seed).unwrap();
        let (_, hi) = analytic_bounds(&analytic_peaks(&h)).unwrap();
        prop_assert!((hi - exact_leakage(&h)).abs() < TOL);
    }

    #[test]
    fn propagator_is_unitary(dim in 2usize..=8, seed in any::<u64>(), t in -50.0f64..50.0) {
        let u = propagate(&random_hermitian(dim, seed).unwrap(), t);
        let prod = &u * &u.adjoint();
        prop_assert!(prod.max_abs_diff(&CMatrix::identity(dim)) < 1e-9);
    }

    #[test]
    fn return_amplitude_starts_at_one(dim in 2usize..=8, seed in any::<u64>()) {
        let es = eigendecompose(&random_hermitian(dim, seed).unwrap());
        prop_assert!((es.return_amplitude(0.0).re - 1.0).abs() < TOL);
        prop_assert!(es.return_amplitude(0.0).im.abs() < TOL);
    }

    #[test]
    fn estimate_bounds_are_ordered(h0 in 0.0f64..=1.0, h01 in 0.0f64..=0.5, sd in 0.0f64..1e-2) {
        let est = estimate(h0, h01, sd).unwrap();
        prop_assert!(est.eps_low >= 0.0);
        match est.eps_high {
            Some(hi) => prop_assert!(est.eps_low <= hi + 1e-15),
            None => prop_assert!(est.flags.eps_high_undefined),
        }
    }

    #[test]
    fn flags_round_trip(a: bool, b: bool, c: bool, d: bool, e: bool) {
        let f = Flags { eps_low_clamped: a, eps_high_clamped: b, eps_high_undefined: c, edge_clamped: d, no_oscillation: e };
        prop_assert_eq!(Flags::from_field(&f.to_field()).unwrap(), f);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn sampled_populations_are_probabilities(seed in any::<u64>(), ne in 1u64..4096, gamma in 0.0f64..0.2) {
        let h = family(Family::Leaky(4), gamma).unwrap();
        let plan = SamplingPlan::for_hamiltonian(&h, 20, 10.0, ne, seed).unwrap();
        let trace = sample_trace(&h, &plan).unwrap();
        prop_assert!(trace.populations.iter().all(|p| (0.0..=1.0).contains(p)));
    }

    #[test]
    fn sampling_is_deterministic_by_seed(seed in any::<u64>()) {
        let h = family(Family::Hb, 0.0).unwrap();
        let plan = SamplingPlan::for_hamiltonian(&h, 20, 10.0, 256, seed).unwrap();
        prop_assert_eq!(sample_trace(&h, &plan).unwrap(), sample_trace(&h, &plan).unwrap());
    }

    #[test]
    fn dc_channel_is_trace_mean(seed in any::<u64>(), cycles in 5.0f64..15.0) {
        let h = family(Family::Hn, 0.0).unwrap();
        let plan = SamplingPlan::for_hamiltonian(&h, 20, cycles, 512, seed).unwrap();
        let trace = sample_trace(&h, &plan).unwrap();
        let mean = trace.populations.iter().sum::<f64>() / trace.len() as f64;
        prop_assert!((dft(&trace).unwrap().amps[0] - mean).abs() < 1e-12);
    }

    #[test]
    fn phase_matching_never_blunts_the_line(seed in any::<u64>(), cycles in 8.0f64..20.0, spp in 12usize..40) {
        let h = random_leaky_hamiltonian(seed);
        let plan = SamplingPlan::for_hamiltonian(&h, spp, cycles, 0, seed).unwrap();
        let pm = phase_match(&qconfine::ideal_trace(&h, &plan).unwrap()).unwrap();
        prop_assert!(pm.trial_kept >= pm.trial_full, "{} < {}", pm.trial_kept, pm.trial_full);
        prop_assert!(pm.kept <= plan.num_samples);
    }
}
