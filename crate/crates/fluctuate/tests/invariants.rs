use fluctuate::exact;
use fluctuate::lpsm;
use fluctuate::par::with_threads;
use fluctuate::sim::{self, SimConfig, SimMode};
use fluctuate::specfun::{hyp2f1_abc, ln_gamma, pochhammer};
use fluctuate::{Exec, LpsmParams, ModelParams};
use proptest::prelude::*;

fn model() -> impl Strategy<Value = ModelParams> {
    (0.3f64..3.0, 0.0f64..0.8, 1e-3f64..0.05, 10f64..500.0)
        .prop_map(|(g, q, mu, n)| ModelParams::from_reduced(g, q, mu, n))
}

fn lpsm_params() -> impl Strategy<Value = LpsmParams> {
    (0.2f64..4.0, 0.05f64..5.0, 0.0f64..0.9).prop_map(|(g, t, q)| LpsmParams::new(g, t, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_pmf_is_a_subprobability(p in model()) {
        let pmf = exact::pmf_exact(&p, 200, Exec::default()).unwrap();
        prop_assert!(pmf.probs.iter().all(|&x| (0.0..=1.0).contains(&x)));
        let total: f64 = pmf.probs.iter().sum();
        prop_assert!(total <= 1.0 + 1e-12);
        prop_assert!((pmf.truncation_mass - (1.0 - total).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn truncation_does_not_change_prefix(p in lpsm_params(), n in 5usize..60) {
        let short = lpsm::pmf_v(&p, n).unwrap();
        let long = lpsm::pmf_v(&p, 3 * n).unwrap();
        prop_assert_eq!(&short.probs[..], &long.probs[..=n]);
    }

    #[test]
    fn parallel_matches_sequential(p in lpsm_params()) {
        let seq = lpsm::pmf_v_with(&p, 300, Exec::Sequential).unwrap();
        let par = lpsm::pmf_v_with(&p, 300, Exec::Parallel).unwrap();
        prop_assert_eq!(seq.probs, par.probs);
    }

    #[test]
    fn p0_is_exp_of_log_gf_at_zero(p in lpsm_params()) {
        let r = lpsm::resistance_p0(&p).unwrap();
        let via_gf = lpsm::log_gf_v(&p, 0.0).unwrap().exp();
        prop_assert!((r.p0 - via_gf).abs() < 1e-13);
        prop_assert!((r.p0 + r.p_positive - 1.0).abs() < 1e-15);
    }

    #[test]
    fn more_intensity_means_fewer_empty_cultures(g in 0.2f64..4.0, q in 0.0f64..0.9, t in 0.05f64..5.0) {
        let a = lpsm::resistance_p0(&LpsmParams::new(g, t, q)).unwrap().p0;
        let b = lpsm::resistance_p0(&LpsmParams::new(g, 1.5 * t, q)).unwrap().p0;
        prop_assert!(b < a);
    }

    #[test]
    fn pfaff_transformation(a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.3f64..5.0, z in -5.0f64..-0.01) {
        let lhs = hyp2f1_abc(a, b, c, z).unwrap();
        let rhs = (1.0 - z).powf(-a) * hyp2f1_abc(a, c - b, c, z / (z - 1.0)).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1.0));
    }

    #[test]
    fn pochhammer_matches_gamma_ratio(a in 0.1f64..20.0, n in 0u64..100) {
        let direct = pochhammer(a, n);
        let via = (ln_gamma(a + n as f64).unwrap() - ln_gamma(a).unwrap()).exp();
        prop_assert!((direct - via).abs() <= 1e-11 * via);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn simulation_independent_of_thread_count(seed in any::<u64>(), full in any::<bool>()) {
        let mode = if full { SimMode::FullyStochastic } else { SimMode::SemiDeterministic };
        let cfg = SimConfig::new(ModelParams::from_reduced(1.5, 0.5, 0.01, 100.0), 3000, seed, mode);
        let one = with_threads(Some(1), || sim::simulate(&cfg, Exec::Parallel).unwrap());
        let four = with_threads(Some(4), || sim::simulate(&cfg, Exec::Parallel).unwrap());
        let seq = sim::simulate(&cfg, Exec::Sequential).unwrap();
        prop_assert_eq!(&one, &four);
        prop_assert_eq!(&one, &seq);
        prop_assert_eq!(one.empirical_pmf.iter().sum::<u64>() + one.overflow, one.n_trajectories);
    }
}
