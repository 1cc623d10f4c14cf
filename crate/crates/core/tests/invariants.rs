// Property tests of the certification layer: scaling along rays, ordering of
// the bounds, and invariance under local unitaries.

use proptest::prelude::*;
use sepcert::bipartite::{adaptive_visibility, ppt_visibility, visibility_fixed, AdaptiveOptions};
use sepcert::conic::SolverOptions;
use sepcert::io::{matrix_to_string, parse_matrix};
use sepcert::polytope::Polytope;
use sepcert::seesaw::qubit_unitary;
use sepcert::states::{self, white_noise_mix, StateSpec};
use sepcert::HermitianOp;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    // χ(1/d + s(ρ − 1/d)) = χ(ρ)/s for a fixed polytope
    #[test]
    fn visibility_scales_along_ray(seed in 0u64..1000, s in 1.0f64..2.0) {
        let rho = states::random_pure(vec![2, 2], seed).unwrap().into_op();
        let p = Polytope::random_inner(vec![2], 30, seed).unwrap();
        let opts = SolverOptions::default();
        let chi = visibility_fixed(&rho, &p, 0, &opts).unwrap().t;
        let far = white_noise_mix(&rho, s);
        let chi_far = visibility_fixed(&far, &p, 0, &opts).unwrap().t;
        prop_assert!((chi_far - chi / s).abs() <= 1e-5, "{chi_far} vs {}", chi / s);
    }

    #[test]
    fn inner_bound_below_ppt_bound(seed in 0u64..1000) {
        let rho = states::random_density(vec![2, 3], seed).unwrap().into_op();
        let p = Polytope::random_inner(vec![2], 30, seed).unwrap();
        let fixed = visibility_fixed(&rho, &p, 0, &SolverOptions::default()).unwrap().t;
        let adaptive = adaptive_visibility(&rho, &AdaptiveOptions::new(30, seed)).unwrap().visibility;
        let ppt = ppt_visibility(&rho, &[1]).unwrap();
        prop_assert!(fixed <= ppt + 1e-6);
        prop_assert!(adaptive <= ppt + 1e-6);
    }

    #[test]
    fn ppt_bound_invariant_under_local_unitaries(seed in 0u64..1000, a in prop::array::uniform6(-3.0f64..3.0)) {
        let rho = states::random_density(vec![2, 2], seed).unwrap().into_op();
        let u = qubit_unitary(a[0], a[1], a[2]).kronecker(&qubit_unitary(a[3], a[4], a[5]));
        let turned = rho.conjugate(&u);
        let (x, y) = (ppt_visibility(&rho, &[1]).unwrap(), ppt_visibility(&turned, &[1]).unwrap());
        prop_assert!((x - y).abs() <= 1e-6, "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn matrix_text_round_trips(seed in 0u64..10_000, n in 1usize..3) {
        let rho = states::random_density(vec![2; n], seed).unwrap().into_op();
        let back: HermitianOp = parse_matrix(&matrix_to_string(&rho)).unwrap();
        prop_assert_eq!(back.dims(), rho.dims());
        prop_assert!(back.max_abs_diff(&rho) <= 1e-15);
    }

    #[test]
    fn noise_mix_keeps_trace(seed in 0u64..10_000, t in -1.0f64..2.0) {
        let rho = states::random_density(vec![3, 2], seed).unwrap().into_op();
        let m = white_noise_mix(&rho, t);
        prop_assert!((m.trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn state_spec_display_round_trips(
        family in prop::sample::select(vec!["ghz", "w", "random", "random_pure", "maximally_mixed"]),
        n in 2usize..5,
        d in 2usize..4,
        seed in 0u64..1_000_000,
    ) {
        let text = if family.starts_with("random") {
            format!("{family}:{n}x{d}:seed={seed}")
        } else {
            format!("{family}:{n}x{d}")
        };
        let spec: StateSpec = text.parse().unwrap();
        let again: StateSpec = spec.to_string().parse().unwrap();
        prop_assert_eq!(again, spec);
    }

    #[test]
    fn numeric_spec_parameters_round_trip(b in 0.0f64..1.0, theta in 0.0f64..std::f64::consts::TAU) {
        for text in [format!("horodecki2x4:b={b}"), format!("gamma:theta={theta}")] {
            let spec: StateSpec = text.parse().unwrap();
            let again: StateSpec = spec.to_string().parse().unwrap();
            prop_assert_eq!(again, spec);
        }
    }
}
