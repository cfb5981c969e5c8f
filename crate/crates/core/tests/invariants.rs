use nalgebra::SMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use squeezelink::analysis::{detect_esd_refined, negativity_curve, Axis, Param};
use squeezelink::fockfield::{default_n_max, SqueezedFieldSpec, DEFAULT_WEIGHT_TOLERANCE};
use squeezelink::reduced_state::{
    coherence_orders, global_negativity, partial_transpose, reduce, transposed_orders,
    InitialState, Matrix8, Qubit,
};
use squeezelink::C64;

fn initial_strategy() -> impl Strategy<Value = InitialState> {
    prop_oneof![
        (0.0..=1.0f64).prop_map(InitialState::Alpha),
        Just(InitialState::Phi2),
    ]
}

/// Diagonal local unitary with phase `phi[q]` on the excited level of qubit `q`.
fn local_phases(phi: [f64; 3]) -> Matrix8 {
    Matrix8::from_fn(|i, j| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let mut angle = 0.0;
        for (q, bit) in [0b100, 0b010, 0b001].into_iter().enumerate() {
            if i & bit != 0 {
                angle += phi[q];
            }
        }
        C64::from_polar(1.0, angle)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn pair_negativities_coincide(initial in initial_strategy(), s in 0.0..1.2f64, tau in 0.0..30.0f64) {
        let field = SqueezedFieldSpec::full(s).unwrap();
        let rho8 = reduce(&initial, &field, tau).unwrap().comp8();
        let a1 = global_negativity(&rho8, Qubit::A1);
        let a2 = global_negativity(&rho8, Qubit::A2);
        prop_assert!((a1 - a2).abs() <= 1e-10);
    }

    #[test]
    fn local_phases_leave_negativity_unchanged(
        initial in initial_strategy(),
        s in 0.0..0.9f64,
        tau in 0.0..20.0f64,
        phi in prop::array::uniform3(0.0..std::f64::consts::TAU),
    ) {
        let field = SqueezedFieldSpec::full(s).unwrap();
        let rho8 = reduce(&initial, &field, tau).unwrap().comp8();
        let u = local_phases(phi);
        let rotated = u * rho8 * u.adjoint();
        for q in Qubit::ALL {
            prop_assert!((global_negativity(&rho8, q) - global_negativity(&rotated, q)).abs() <= 1e-10);
        }
    }

    #[test]
    fn only_even_coherences_and_transpose_moves_k2(
        initial in initial_strategy(),
        s in 0.0..1.0f64,
        tau in 0.0..30.0f64,
    ) {
        let field = SqueezedFieldSpec::full(s).unwrap();
        let rho8 = reduce(&initial, &field, tau).unwrap().comp8();
        let hist = coherence_orders(&rho8);
        prop_assert_eq!(hist[1], 0);
        prop_assert_eq!(hist[3], 0);
        for q in Qubit::ALL {
            prop_assert!(transposed_orders(&rho8, q).iter().all(|&k| k == 2));
        }
    }

    #[test]
    fn sparsity_pattern_holds(initial in initial_strategy(), s in 0.0..1.2f64, tau in 0.0..30.0f64) {
        let field = SqueezedFieldSpec::full(s).unwrap();
        let rho = reduce(&initial, &field, tau).unwrap();
        prop_assert!(rho.pattern_violation(&initial) <= 1e-12);
    }

    #[test]
    fn transpose_is_an_involution(initial in initial_strategy(), s in 0.0..1.0f64, tau in 0.0..30.0f64) {
        let field = SqueezedFieldSpec::full(s).unwrap();
        let rho8 = reduce(&initial, &field, tau).unwrap().comp8();
        for q in Qubit::ALL {
            prop_assert_eq!(partial_transpose(&partial_transpose(&rho8, q), q), rho8);
        }
    }

    #[test]
    fn more_photons_change_nothing(initial in initial_strategy(), s in 0.0..=0.8f64, tau in 0.0..20.0f64) {
        let base = SqueezedFieldSpec::full(s).unwrap();
        let n = default_n_max(s, DEFAULT_WEIGHT_TOLERANCE).unwrap();
        let wider = base.with_n_max(n + 10).unwrap();
        let a = reduce(&initial, &base, tau).unwrap().comp8();
        let b = reduce(&initial, &wider, tau).unwrap().comp8();
        for q in Qubit::ALL {
            prop_assert!((global_negativity(&a, q) - global_negativity(&b, q)).abs() <= 1e-8);
        }
    }
}

#[test]
fn negativity_range_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(100_000);
    for _ in 0..100_000 {
        let g = SMatrix::<C64, 8, 8>::from_fn(|_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let mut rho = g * g.adjoint();
        let tr = rho.trace();
        rho /= tr;
        for q in Qubit::ALL {
            let ng = global_negativity(&rho, q);
            assert!((0.0..=1.0 + 1e-12).contains(&ng), "{ng}");
        }
    }
}

/// Every bisected boundary sits next to a sign change on a grid ten times finer.
#[test]
fn refined_boundaries_match_fine_grid() {
    let coarse = Axis::range(Param::Tau, 0.0, 16.0, 0.05).unwrap().values;
    let fine = Axis::range(Param::Tau, 0.0, 16.0, 0.005).unwrap().values;
    let slack = 0.005 + 1e-3;
    for initial in [InitialState::Alpha(1.0), InitialState::Alpha(0.5), InitialState::Phi2] {
        let field = SqueezedFieldSpec::full(0.64).unwrap();
        let curve = negativity_curve(&initial, &field, &coarse, Qubit::B).unwrap();
        let dense = negativity_curve(&initial, &field, &fine, Qubit::B).unwrap();
        let eval = |t: f64| Ok(global_negativity(&reduce(&initial, &field, t)?.comp8(), Qubit::B));
        let intervals = detect_esd_refined(&curve, eval).unwrap();
        assert!(!intervals.is_empty());
        let deaths: Vec<f64> = dense
            .windows(2)
            .filter(|w| w[0].1 > 0.0 && w[1].1 == 0.0)
            .map(|w| w[1].0)
            .collect();
        let revivals: Vec<f64> = dense
            .windows(2)
            .filter(|w| w[0].1 == 0.0 && w[1].1 > 0.0)
            .map(|w| w[1].0)
            .collect();
        let near = |set: &[f64], t: f64| set.iter().any(|&x| (x - t).abs() <= slack);
        for iv in &intervals {
            assert!(near(&deaths, iv.death), "{initial:?}: death {}", iv.death);
            if let Some(r) = iv.revival {
                assert!(near(&revivals, r), "{initial:?}: revival {r}");
            }
        }
    }
}
