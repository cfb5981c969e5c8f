use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use squeezelink::dynamics::{closed_form, evolve_branch};
use squeezelink::fockfield::{Injection, SqueezedFieldSpec};
use squeezelink::oracle::{oracle_evolve, oracle_reduce, OracleSpace};
use squeezelink::reduced_state::{reduce, InitialState};

const ORACLE_TOLERANCE: f64 = 1e-9;

#[test]
fn twenty_random_points_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let initial = if rng.gen_bool(0.5) {
            InitialState::Alpha(rng.gen_range(0.0..=1.0))
        } else {
            InitialState::Phi2
        };
        let s = rng.gen_range(0.0..=0.8);
        let tau = rng.gen_range(0.0..=20.0);
        let field = SqueezedFieldSpec::full(s).unwrap();
        let fast = reduce(&initial, &field, tau).unwrap();
        let slow = oracle_reduce(&initial, &field, tau).unwrap();
        let d = fast.max_abs_diff(&slow);
        assert!(d < ORACLE_TOLERANCE, "{initial:?} s={s} tau={tau}: {d:e}");
        worst = worst.max(d);
    }
    eprintln!("worst oracle difference over 20 points: {worst:.3e}");
}

#[test]
fn partial_injection_agrees() {
    for (theta, initial) in [(0.4, InitialState::Alpha(0.3)), (2.1, InitialState::Phi2), (1.0, InitialState::Alpha(1.0))] {
        let field = SqueezedFieldSpec::new(0.5, Injection::Angle(theta)).unwrap();
        let fast = reduce(&initial, &field, 3.3).unwrap();
        let slow = oracle_reduce(&initial, &field, 3.3).unwrap();
        assert!(fast.max_abs_diff(&slow) < ORACLE_TOLERANCE);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn branch_evolution_matches_diagonalisation(
        alpha in 0.0..=1.0f64,
        phi2 in any::<bool>(),
        n1 in 0usize..30,
        n2 in 0usize..30,
        tau in 0.0..30.0f64,
    ) {
        let initial = if phi2 { InitialState::Phi2 } else { InitialState::Alpha(alpha) };
        let v = initial.vector();
        let fast = evolve_branch(&v, n1, n2, tau).unwrap();
        let space = OracleSpace { n1_cap: n1 + 2, n2_cap: n2 + 1 };
        let slow = oracle_evolve(space, &v, n1, n2, tau).unwrap().to_branch();
        prop_assert!(fast.max_abs_diff(&slow) < 1e-11);
        let closed = match initial {
            InitialState::Alpha(a) => closed_form::alpha_branch(a, n1, n2, tau).unwrap(),
            InitialState::Phi2 => closed_form::phi2_branch(n1, n2, tau),
        };
        prop_assert!(closed.max_abs_diff(&slow) < 1e-11);
    }
}
