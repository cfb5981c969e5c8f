//! Values frozen from independent high-precision evaluations.

use num_bigint::BigUint;
use squeezelink::dynamics::{u_one, u_two};
use squeezelink::fockfield::{
    binom_coeff, cnk, default_n_max, field_weights, g_weight, Injection, SqueezedFieldSpec,
    DEFAULT_WEIGHT_TOLERANCE,
};
use squeezelink::reduced_state::{global_negativity, AtomicDensity, Qubit};
use squeezelink::C64;

fn exact_binomial(n: u32, k: u32) -> BigUint {
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[test]
fn sqrt_binomial_against_big_integers() {
    for n in 0..=80u32 {
        for k in 0..=n {
            let exact: f64 = exact_binomial(n, k).to_string().parse().unwrap();
            let got = binom_coeff(n as usize, k as usize).unwrap();
            assert!(rel(got * got, exact) < 1e-13, "C({n},{k})");
        }
    }
    assert_eq!(exact_binomial(30, 15), BigUint::from(155_117_520u32));
    assert!(rel(binom_coeff(30, 15).unwrap(), 12454.618420489645816) < 1e-14);
}

#[test]
fn beam_splitter_amplitude() {
    assert!(rel(cnk(5, 2, 0.7).unwrap(), 0.11250452893514124447) < 1e-13);
}

#[test]
fn field_weight_value() {
    assert!(rel(g_weight(3, 2, 1, 0, 0.9).unwrap(), 0.0025446660737972176883) < 1e-13);
}

#[test]
fn vacuum_weight_at_operating_point() {
    let spec = SqueezedFieldSpec::full(0.64).unwrap();
    let w = field_weights(&spec).unwrap();
    let vac = w.iter().find(|w| (w.n, w.m, w.k, w.l) == (0, 0, 0, 0)).unwrap();
    assert!(rel(vac.value, 0.68088849519413505648) < 1e-14);
}

#[test]
fn default_cutoff_and_residual() {
    assert_eq!(default_n_max(0.64, DEFAULT_WEIGHT_TOLERANCE).unwrap(), 20);
    let spec = SqueezedFieldSpec::with_tolerance(0.64, Injection::Full, 0.5)
        .unwrap()
        .with_n_max(3)
        .unwrap();
    assert!(rel(spec.residual(), 0.010369787282674003577) < 1e-12);
}

#[test]
fn pair_propagator_block_three() {
    let expected = [
        [(-0.09117947435309874332, 0.0), (0.0, -0.44486463104749369337), (-0.89094430998781844106, 0.0)],
        [(0.0, -0.44486463104749369337), (-0.81863245725516457220, 0.0), (0.0, -0.36323045022595291747)],
        [(-0.89094430998781844106, 0.0), (0.0, -0.36323045022595291747), (0.27254701709793417112, 0.0)],
    ];
    let u = u_two(3, 0.8).matrix;
    for (i, row) in expected.iter().enumerate() {
        for (j, &(re, im)) in row.iter().enumerate() {
            assert!((u[(i, j)] - C64::new(re, im)).norm() < 1e-14, "({i},{j})");
        }
    }
}

#[test]
fn single_propagator_block_five() {
    let u = u_one(5, 0.8).matrix;
    let (c, s) = (-0.21633407381161937347, -0.97631939881786064036);
    assert!((u[(0, 0)] - C64::new(c, 0.0)).norm() < 1e-14);
    assert!((u[(1, 1)] - C64::new(c, 0.0)).norm() < 1e-14);
    assert!((u[(0, 1)] - C64::new(0.0, s)).norm() < 1e-14);
    assert!((u[(1, 0)] - C64::new(0.0, s)).norm() < 1e-14);
}

#[test]
fn w_state_negativity() {
    // (|100> + |010> + |001>)/sqrt(3) is the pure alpha = 0 state with one
    // excitation shared; build it directly in the computational basis.
    let mut v = [C64::new(0.0, 0.0); 8];
    for i in [0b100, 0b010, 0b001] {
        v[i] = C64::new(1.0 / 3f64.sqrt(), 0.0);
    }
    let col = nalgebra::SMatrix::<C64, 8, 1>::from_column_slice(&v);
    let rho8 = col * col.adjoint();
    for q in Qubit::ALL {
        let ng = global_negativity(&rho8, q);
        assert!((ng - 0.94280904158206336587).abs() < 1e-12);
    }
    // The same state seen through the symmetric embedding.
    let s = 1.0 / 3f64.sqrt();
    let sym = [
        C64::new(0.0, 0.0),
        C64::new(s * 2f64.sqrt(), 0.0),
        C64::new(0.0, 0.0),
        C64::new(s, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
    ];
    let rho = AtomicDensity::pure(&sym);
    assert!((global_negativity(&rho.comp8(), Qubit::B) - 0.94280904158206336587).abs() < 1e-12);
}
