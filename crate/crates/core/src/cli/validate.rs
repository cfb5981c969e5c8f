//! Randomized oracle-agreement and invariant suite behind `validate`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{u_one, u_two, PropagatorBlock};
use crate::error::Result;
use crate::fockfield::SqueezedFieldSpec;
use crate::oracle::oracle_reduce;
use crate::reduced_state::{
    coherence_orders, global_negativity, partial_transpose, reduce, transposed_orders,
    InitialState, Qubit, HERMITICITY_TOLERANCE,
};

pub const UNITARITY_TOLERANCE: f64 = 1e-12;
pub const ORACLE_TOLERANCE: f64 = 1e-9;
pub const STATE_TOLERANCE: f64 = 1e-10;
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
pub const PATTERN_TOLERANCE: f64 = 1e-12;

pub const MAX_PHOTONS: usize = 50;
pub const MAX_TAU: f64 = 30.0;
pub const MAX_STATE_S: f64 = 0.8;
pub const MAX_STATE_TAU: f64 = 20.0;

/// Failures kept per check for reporting.
const REPORTED_FAILURES: usize = 5;

pub type PairPropagator = fn(usize, f64) -> PropagatorBlock;

#[derive(Clone, Debug)]
pub struct ValidateOptions {
    pub seed: u64,
    pub count: usize,
    pub pair_propagator: PairPropagator,
}

impl ValidateOptions {
    pub fn new(seed: u64, count: usize) -> Self {
        Self { seed, count, pair_propagator: u_two }
    }
}

/// Propagator with a small non-unitary scaling; negative control only.
pub fn corrupted_u_two(n: usize, tau: f64) -> PropagatorBlock {
    let mut block = u_two(n, tau);
    block.matrix *= crate::C64::new(1.0 + 1e-6, 0.0);
    block
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub total: usize,
    pub failed: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failed == 0
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "PASS {} ({}/{})", self.name, self.total, self.total)
        } else {
            write!(f, "FAIL {} ({}/{} failed)", self.name, self.failed, self.total)?;
            for msg in &self.failures {
                write!(f, "\n  {}: {msg}", self.name)?;
            }
            Ok(())
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationSummary {
    pub checks: Vec<CheckOutcome>,
}

impl ValidationSummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }
}

impl fmt::Display for ValidationSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        write!(f, "{}", if self.passed() { "validation passed" } else { "validation FAILED" })
    }
}

/// One randomized instance.
#[derive(Clone, Copy, Debug)]
struct Instance {
    n: usize,
    tau_u: f64,
    initial: InitialState,
    s: f64,
    tau: f64,
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.initial {
            InitialState::Alpha(a) => write!(f, "family=alpha alpha={a} s={} tau={}", self.s, self.tau),
            InitialState::Phi2 => write!(f, "family=phi2 s={} tau={}", self.s, self.tau),
        }
    }
}

fn draw(rng: &mut ChaCha8Rng) -> Instance {
    let n = rng.gen_range(0..=MAX_PHOTONS);
    let tau_u = rng.gen_range(0.0..=MAX_TAU);
    let initial = if rng.gen_bool(0.5) {
        InitialState::Alpha(rng.gen_range(0.0..=1.0))
    } else {
        InitialState::Phi2
    };
    let s = rng.gen_range(0.0..=MAX_STATE_S);
    let tau = rng.gen_range(0.0..=MAX_STATE_TAU);
    Instance { n, tau_u, initial, s, tau }
}

const CHECKS: [&str; 11] = [
    "unitarity",
    "oracle_agreement",
    "trace",
    "hermiticity",
    "positivity",
    "negativity_range",
    "transpose_involution",
    "a1_a2_symmetry",
    "sparsity_pattern",
    "coherence_structure",
    "evaluation",
];

/// Per-check failure messages for one instance.
fn check_instance(inst: &Instance, pair: PairPropagator) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut fail = |check: usize, msg: String| out.push((check, msg));

    let d2 = pair(inst.n, inst.tau_u).unitarity_defect();
    let d1 = u_one(inst.n, inst.tau_u).unitarity_defect();
    if !(d2 <= UNITARITY_TOLERANCE && d1 <= UNITARITY_TOLERANCE) {
        fail(0, format!("n={} tau={}: defect pair={d2:.3e} single={d1:.3e}", inst.n, inst.tau_u));
    }

    let run = || -> Result<_> {
        let field = SqueezedFieldSpec::full(inst.s)?;
        Ok((reduce(&inst.initial, &field, inst.tau)?, oracle_reduce(&inst.initial, &field, inst.tau)?))
    };
    let (rho, oracle) = match run() {
        Ok(pair) => pair,
        Err(e) => {
            fail(10, format!("{inst}: {e}"));
            return out;
        }
    };

    let diff = rho.max_abs_diff(&oracle);
    if !(diff < ORACLE_TOLERANCE) {
        fail(1, format!("{inst}: max difference {diff:.3e}"));
    }
    let tr = (rho.trace() - 1.0).abs();
    if !(tr <= STATE_TOLERANCE) {
        fail(2, format!("{inst}: |tr - 1| = {tr:.3e}"));
    }
    let herm = rho.hermiticity_defect();
    if !(herm <= HERMITICITY_TOLERANCE) {
        fail(3, format!("{inst}: defect {herm:.3e}"));
    }
    let min_eig = rho.min_eigenvalue();
    if !(min_eig >= -STATE_TOLERANCE) {
        fail(4, format!("{inst}: min eigenvalue {min_eig:.3e}"));
    }
    let rho8 = rho.comp8();
    let ng: Vec<f64> = Qubit::ALL.iter().map(|&q| global_negativity(&rho8, q)).collect();
    if ng.iter().any(|&v| !(0.0..=1.0 + STATE_TOLERANCE).contains(&v)) {
        fail(5, format!("{inst}: negativities {ng:?}"));
    }
    for q in Qubit::ALL {
        if partial_transpose(&partial_transpose(&rho8, q), q) != rho8 {
            fail(6, format!("{inst}: qubit {q:?}"));
        }
    }
    if !((ng[0] - ng[1]).abs() <= SYMMETRY_TOLERANCE) {
        fail(7, format!("{inst}: ng_A1={} ng_A2={}", ng[0], ng[1]));
    }
    let pattern = rho.pattern_violation(&inst.initial);
    if !(pattern <= PATTERN_TOLERANCE) {
        fail(8, format!("{inst}: forbidden element {pattern:.3e}"));
    }
    let hist = coherence_orders(&rho8);
    let odd = hist[1] + hist[3];
    let pt_orders: Vec<Vec<usize>> = Qubit::ALL.iter().map(|&q| transposed_orders(&rho8, q)).collect();
    if odd > 0 || pt_orders.iter().any(|o| o.iter().any(|&k| k != 2)) {
        fail(9, format!("{inst}: orders {hist:?}, transposed {pt_orders:?}"));
    }
    out
}

/// Draw `count` instances from `seed` and run every check on each.
pub fn run_validation(opts: &ValidateOptions) -> ValidationSummary {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let instances: Vec<Instance> = (0..opts.count).map(|_| draw(&mut rng)).collect();
    let results: Vec<Vec<(usize, String)>> = instances
        .par_iter()
        .map(|inst| check_instance(inst, opts.pair_propagator))
        .collect();
    let mut checks: Vec<CheckOutcome> = CHECKS
        .iter()
        .map(|&name| CheckOutcome { name, total: opts.count, failed: 0, failures: Vec::new() })
        .collect();
    for failures in results {
        for (check, msg) in failures {
            let c = &mut checks[check];
            c.failed += 1;
            if c.failures.len() < REPORTED_FAILURES {
                c.failures.push(msg);
            }
        }
    }
    ValidationSummary { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_instance_passes_deterministically() {
        let a = run_validation(&ValidateOptions::new(7, 1));
        let b = run_validation(&ValidateOptions::new(7, 1));
        assert!(a.passed(), "{a}");
        assert_eq!(a.to_string(), b.to_string());
    }

    #[test]
    fn corrupted_propagator_fails_unitarity() {
        let mut opts = ValidateOptions::new(3, 4);
        opts.pair_propagator = corrupted_u_two;
        let summary = run_validation(&opts);
        assert!(!summary.passed());
        let unitarity = &summary.checks[0];
        assert_eq!(unitarity.name, "unitarity");
        assert_eq!(unitarity.failed, 4);
        assert!(summary.checks[1..].iter().all(CheckOutcome::passed));
        assert!(summary.to_string().contains("FAIL unitarity"));
    }
}
