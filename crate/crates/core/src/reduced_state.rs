//! Reduced three-qubit state and its entanglement measures.
//!
//! The composite state is a weighted sum of evolved branches; tracing out
//! both cavity modes leaves a 6x6 density matrix on the symmetric atomic
//! basis. The 8x8 computational view labels qubits `A1 A2 B` with index
//! `4 i1 + 2 i2 + i3`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{SMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AtomicBasis, BranchState, PairLevel, ATOMIC_DIM};
use crate::error::{Error, Result};
use crate::fockfield::SqueezedFieldSpec;

pub type Matrix6 = SMatrix<C64, 6, 6>;
pub type Matrix8 = SMatrix<C64, 8, 8>;

/// Negativities below this are reported as exactly zero.
pub const NEGATIVITY_FLOOR: f64 = 1e-12;

/// Matrix elements below this modulus count as structural zeros.
pub const ELEMENT_FLOOR: f64 = 1e-12;

/// Largest anti-Hermitian part tolerated in an accumulated density matrix.
pub const HERMITICITY_TOLERANCE: f64 = 1e-10;

/// Which initial-state family a computation belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Alpha,
    Phi2,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Alpha => "alpha",
            Family::Phi2 => "phi2",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Family::Alpha),
            "phi2" => Ok(Family::Phi2),
            other => Err(Error::Parse(format!("unknown family `{other}` (expected alpha or phi2)"))),
        }
    }
}

/// Initial atomic state; atom `B` always starts in its ground state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// `sqrt(alpha)|000> + sqrt(1 - alpha)|110>`.
    Alpha(f64),
    /// `(|010> + |100>) / sqrt(2)`.
    Phi2,
}

impl InitialState {
    pub fn new(family: Family, alpha: Option<f64>) -> Result<Self> {
        match family {
            Family::Alpha => {
                let a = alpha.ok_or_else(|| Error::domain("alpha family requires a value of alpha"))?;
                let st = InitialState::Alpha(a);
                st.validate()?;
                Ok(st)
            }
            Family::Phi2 => Ok(InitialState::Phi2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let InitialState::Alpha(a) = *self {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::domain(format!("alpha must lie in [0, 1], got {a}")));
            }
        }
        Ok(())
    }

    pub fn family(&self) -> Family {
        match self {
            InitialState::Alpha(_) => Family::Alpha,
            InitialState::Phi2 => Family::Phi2,
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match *self {
            InitialState::Alpha(a) => Some(a),
            InitialState::Phi2 => None,
        }
    }

    /// Amplitudes over [`AtomicBasis`].
    pub fn vector(&self) -> [C64; ATOMIC_DIM] {
        let mut v = [C64::new(0.0, 0.0); ATOMIC_DIM];
        match *self {
            InitialState::Alpha(a) => {
                v[AtomicBasis::from_parts(PairLevel::Ground, false).index()] = C64::new(a.sqrt(), 0.0);
                v[AtomicBasis::from_parts(PairLevel::Excited, false).index()] =
                    C64::new((1.0 - a).sqrt(), 0.0);
            }
            InitialState::Phi2 => {
                v[AtomicBasis::from_parts(PairLevel::Symmetric, false).index()] = C64::new(1.0, 0.0);
            }
        }
        v
    }

    /// Mask of entries allowed to be nonzero in the reduced 6x6 matrix.
    ///
    /// For the alpha family, bra and ket carry the same atomic-excitation
    /// parity; for `phi2`, the same difference between pair and `B`
    /// excitations.
    pub fn sparsity_mask(&self) -> [[bool; ATOMIC_DIM]; ATOMIC_DIM] {
        let mut mask = [[false; ATOMIC_DIM]; ATOMIC_DIM];
        for i in AtomicBasis::ALL {
            for j in AtomicBasis::ALL {
                mask[i.index()][j.index()] = match self {
                    InitialState::Alpha(_) => i.excitations() % 2 == j.excitations() % 2,
                    InitialState::Phi2 => {
                        let d = |b: AtomicBasis| b.pair().excitations() as i64 - b.b_excitation() as i64;
                        d(i) == d(j)
                    }
                };
            }
        }
        mask
    }
}

/// Reduced atomic state in the symmetric basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomicDensity {
    sym6: Matrix6,
    /// Trace before renormalisation; differs from one by the truncated tail.
    renormalization: f64,
}

impl AtomicDensity {
    /// Wrap a matrix without checks. Used for constructed test states.
    pub fn from_sym6(sym6: Matrix6) -> Self {
        Self { sym6, renormalization: 1.0 }
    }

    /// Pure state `|v><v|` on the symmetric basis.
    pub fn pure(v: &[C64; ATOMIC_DIM]) -> Self {
        let col = SMatrix::<C64, 6, 1>::from_column_slice(v);
        Self::from_sym6(col * col.adjoint())
    }

    pub fn sym6(&self) -> &Matrix6 {
        &self.sym6
    }

    pub fn comp8(&self) -> Matrix8 {
        to_computational(self)
    }

    pub fn renormalization(&self) -> f64 {
        self.renormalization
    }

    pub fn trace(&self) -> f64 {
        self.sym6.trace().re
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(self.sym6 - self.sym6.adjoint()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues6(&self.sym6).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Largest modulus among entries the mask requires to vanish.
    pub fn pattern_violation(&self, initial: &InitialState) -> f64 {
        let mask = initial.sparsity_mask();
        let mut worst = 0.0_f64;
        for i in 0..ATOMIC_DIM {
            for j in 0..ATOMIC_DIM {
                if !mask[i][j] {
                    worst = worst.max(self.sym6[(i, j)].norm());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &AtomicDensity) -> f64 {
        max_abs(&(self.sym6 - other.sym6))
    }
}

fn max_abs<const R: usize, const C: usize>(m: &SMatrix<C64, R, C>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Accumulate `Tr_F |psi><psi|` into `rho`: pair amplitudes that share the
/// same photon numbers `(n1, n2)`.
pub(crate) fn accumulate_field_trace(rho: &mut Matrix6, psi: &BranchState) {
    let mut sectors: BTreeMap<(usize, usize), [C64; ATOMIC_DIM]> = BTreeMap::new();
    for ((basis, n1, n2), amp) in psi.iter() {
        sectors.entry((n1, n2)).or_insert([C64::new(0.0, 0.0); ATOMIC_DIM])[basis.index()] += amp;
    }
    for v in sectors.values() {
        for i in 0..ATOMIC_DIM {
            if v[i] == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..ATOMIC_DIM {
                rho[(i, j)] += v[i] * v[j].conj();
            }
        }
    }
}

/// Renormalise an accumulated trace and run the structural checks shared by
/// every reduction route.
pub(crate) fn finish_reduction(mut rho: Matrix6, field: &SqueezedFieldSpec) -> Result<AtomicDensity> {
    let trace = rho.trace().re;
    if !(trace.is_finite() && (1.0 - trace).abs() <= field.weight_tolerance + 1e-13) {
        return Err(Error::Truncation {
            residual: (1.0 - trace).abs(),
            tolerance: field.weight_tolerance,
            n_max: field.n_max,
        });
    }
    let defect = max_abs(&(rho - rho.adjoint()));
    if defect > HERMITICITY_TOLERANCE {
        return Err(Error::Consistency(format!("reduced state is not Hermitian (defect {defect:e})")));
    }
    rho /= C64::new(trace, 0.0);
    Ok(AtomicDensity { sym6: rho, renormalization: trace })
}

/// Reduced atomic state at interaction time `tau`.
///
/// The field weights factorise over loss channels `(k, l)` as
/// `w(n, m, k, l) = a_kl(n) a_kl(m)`, so each channel contributes the field
/// trace of one pure branch `sum_n a_kl(n) U |initial; n-k, n-l>`.
pub fn reduce(initial: &InitialState, field: &SqueezedFieldSpec, tau: f64) -> Result<AtomicDensity> {
    initial.validate()?;
    field.validate()?;
    field.check_truncation()?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain(format!("tau must be finite and >= 0, got {tau}")));
    }
    let atomic = initial.vector();
    let mut rho = Matrix6::zeros();
    let loss_cap = field.max_loss();
    for k in 0..=loss_cap {
        for l in 0..=loss_cap {
            let mut start = BranchState::new();
            for n in k.max(l)..=field.n_max {
                let a = field.channel_amplitude(n, k, l)?;
                if a == 0.0 {
                    continue;
                }
                for basis in AtomicBasis::ALL {
                    start.add(basis, n - k, n - l, atomic[basis.index()] * a);
                }
            }
            if start.is_empty() {
                continue;
            }
            accumulate_field_trace(&mut rho, &start.evolve(tau));
        }
    }
    finish_reduction(rho, field)
}

/// Isometry from the symmetric basis into the computational basis, with
/// `|2,0> -> (|01> + |10>) / sqrt(2)`.
pub fn embedding() -> SMatrix<C64, 8, 6> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut e = SMatrix::<C64, 8, 6>::zeros();
    for basis in AtomicBasis::ALL {
        let b = basis.b_excitation();
        let col = basis.index();
        match basis.pair() {
            PairLevel::Ground => e[(b, col)] = C64::new(1.0, 0.0),
            PairLevel::Symmetric => {
                e[(0b010 | b, col)] = C64::new(h, 0.0);
                e[(0b100 | b, col)] = C64::new(h, 0.0);
            }
            PairLevel::Excited => e[(0b110 | b, col)] = C64::new(1.0, 0.0),
        }
    }
    e
}

pub fn to_computational(rho: &AtomicDensity) -> Matrix8 {
    let e = embedding();
    e * rho.sym6 * e.transpose()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    A1,
    A2,
    B,
}

impl Qubit {
    pub const ALL: [Qubit; 3] = [Qubit::A1, Qubit::A2, Qubit::B];

    fn mask(self) -> usize {
        match self {
            Qubit::A1 => 0b100,
            Qubit::A2 => 0b010,
            Qubit::B => 0b001,
        }
    }
}

/// `<i|rho^T_q|j> = <i'|rho|j'>` where `i'`, `j'` exchange the bits of qubit `q`.
pub fn partial_transpose(rho8: &Matrix8, qubit: Qubit) -> Matrix8 {
    let m = qubit.mask();
    Matrix8::from_fn(|i, j| {
        let ii = (i & !m) | (j & m);
        let jj = (j & !m) | (i & m);
        rho8[(ii, jj)]
    })
}

fn hermitian_eigenvalues6(m: &Matrix6) -> Vec<f64> {
    SymmetricEigen::new(*m).eigenvalues.iter().copied().collect()
}

pub fn hermitian_eigenvalues8(m: &Matrix8) -> Vec<f64> {
    SymmetricEigen::new(*m).eigenvalues.iter().copied().collect()
}

/// `||rho^T_q||_1 - 1`, floored to exactly zero below [`NEGATIVITY_FLOOR`].
pub fn global_negativity(rho8: &Matrix8, qubit: Qubit) -> f64 {
    let pt = partial_transpose(rho8, qubit);
    let trace_norm: f64 = hermitian_eigenvalues8(&pt).iter().map(|l| l.abs()).sum();
    let ng = trace_norm - 1.0;
    if ng < NEGATIVITY_FLOOR {
        0.0
    } else {
        ng
    }
}

/// `1 - Tr rho^2`.
pub fn linear_entropy(rho: &AtomicDensity) -> f64 {
    1.0 - rho.sym6.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Number of qubit positions on which computational labels `i` and `j` differ.
pub fn coherence_order(i: usize, j: usize) -> usize {
    (i ^ j).count_ones() as usize
}

/// Histogram of nonzero elements by coherence order `K = 0..=3`.
pub fn coherence_orders(rho8: &Matrix8) -> [usize; 4] {
    let mut hist = [0; 4];
    for i in 0..8 {
        for j in 0..8 {
            if rho8[(i, j)].norm() > ELEMENT_FLOOR {
                hist[coherence_order(i, j)] += 1;
            }
        }
    }
    hist
}

/// Distinct coherence orders of the elements that the partial transpose on
/// `qubit` changes; empty if it changes nothing.
pub fn transposed_orders(rho8: &Matrix8, qubit: Qubit) -> Vec<usize> {
    let pt = partial_transpose(rho8, qubit);
    let mut orders = Vec::new();
    for i in 0..8 {
        for j in 0..8 {
            if (pt[(i, j)] - rho8[(i, j)]).norm() > ELEMENT_FLOOR {
                orders.push(coherence_order(i, j));
            }
        }
    }
    orders.sort_unstable();
    orders.dedup();
    orders
}

/// Entanglement summary at one sweep coordinate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub family: Family,
    pub alpha: Option<f64>,
    pub s: f64,
    pub tau: f64,
    pub ng_b: f64,
    pub ng_a1: f64,
    pub linear_entropy: f64,
    pub max_coherence_order: usize,
}

impl NegativityReport {
    pub fn from_density(initial: &InitialState, s: f64, tau: f64, rho: &AtomicDensity) -> Self {
        let rho8 = rho.comp8();
        let hist = coherence_orders(&rho8);
        let max_k = (0..4).rev().find(|&k| hist[k] > 0).unwrap_or(0);
        Self {
            family: initial.family(),
            alpha: initial.alpha(),
            s,
            tau,
            ng_b: global_negativity(&rho8, Qubit::B),
            ng_a1: global_negativity(&rho8, Qubit::A1),
            linear_entropy: linear_entropy(rho),
            max_coherence_order: max_k,
        }
    }
}

/// Reduce and summarise in one step.
pub fn evaluate(initial: &InitialState, field: &SqueezedFieldSpec, tau: f64) -> Result<NegativityReport> {
    let rho = reduce(initial, field, tau)?;
    Ok(NegativityReport::from_density(initial, field.s, tau, &rho))
}
