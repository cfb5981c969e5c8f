//! Closed-form resonant dynamics of the two cavities.
//!
//! Cavity one holds the atom pair in its symmetric (triplet) subspace and the
//! first field mode; the interaction conserves the number of excitations, so
//! the evolution splits into blocks spanned by
//! `|2,-2; N>, |2,0; N-1>, |2,2; N-2>`. Cavity two holds atom `B` and splits
//! into two-dimensional blocks `|1,-1; M>, |1,1; M-1>`.
//!
//! Time is the dimensionless `tau = g t`. The free-evolution phase
//! `exp(-i omega_0 N t)` of each block is dropped: it is a local phase on
//! every excitation sector and leaves all negativities unchanged.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ATOMIC_DIM: usize = 6;

/// Tolerance on the norm of an initial atomic vector.
pub const NORM_TOLERANCE: f64 = 1e-10;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Collective state of the atom pair in cavity one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairLevel {
    /// `|2,-2>`, both atoms ground.
    Ground = 0,
    /// `|2,0> = (|01> + |10>) / sqrt(2)`.
    Symmetric = 1,
    /// `|2,2>`, both atoms excited.
    Excited = 2,
}

impl PairLevel {
    pub const ALL: [PairLevel; 3] = [PairLevel::Ground, PairLevel::Symmetric, PairLevel::Excited];

    pub fn excitations(self) -> usize {
        self as usize
    }

    fn from_excitations(e: usize) -> PairLevel {
        Self::ALL[e]
    }
}

/// Index into the six-dimensional symmetric product basis
///
/// `|2,-2>|1,-1>, |2,0>|1,-1>, |2,2>|1,-1>, |2,-2>|1,1>, |2,0>|1,1>, |2,2>|1,1>`.
///
/// This ordering is used by every matrix, CSV file and reference computation
/// in the crate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomicBasis(u8);

impl AtomicBasis {
    pub const ALL: [AtomicBasis; 6] = [
        AtomicBasis(0),
        AtomicBasis(1),
        AtomicBasis(2),
        AtomicBasis(3),
        AtomicBasis(4),
        AtomicBasis(5),
    ];

    pub fn new(index: usize) -> Result<Self> {
        if index >= ATOMIC_DIM {
            return Err(Error::domain(format!("atomic basis index {index} out of range 0..6")));
        }
        Ok(AtomicBasis(index as u8))
    }

    pub fn from_parts(pair: PairLevel, b_excited: bool) -> Self {
        AtomicBasis((usize::from(b_excited) * 3 + pair.excitations()) as u8)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn pair(self) -> PairLevel {
        PairLevel::from_excitations(self.index() % 3)
    }

    pub fn b_excitation(self) -> usize {
        self.index() / 3
    }

    /// Total number of atomic excitations.
    pub fn excitations(self) -> usize {
        self.pair().excitations() + self.b_excitation()
    }
}

impl fmt::Display for AtomicBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pair = match self.pair() {
            PairLevel::Ground => "|2,-2>",
            PairLevel::Symmetric => "|2,0>",
            PairLevel::Excited => "|2,2>",
        };
        let b = if self.b_excitation() == 1 { "|1,1>" } else { "|1,-1>" };
        write!(f, "{pair}{b}")
    }
}

/// Sparse pure state of atoms plus field, keyed by
/// `(atomic index, cavity-1 photons, cavity-2 photons)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BranchState {
    amplitudes: BTreeMap<(AtomicBasis, usize, usize), C64>,
}

impl BranchState {
    pub fn new() -> Self {
        Self::default()
    }

    /// `|atomic> (x) |n1> (x) |n2>`.
    pub fn product(atomic: &[C64; ATOMIC_DIM], n1: usize, n2: usize) -> Self {
        let mut out = Self::new();
        for basis in AtomicBasis::ALL {
            out.add(basis, n1, n2, atomic[basis.index()]);
        }
        out
    }

    /// Accumulate `amp` onto a component; exact zeros are not stored.
    pub fn add(&mut self, basis: AtomicBasis, n1: usize, n2: usize, amp: C64) {
        if amp == C64::new(0.0, 0.0) {
            return;
        }
        *self.amplitudes.entry((basis, n1, n2)).or_default() += amp;
    }

    pub fn get(&self, basis: AtomicBasis, n1: usize, n2: usize) -> C64 {
        self.amplitudes.get(&(basis, n1, n2)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((AtomicBasis, usize, usize), C64)> + '_ {
        self.amplitudes.iter().map(|(k, v)| (*k, *v))
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Scale every amplitude by a real factor.
    pub fn scaled(mut self, factor: f64) -> Self {
        for v in self.amplitudes.values_mut() {
            *v *= factor;
        }
        self
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &BranchState) -> f64 {
        let mut keys: Vec<_> = self.amplitudes.keys().collect();
        keys.extend(other.amplitudes.keys());
        keys.into_iter()
            .map(|&(b, n1, n2)| (self.get(b, n1, n2) - other.get(b, n1, n2)).norm())
            .fold(0.0, f64::max)
    }

    /// Apply the two-cavity propagator for interaction time `tau`.
    pub fn evolve(&self, tau: f64) -> BranchState {
        let mut out = BranchState::new();
        for (&(basis, n1, n2), &amp) in &self.amplitudes {
            let a = basis.pair().excitations();
            let top1 = n1 + a;
            let b = basis.b_excitation();
            let top2 = n2 + b;
            for a_out in 0..pair_block_dim(top1) {
                let u1 = pair_entry(top1, a_out, a, tau);
                if u1 == C64::new(0.0, 0.0) {
                    continue;
                }
                for b_out in 0..single_block_dim(top2) {
                    let u2 = single_entry(top2, b_out, b, tau);
                    let target = AtomicBasis::from_parts(PairLevel::from_excitations(a_out), b_out == 1);
                    out.add(target, top1 - a_out, top2 - b_out, amp * u1 * u2);
                }
            }
        }
        out
    }
}

fn pair_block_dim(top: usize) -> usize {
    (top + 1).min(3)
}

fn single_block_dim(top: usize) -> usize {
    (top + 1).min(2)
}

/// Entry `(row, col)` of the pair propagator on the block with `top` photons
/// in its first state. Rows and columns count pair excitations.
fn pair_entry(top: usize, row: usize, col: usize, tau: f64) -> C64 {
    if top == 0 {
        return C64::new(1.0, 0.0);
    }
    let n = top as f64;
    let a2 = 2.0 * (n - 1.0);
    let b2 = 2.0 * n;
    let s = a2 + b2;
    let (a, b) = (a2.sqrt(), b2.sqrt());
    let f = s.sqrt();
    let (c, sn) = ((f * tau).cos(), (f * tau).sin());
    let root = s.sqrt();
    match (row, col) {
        (0, 0) => C64::new((b2 * c + a2) / s, 0.0),
        (0, 1) | (1, 0) => -I * (b * sn / root),
        (0, 2) | (2, 0) => C64::new(a * b * (c - 1.0) / s, 0.0),
        (1, 1) => C64::new(c, 0.0),
        (1, 2) | (2, 1) => -I * (a * sn / root),
        (2, 2) => C64::new((a2 * c + b2) / s, 0.0),
        _ => unreachable!("pair block index out of range"),
    }
}

fn single_entry(top: usize, row: usize, col: usize, tau: f64) -> C64 {
    if top == 0 {
        return C64::new(1.0, 0.0);
    }
    let w = (top as f64).sqrt() * tau;
    if row == col {
        C64::new(w.cos(), 0.0)
    } else {
        -I * w.sin()
    }
}

/// Which cavity a propagator block acts in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CavityKind {
    /// Two atoms and field mode one.
    Pair,
    /// Atom `B` and field mode two.
    Single,
}

/// Unitary restricted to one conserved-excitation block.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorBlock {
    pub cavity: CavityKind,
    /// Photon number of the first (all-ground) state of the block.
    pub n: usize,
    pub tau: f64,
    pub matrix: DMatrix<C64>,
}

impl PropagatorBlock {
    /// `max |U U^dagger - 1|`.
    pub fn unitarity_defect(&self) -> f64 {
        let d = self.matrix.nrows();
        let prod = &self.matrix * self.matrix.adjoint();
        let eye = DMatrix::<C64>::identity(d, d);
        (prod - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Pair propagator on the block `|2,-2; n>, |2,0; n-1>, |2,2; n-2>`.
///
/// For `n = 1` only the first two states exist and for `n = 0` the block is
/// the single ground state.
pub fn u_two(n: usize, tau: f64) -> PropagatorBlock {
    let d = pair_block_dim(n);
    PropagatorBlock {
        cavity: CavityKind::Pair,
        n,
        tau,
        matrix: DMatrix::from_fn(d, d, |r, c| pair_entry(n, r, c, tau)),
    }
}

/// Single-atom propagator on the block `|1,-1; m>, |1,1; m-1>`.
pub fn u_one(m: usize, tau: f64) -> PropagatorBlock {
    let d = single_block_dim(m);
    PropagatorBlock {
        cavity: CavityKind::Single,
        n: m,
        tau,
        matrix: DMatrix::from_fn(d, d, |r, c| single_entry(m, r, c, tau)),
    }
}

fn check_normalised(initial: &[C64; ATOMIC_DIM]) -> Result<()> {
    let norm: f64 = initial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::domain(format!("initial atomic state has norm {norm}, expected 1")));
    }
    Ok(())
}

/// Evolve `|initial> |n1> |n2>` for interaction time `tau`.
///
/// `n1` and `n2` are the photon numbers actually present in each cavity at
/// `tau = 0`.
pub fn evolve_branch(initial: &[C64; ATOMIC_DIM], n1: usize, n2: usize, tau: f64) -> Result<BranchState> {
    check_normalised(initial)?;
    Ok(BranchState::product(initial, n1, n2).evolve(tau))
}

/// Closed-form branch expansions for the two initial families, written
/// term by term from the coefficient table
///
/// ```text
/// A_nk = sqrt(n-k-1)   B_nk = sqrt(n-k)     C_nl = sqrt(n-l)
/// A_n+2k = sqrt(n-k+1) B_n+2k = sqrt(n-k+2)
/// f = sqrt(2 (A^2 + B^2))
/// ```
///
/// Used as a second route alongside [`evolve_branch`].
pub mod closed_form {
    use super::*;

    /// `A`, `B` and `f` of one pair block. `a2 = A^2`, `b2 = B^2`.
    #[derive(Clone, Copy, Debug)]
    struct Block {
        a: f64,
        b: f64,
        a2: f64,
        b2: f64,
        f: f64,
    }

    impl Block {
        /// Block whose coefficients are `A^2 = top - 1`, `B^2 = top`.
        fn with_top(top: usize) -> Block {
            let a2 = top.saturating_sub(1) as f64;
            let b2 = top as f64;
            Block { a: a2.sqrt(), b: b2.sqrt(), a2, b2, f: (2.0 * (a2 + b2)).sqrt() }
        }

        fn sum(&self) -> f64 {
            self.a2 + self.b2
        }

        /// `[B^2 cos(f tau) + A^2] / (A^2 + B^2)`; 1 on the empty block.
        fn stay_ground(&self, tau: f64) -> f64 {
            if self.sum() == 0.0 {
                return 1.0;
            }
            (self.b2 * (self.f * tau).cos() + self.a2) / self.sum()
        }

        fn stay_excited(&self, tau: f64) -> f64 {
            if self.sum() == 0.0 {
                return 1.0;
            }
            (self.a2 * (self.f * tau).cos() + self.b2) / self.sum()
        }

        /// `A B [cos(f tau) - 1] / (A^2 + B^2)`.
        fn swap_pair(&self, tau: f64) -> f64 {
            if self.sum() == 0.0 {
                return 0.0;
            }
            self.a * self.b * ((self.f * tau).cos() - 1.0) / self.sum()
        }

        /// `X sin(f tau) / sqrt(A^2 + B^2)` for `X` in `{A, B}`.
        fn sine(&self, x: f64, tau: f64) -> f64 {
            if self.sum() == 0.0 {
                return 0.0;
            }
            x * (self.f * tau).sin() / self.sum().sqrt()
        }
    }

    fn push(out: &mut BranchState, pair: PairLevel, b: bool, n1: i64, n2: i64, amp: C64) {
        if n1 < 0 || n2 < 0 {
            // every such term carries an exactly vanishing coefficient
            return;
        }
        out.add(AtomicBasis::from_parts(pair, b), n1 as usize, n2 as usize, amp);
    }

    /// Evolved `(sqrt(alpha)|2,-2> + sqrt(1-alpha)|2,2>) |1,-1> |n1, n2>`.
    pub fn alpha_branch(alpha: f64, n1: usize, n2: usize, tau: f64) -> Result<BranchState> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        let sa = alpha.sqrt();
        let sb = (1.0 - alpha).sqrt();
        let c_nl = (n2 as f64).sqrt();
        let (cc, sc) = ((c_nl * tau).cos(), (c_nl * tau).sin());
        let lo = Block::with_top(n1);
        let hi = Block::with_top(n1 + 2);
        let (p, q) = (n1 as i64, n2 as i64);
        let re = |x: f64| C64::new(x, 0.0);
        let mut out = BranchState::new();
        use PairLevel::*;

        push(&mut out, Ground, false, p, q, re(sa * cc * lo.stay_ground(tau)));
        push(&mut out, Symmetric, false, p - 1, q, -I * (sa * cc * lo.sine(lo.b, tau)));
        push(&mut out, Excited, false, p - 2, q, re(sa * cc * lo.swap_pair(tau)));
        push(&mut out, Ground, true, p, q - 1, -I * (sa * sc * lo.stay_ground(tau)));
        push(&mut out, Symmetric, true, p - 1, q - 1, re(-sa * sc * lo.sine(lo.b, tau)));
        push(&mut out, Excited, true, p - 2, q - 1, -I * (sa * sc * lo.swap_pair(tau)));

        push(&mut out, Ground, false, p + 2, q, re(sb * cc * hi.swap_pair(tau)));
        push(&mut out, Symmetric, false, p + 1, q, -I * (sb * cc * hi.sine(hi.a, tau)));
        push(&mut out, Excited, false, p, q, re(sb * cc * hi.stay_excited(tau)));
        push(&mut out, Ground, true, p + 2, q - 1, -I * (sb * sc * hi.swap_pair(tau)));
        push(&mut out, Symmetric, true, p + 1, q - 1, re(-sb * sc * hi.sine(hi.a, tau)));
        push(&mut out, Excited, true, p, q - 1, -I * (sb * sc * hi.stay_excited(tau)));
        Ok(out)
    }

    /// Evolved `|2,0> |1,-1> |n1, n2>`.
    pub fn phi2_branch(n1: usize, n2: usize, tau: f64) -> BranchState {
        let c_nl = (n2 as f64).sqrt();
        let (cc, sc) = ((c_nl * tau).cos(), (c_nl * tau).sin());
        let blk = Block::with_top(n1 + 1);
        let cf = (blk.f * tau).cos();
        let (p, q) = (n1 as i64, n2 as i64);
        let re = |x: f64| C64::new(x, 0.0);
        let mut out = BranchState::new();
        use PairLevel::*;

        push(&mut out, Ground, false, p + 1, q, -I * (cc * blk.sine(blk.b, tau)));
        push(&mut out, Symmetric, false, p, q, re(cc * cf));
        push(&mut out, Excited, false, p - 1, q, -I * (cc * blk.sine(blk.a, tau)));
        push(&mut out, Ground, true, p + 1, q - 1, re(-sc * blk.sine(blk.b, tau)));
        push(&mut out, Symmetric, true, p, q - 1, -I * (sc * cf));
        push(&mut out, Excited, true, p - 1, q - 1, re(-sc * blk.sine(blk.a, tau)));
        out
    }
}
