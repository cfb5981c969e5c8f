//! Brute-force reference dynamics.
//!
//! Builds the resonant interaction Hamiltonian of each cavity from ladder
//! operator matrix elements, diagonalises it numerically on every
//! conserved-excitation block and exponentiates. Nothing here calls into the
//! closed-form propagators of [`crate::dynamics`]; only the basis types are
//! shared. Reductions consume [`field_weights`] term by term.

use std::collections::{BTreeMap, HashMap};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::dynamics::{AtomicBasis, BranchState, ATOMIC_DIM};
use crate::error::{Error, Result};
use crate::fockfield::{field_weights, SqueezedFieldSpec};
use crate::reduced_state::{finish_reduction, AtomicDensity, InitialState, Matrix6};

/// Photon cutoffs of the two cavities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleSpace {
    pub n1_cap: usize,
    pub n2_cap: usize,
}

impl OracleSpace {
    /// Room for every branch of a field truncated at `n_max`: the atom pair
    /// can release two photons into cavity one and atom `B` one into cavity two.
    pub fn for_n_max(n_max: usize) -> Self {
        Self { n1_cap: n_max + 2, n2_cap: n_max + 1 }
    }

    fn dim(&self) -> usize {
        3 * (self.n1_cap + 1) * 2 * (self.n2_cap + 1)
    }

    fn index(&self, pair: usize, n1: usize, b: usize, n2: usize) -> usize {
        ((pair * (self.n1_cap + 1) + n1) * 2 + b) * (self.n2_cap + 1) + n2
    }
}

/// Dense atoms-plus-field state over `(pair level, n1) (x) (b level, n2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullStateVector {
    space: OracleSpace,
    amps: Vec<C64>,
}

impl FullStateVector {
    fn zeros(space: OracleSpace) -> Self {
        Self { space, amps: vec![C64::new(0.0, 0.0); space.dim()] }
    }

    pub fn space(&self) -> OracleSpace {
        self.space
    }

    pub fn get(&self, basis: AtomicBasis, n1: usize, n2: usize) -> C64 {
        if n1 > self.space.n1_cap || n2 > self.space.n2_cap {
            return C64::new(0.0, 0.0);
        }
        self.amps[self.space.index(basis.pair().excitations(), n1, basis.b_excitation(), n2)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Nonzero amplitudes as a sparse branch.
    pub fn to_branch(&self) -> BranchState {
        let mut out = BranchState::new();
        for basis in AtomicBasis::ALL {
            for n1 in 0..=self.space.n1_cap {
                for n2 in 0..=self.space.n2_cap {
                    out.add(basis, n1, n2, self.get(basis, n1, n2));
                }
            }
        }
        out
    }

    /// Amplitudes grouped by photon numbers, for field traces.
    fn sectors(&self) -> Sectors {
        let mut out = BTreeMap::new();
        for basis in AtomicBasis::ALL {
            for n1 in 0..=self.space.n1_cap {
                for n2 in 0..=self.space.n2_cap {
                    let a = self.get(basis, n1, n2);
                    if a != C64::new(0.0, 0.0) {
                        out.entry((n1, n2)).or_insert([C64::new(0.0, 0.0); ATOMIC_DIM])[basis.index()] = a;
                    }
                }
            }
        }
        out
    }
}

/// Local state of one cavity: atomic level (collective excitations) and
/// photon number.
type LocalState = (usize, usize);

/// `exp(-i H tau)` on the excitation block `e` of a cavity whose atoms form a
/// collective spin `j = spin2 / 2` (`spin2 = 2` for the pair, 1 for `B`).
/// Returns the block states and the matrix.
fn block_propagator(spin2: usize, e: usize, tau: f64) -> (Vec<LocalState>, DMatrix<C64>) {
    // collective levels m = -j..=j indexed by excitation count q = m + j
    let levels = spin2 + 1;
    let states: Vec<LocalState> = (0..levels).filter(|&q| q <= e).map(|q| (q, e - q)).collect();
    let d = states.len();
    let j = spin2 as f64 / 2.0;
    let mut h = DMatrix::<f64>::zeros(d, d);
    for (c, &(q, n)) in states.iter().enumerate() {
        // a J+ : absorb one photon, raise the atoms
        if n >= 1 && q + 1 < levels {
            let m = q as f64 - j;
            let jp = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
            let elem = jp * (n as f64).sqrt();
            let r = states.iter().position(|&s| s == (q + 1, n - 1)).expect("block closed under H");
            h[(r, c)] += elem;
            h[(c, r)] += elem;
        }
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(
        &eig.eigenvalues.map(|lambda| C64::from_polar(1.0, -lambda * tau)),
    );
    let u = &v * phases * v.adjoint();
    (states, u)
}

/// Evolve `|initial> |n1> |n2>` by numerical diagonalisation.
pub fn oracle_evolve(
    space: OracleSpace,
    initial: &[C64; ATOMIC_DIM],
    n1: usize,
    n2: usize,
    tau: f64,
) -> Result<FullStateVector> {
    let norm: f64 = initial.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::domain(format!("initial atomic state has norm {norm}, expected 1")));
    }
    let mut out = FullStateVector::zeros(space);
    for basis in AtomicBasis::ALL {
        let amp = initial[basis.index()];
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        let q1 = basis.pair().excitations();
        let q2 = basis.b_excitation();
        let e1 = q1 + n1;
        let e2 = q2 + n2;
        if e1 > space.n1_cap || e2 > space.n2_cap {
            return Err(Error::domain(format!(
                "excitation blocks ({e1}, {e2}) exceed cutoffs ({}, {})",
                space.n1_cap, space.n2_cap
            )));
        }
        let (states1, u1) = block_propagator(2, e1, tau);
        let (states2, u2) = block_propagator(1, e2, tau);
        let c1 = states1.iter().position(|&s| s == (q1, n1)).expect("initial state in block");
        let c2 = states2.iter().position(|&s| s == (q2, n2)).expect("initial state in block");
        for (r1, &(p, m1)) in states1.iter().enumerate() {
            for (r2, &(b, m2)) in states2.iter().enumerate() {
                out.amps[space.index(p, m1, b, m2)] += amp * u1[(r1, c1)] * u2[(r2, c2)];
            }
        }
    }
    Ok(out)
}

/// Atomic amplitudes grouped by photon numbers.
type Sectors = BTreeMap<(usize, usize), [C64; ATOMIC_DIM]>;

/// Reference reduction: literal sum over every field weight
/// `w(n, m, k, l) Tr_F |Phi^{n-k, n-l}><Phi^{m-k, m-l}|`.
pub fn oracle_reduce(initial: &InitialState, field: &SqueezedFieldSpec, tau: f64) -> Result<AtomicDensity> {
    initial.validate()?;
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain(format!("tau must be finite and >= 0, got {tau}")));
    }
    let weights = field_weights(field)?;
    let space = OracleSpace::for_n_max(field.n_max);
    let atomic = initial.vector();
    let mut cache: HashMap<(usize, usize), Sectors> = HashMap::new();
    let mut rho = Matrix6::zeros();
    for w in &weights {
        for key in [(w.n - w.k, w.n - w.l), (w.m - w.k, w.m - w.l)] {
            if !cache.contains_key(&key) {
                let st = oracle_evolve(space, &atomic, key.0, key.1, tau)?;
                cache.insert(key, st.sectors());
            }
        }
        let ket = &cache[&(w.n - w.k, w.n - w.l)];
        let bra = &cache[&(w.m - w.k, w.m - w.l)];
        for (photons, u) in ket {
            let Some(v) = bra.get(photons) else { continue };
            for i in 0..ATOMIC_DIM {
                for j in 0..ATOMIC_DIM {
                    rho[(i, j)] += u[i] * v[j].conj() * w.value;
                }
            }
        }
    }
    finish_reduction(rho, field)
}

/// `max |U U^dagger - 1|` over the oracle block propagators of both cavities
/// up to excitation `e_max`.
pub fn oracle_unitarity_defect(e_max: usize, tau: f64) -> f64 {
    let mut worst = 0.0_f64;
    for e in 0..=e_max {
        for spin2 in [1, 2] {
            let (_, u) = block_propagator(spin2, e, tau);
            let d = u.nrows();
            let defect = (&u * u.adjoint() - DMatrix::<C64>::identity(d, d))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            worst = worst.max(defect);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PairLevel;
    use std::f64::consts::PI;

    fn ground() -> [C64; 6] {
        let mut v = [C64::new(0.0, 0.0); 6];
        v[0] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn zero_time_is_identity() {
        let space = OracleSpace::for_n_max(5);
        let mut v = [C64::new(0.0, 0.0); 6];
        v[1] = C64::new(0.6, 0.0);
        v[5] = C64::new(0.0, 0.8);
        let st = oracle_evolve(space, &v, 3, 2, 0.0).unwrap();
        assert!(st.to_branch().max_abs_diff(&BranchState::product(&v, 3, 2)) < 1e-14);
    }

    #[test]
    fn single_photon_rabi_revival() {
        let space = OracleSpace::for_n_max(2);
        let st = oracle_evolve(space, &ground(), 0, 1, 2.0 * PI).unwrap();
        let back = st.get(AtomicBasis::from_parts(PairLevel::Ground, false), 0, 1);
        assert!((back - C64::new(1.0, 0.0)).norm() < 1e-12);
        let st = oracle_evolve(space, &ground(), 0, 1, PI / 2.0).unwrap();
        let up = st.get(AtomicBasis::from_parts(PairLevel::Ground, true), 0, 0);
        assert!((up - C64::new(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn pair_block_spectrum() {
        // eigenvalues 0, +-sqrt(2(2n - 1)) on the n-photon block
        for n in 2..8 {
            let (states, _) = block_propagator(2, n, 0.0);
            assert_eq!(states.len(), 3);
        }
        assert_eq!(block_propagator(2, 1, 0.0).0.len(), 2);
        assert_eq!(block_propagator(2, 0, 0.0).0.len(), 1);
        assert!(oracle_unitarity_defect(40, 7.3) < 1e-12);
    }

    #[test]
    fn overflowing_block_is_rejected() {
        let space = OracleSpace { n1_cap: 3, n2_cap: 3 };
        let mut v = [C64::new(0.0, 0.0); 6];
        v[2] = C64::new(1.0, 0.0);
        assert!(matches!(oracle_evolve(space, &v, 2, 0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn vacuum_reduction_matches_pure_evolution() {
        let field = SqueezedFieldSpec::full(0.0).unwrap();
        let rho = oracle_reduce(&InitialState::Phi2, &field, 3.3).unwrap();
        let st = oracle_evolve(OracleSpace::for_n_max(1), &InitialState::Phi2.vector(), 0, 0, 3.3).unwrap();
        // |2,0; 0> exchanges its excitation with |2,-2; 1> only
        let stay = st.get(AtomicBasis::new(1).unwrap(), 0, 0);
        let emit = st.get(AtomicBasis::new(0).unwrap(), 1, 0);
        assert!((stay.norm_sqr() + emit.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((rho.sym6()[(1, 1)].re - stay.norm_sqr()).abs() < 1e-12);
        assert!((rho.sym6()[(0, 0)].re - emit.norm_sqr()).abs() < 1e-12);
        assert!(rho.sym6()[(0, 1)].norm() < 1e-12);
    }
}
