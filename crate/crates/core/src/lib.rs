//! Entanglement generation and transfer from a two-mode squeezed vacuum to
//! three atomic qubits held in two remote cavities.
//!
//! Two atoms `A1 A2` share cavity one and couple to the first field mode
//! through the Tavis–Cummings interaction; a third atom `B` sits in cavity two
//! and couples to the second mode through the Jaynes–Cummings interaction.
//! The crate evolves the composite system in closed form, traces out the
//! field, and quantifies the three-qubit entanglement through the global
//! negativity of partial transposes.
//!
//! Module map:
//!
//! - [`fockfield`]: squeezed-vacuum amplitudes and beam-splitter weights.
//! - [`dynamics`]: closed-form block propagators and evolved branch states.
//! - [`reduced_state`]: field trace, basis embedding, negativity, entropy.
//! - [`oracle`]: brute-force reference evolution by block diagonalisation.
//! - [`analysis`]: parameter sweeps, sudden-death detection, peak search.
//! - [`cli`]: configuration, CSV/JSON emission and the command driver.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod fockfield;
pub mod oracle;
pub mod reduced_state;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
