//! Digital simulation of exciton-phonon dynamics.
//!
//! The crate compiles a site/oscillator Hamiltonian into first-order Trotter
//! circuits over a small basis gate set, runs them on a statevector engine
//! (exactly, with shot sampling, or under stochastic Pauli noise), checks them
//! against an exact-diagonalization reference, and compresses deep circuits
//! with an incremental layer-growing recompiler.
//!
//! Qubit conventions used throughout:
//!
//! * `|0>` is the `+1` eigenstate of `Z`; a site qubit in `|1>` carries the
//!   excitation.
//! * Statevector indices are little-endian: qubit `q` is bit `q` of the index.
//! * Oscillator levels are binary encoded inside each mode register with the
//!   lowest register qubit as the least significant bit.
//! * `R_a(t) = exp(-i t a / 2)` for `a` in `{X, Y, Z}`.
//! * Global phase is never part of an equivalence check.

pub mod circuit;
pub mod ed;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod pauli;
pub mod recompiler;
pub mod simulator;
pub mod trotter;

pub use circuit::{Circuit, Gate, GateCounts};
pub use error::{Error, Result};
pub use model::{ModelParams, QubitLayout};
pub use pauli::{Pauli, PauliString, PauliSum, PauliTerm};
pub use simulator::StateVector;
pub use trotter::TrotterPlan;

/// Complex amplitude type shared by every dense routine.
pub type C64 = num_complex::Complex64;
