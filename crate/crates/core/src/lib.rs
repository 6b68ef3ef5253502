//! Scattering phase shifts from integrated correlation functions of two
//! fermions with a contact interaction in a periodic box.
//!
//! The crate builds the box Hamiltonian in the plane-wave basis, evaluates the
//! integrated correlators `C(t)` and `C0(t)` either by exact diagonalization
//! or by simulating the ancilla (Hadamard-test) circuit with Trotterized
//! evolution, averages the oscillating difference over time segments and fits
//! the coupling against the closed-form infinite-volume limit.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuit;
pub mod cli;
pub mod error;
pub mod hamiltonian;
pub mod model;
pub mod series;

pub use error::{Error, Result};
pub use num_complex::Complex64 as Complex;
