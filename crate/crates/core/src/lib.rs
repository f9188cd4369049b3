//! Discrete randomized smoothing for binary (and discretely perturbable) data.
//!
//! The smooth classifier `g(x) = P[f(x̃) = 1]` under the sparsity-aware flip
//! distribution can be evaluated three ways here:
//!
//! - exactly, by summing the flip distribution over the classifier's truth table
//!   ([`certify::exact_smooth`]);
//! - by Monte-Carlo sampling with one-sided Clopper–Pearson bounds
//!   ([`certify::mc_estimate`]);
//! - by a simulated amplitude-estimation circuit built on a dense statevector
//!   ([`qae::estimate`]), which needs quadratically fewer oracle calls for the
//!   same accuracy.
//!
//! All three feed the same Neyman–Pearson certificate over `(r_a, r_d)`
//! addition/deletion balls ([`certify::certify_ball`]).
//!
//! # Conventions
//!
//! Bit `j` of a [`BitString`] is bit `j` of its integer index (LSB first). The
//! same convention maps string positions onto statevector qubits: qubit `j`
//! holds bit `j` of an amplitude's index.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod bitdata;
pub mod certify;
mod error;
pub mod oracle;
pub mod qae;
pub mod statevec;

pub use bitdata::{BitString, FlipProbabilities, PerturbationBall};
pub use error::{Error, Result};
pub use oracle::TruthTable;
pub use statevec::StateVector;

/// Largest register the dense simulator will allocate (2^26 amplitudes).
pub const MAX_QUBITS: usize = 26;
