//! Spectral design for the one-dimensional harmonic oscillator.
//!
//! Builds exactly solvable partner potentials of `V0(x) = x^2/2` (units
//! `hbar = m = omega = 1`) by Darboux/SUSY transformations, in two
//! independent ways:
//!
//! * chains of first-order transformations driven by a finite-difference
//!   Backlund recursion on the Riccati superpotentials ([`susy_chain`]),
//! * direct second-order transformations built from Wronskians of two
//!   factorization solutions, including the confluent and complex-energy
//!   degenerate cases ([`susy2`]).
//!
//! On top of the transformed Hamiltonians the crate constructs the
//! natural (polynomial Heisenberg) and linearized ladder operators
//! ([`algebra`]) and their coherent states with position-momentum
//! uncertainty diagnostics ([`coherent`]).  Everything is validated
//! against an independent Sturm-sequence spectral oracle ([`verify`]).

pub mod algebra;
pub mod coherent;
pub mod config;
mod dd;
pub mod error;
pub mod grid;
pub mod repro;
pub mod schrodinger;
pub mod specfun;
pub mod susy2;
pub mod susy_chain;
pub mod verify;

pub use error::{Error, Result};
