//! Quantized orthonormal systems and the numerical harness around them.
//!
//! A quantized orthonormal system is a family of matrix-valued functions
//! `φ^σ: Ω → M_{d_σ}` whose entries are orthogonal in `L²(Ω)` with squared
//! norm `1/d_σ`. This crate builds such systems (finite group duals, a
//! truncated SU(2) dual, random-matrix systems, blocked scalar bases),
//! computes the transform `f ↦ (∫ f φ^σ* dμ)_σ` and its inverse for scalar
//! and vector-valued data, and runs the inequality checks and constant
//! estimators in [`experiments`].
//!
//! The crate is `no_std` (with `alloc`) unless the `std` feature is on.
//! The `parallel` feature fans Monte Carlo work out over rayon; every
//! random draw comes from a per-item [`RngStream`], so results do not
//! depend on the thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

mod error;
mod par;

pub mod experiments;
pub mod matcore;
pub mod spaces;
pub mod systems;
pub mod transforms;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Exponent, RngStream};
pub use num_complex::Complex64;
