//! Lattice-localized frames in the continuum.
//!
//! The crate builds the magnetic Gabor frame over Landau levels, analyses its
//! frame operator on finite windows, certifies exponential localization of
//! `S^{-p}` matrix elements, and runs exact many-body dynamics for fermions
//! living in frame modes (Lieb-Robinson light cones, volume convergence and
//! quasi-free expectations).
//!
//! Units: `hbar = m = c = 1`; the magnetic length `ell_b` is the only scale.
//! The symplectic form is `wedge(a, b) = a[0] * b[1] - a[1] * b[0]`.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fock_sim;
pub mod format;
pub mod frame_analysis;
pub mod interactions;
pub mod lattice;
pub mod linalg;
pub mod magnetic_frame;
pub mod quadratic;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Two-dimensional real point.
pub type Point = [f64; 2];
