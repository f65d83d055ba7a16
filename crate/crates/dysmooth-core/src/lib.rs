//! Measuring smoothness of functions on the unit cube `I^d = [0,1]^d` from
//! their values on dyadic meshes.
//!
//! The central object is the discrete modulus of smoothness `Psi_r(f, n)`:
//! the largest r-th finite difference of `f` taken along a coordinate axis
//! with step `2^-n`, based at a point of the level-`n` dyadic mesh. This
//! crate computes `Psi_r`, reconstructs functions through a nested
//! tensor-product Lagrange spline cascade on basic cubes, certifies the
//! algebraic constants behind the comparison theorems with exact integer
//! arithmetic, and classifies functions by Hölder exponent and saturation.
//!
//! The crate is `no_std` compatible (requires `alloc`). All IO, file
//! formats and the command line live in the companion `dysmooth` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod cascade;
pub mod certificates;
pub mod error;
pub mod fdiff;
pub mod mesh;
pub mod moduli;

pub use error::Error;

/// Result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;
