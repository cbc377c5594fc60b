//! Rearrangement and polarization machinery for the one-dimensional
//! Poisson problem -u'' = f on [-pi, pi] with Robin boundary conditions.
//!
//! The crate has three layers:
//!
//! * [`grid`] and [`rearrange`] discretize sources as piecewise-constant
//!   grid functions and implement their rearrangements (decreasing,
//!   symmetric decreasing, polarization) as exact cell permutations,
//!   together with the equality sets and the iterated-polarization scheme
//!   that drives any source to its symmetric-decreasing shape.
//! * [`robin`] solves the boundary-value problem two independent ways: in
//!   closed form through the explicit kernel, and by a finite-difference
//!   oracle that never sees the kernel.
//! * [`checks`] evaluates the comparison principles tying the two layers
//!   together (product-integral inequalities, convex-mean monotonicity,
//!   majorization) and reports each one with a slack and a verdict.

pub mod checks;
pub mod convex;
pub mod error;
pub mod grid;
pub mod rearrange;
pub mod rng;
pub mod robin;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, DOMAIN_HALF_WIDTH};
