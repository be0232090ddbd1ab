//! Numerical kernels for the Dirichlet divisor problem and the mean square of
//! the Riemann zeta-function on the critical line.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature; floating-point functions then come from `libm`. Everything here is
//! pure computation: file formats, caches, parallel drivers and the command
//! line live in the `zdl` companion crate.
//!
//! Module map:
//!
//! * [`divisor`]: divisor sieve, `Δ(x)`, `Δ*(x)` exactly and by the truncated
//!   Voronoi series.
//! * [`zeta`]: `ζ(1/2 + it)` by Euler–Maclaurin and Riemann–Siegel.
//! * [`quad`]: mean square integral, `E(T)`, power moments and the Gaussian
//!   smoothed moment `J_k(T, G)`.
//! * [`atkinson`]: the oscillatory sums approximating `E(T)`.
//! * [`grid`]: uniform grids of `E`, `Δ*` and `E*` samples.
//! * [`estar`]: moments of `E*`, the remainder `R(T)`, smoothing inequalities,
//!   large values, pointwise bound checks.
//! * [`fit`]: log–log exponent fitting.
//! * [`quadruple`]: near-coincidence counting of sums of k-th roots.
#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod atkinson;
pub mod divisor;
mod error;
pub mod estar;
pub mod fit;
pub mod grid;
pub(crate) mod math;
pub mod quad;
pub mod quadruple;
mod rs_coeffs;
pub mod sum;
pub mod zeta;

pub use error::{Error, Result};

/// Euler's constant `γ`, to more digits than an `f64` can hold.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_09;

/// Number of significant digits of [`EULER_GAMMA`] as written in the source.
pub const EULER_GAMMA_DIGITS: u32 = 24;
