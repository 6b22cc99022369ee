//! Numerical kernels for Fourier frames of self-similar measures on the line.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure function
//! of immutable inputs; IO, file formats, parallel sweeps and the command line
//! driver live in the `fframe` companion crate.
//!
//! Module map:
//!
//! * [`measure`]: atomic and piecewise-constant-density measures, convolution,
//!   discretization, mollification and window masses.
//! * [`ifs`]: affine iterated function systems `x -> (x + b) / R`, their
//!   cylinders, invariant measures, certified Fourier transforms, complement
//!   digit sets and dual (Plancherel) weights.
//! * [`frame`]: Gram matrices of cylinder subspaces and the resulting frame
//!   bounds, plus the probe showing `1_[0,1] dx + δ_2` admits no frame measure.
//! * [`linalg`]: extreme eigenvalues of dense Hermitian matrices with a residual
//!   certificate.
//! * [`beurling`]: upper/lower Beurling densities, dimension estimates and
//!   sampling sets.
//! * [`reconstruct`]: digit splitting `B ⊕ C = D`, the projection `p`, and
//!   Fourier reconstruction by quadrature.

#![no_std]
// `!(x > 0.0)` style guards are deliberate: they reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod beurling;
mod error;
pub mod frame;
pub mod ifs;
pub mod linalg;
mod math;
pub mod measure;
pub mod reconstruct;

pub use error::{Error, Result};
pub use math::cis_turns;
pub use num_complex::Complex64;
