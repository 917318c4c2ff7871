//! Operator calculus over Cayley-Dickson algebras.
//!
//! The crate builds up in layers:
//!
//! - [`algebra`]: hypercomplex arithmetic at any doubling level, the central
//!   complexification and real matrix representations;
//! - [`matrix`] / [`seq`]: fibers, block matrices and band-limited periodic
//!   operators on two-sided sequences;
//! - [`symbol`]: the Fourier symbol of a periodic band operator (blocked
//!   Laurent coefficients, circle evaluation, Cesaro summation);
//! - [`invert`]: Neumann series, perturbed left inverses and symbol-based
//!   inversion with margins and tail control;
//! - [`spectra`]: spectrum clouds via the union-over-circle formula with a
//!   block-circulant truncation oracle;
//! - [`kernel`]: discretization of periodic integral kernels into blocked
//!   sequence operators and the multi-torus invertibility test;
//! - [`wiener`]: circle/line Wiener lemmas (window localization, pointwise
//!   inversion, Fejer smoothing, translate density);
//! - [`io`]: JSON/CSV schemas shared with the command-line front end.

pub mod algebra;
pub mod error;
pub mod invert;
pub mod kernel;
pub mod matrix;
pub mod seq;
pub mod spectra;
pub mod rep;
pub mod symbol;
pub mod testgen;

pub use algebra::{CdComplex, CdNumber, SignTable};
pub use error::{Error, Result};
pub use matrix::{CdMatrix, CdVector};
pub use seq::{BandPeriodicOp, FiniteSeq};
