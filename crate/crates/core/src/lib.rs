//! Work statistics, Lanczos coefficients and spread complexity for sudden
//! quantum quenches.
//!
//! The crate connects two descriptions of the same quench:
//!
//! * the statistics of the work done ([`workstats`], [`bell`]): spectra,
//!   characteristic functions, moments and cumulants;
//! * the Krylov-chain picture ([`lanczos`], [`krylov`]): Lanczos coefficients
//!   obtained from those moments and the spread complexity of the evolving
//!   state.
//!
//! [`chain`] and [`fieldtheory`] supply closed forms for a harmonic chain and a
//! free massive boson in `d` dimensions which both routes are checked against.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::wrong_self_convention)]

pub mod bell;
pub mod chain;
pub mod cli;
pub mod error;
pub mod fieldtheory;
pub mod krylov;
pub mod lanczos;
mod quadrature;
pub mod scalar;
pub mod series;
pub mod workstats;

pub use error::{Error, Result};
pub use scalar::{Complex, FloatScalar, RBig, Real, RealScalar, Scalar};
