//! Numerical analysis of the fractal function family
//! `f(t) = sum_{m>=0} alpha^m phi(b^m t)`.
//!
//! The crate computes partition sums of `f` along the b-adic grids, the
//! exact finite laws of the associated increment process, moments of
//! (non-symmetric) infinite Bernoulli convolutions, and regime
//! classification of a parameter pair `(alpha, b)`.
//!
//! The crate is `no_std` (with `alloc`); IO, CLI and file formats live in
//! the companion `fracvar` crate.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod analysis;
pub mod base;
pub mod error;
pub mod fractal;
pub mod increments;
pub mod kahan;
pub mod moments;
pub mod variation;

pub use base::{AdmissibilityReport, BaseFunction, SufficientConditionReport};
pub use error::CoreError;
pub use fractal::FractalSpec;

/// Default truncation tolerance for series evaluation of `f`.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default cap on the number of grid increments in a partition sum.
pub const DEFAULT_INCREMENT_BUDGET: u64 = 30_000_000;

/// Default cap on the number of atoms of an exact increment distribution.
pub const DEFAULT_ATOM_BUDGET: u64 = 10_000_000;
