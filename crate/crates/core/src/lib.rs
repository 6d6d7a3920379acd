//! Finite-truncation toolkit for pairs of jointly Gaussian analytic functions
//! attached to the Dirichlet space, the Dirichlet operator symbols of
//! contractions, the Chase permutation and Grunsky operators of univalent maps.
//!
//! Everything analytic is carried by truncated Taylor coefficient arrays
//! ([`series`]). Inequalities and identities are checked coefficient-exactly
//! and reported as [`report::BoundReport`] values.
//!
//! Data-parallel sweeps (Monte Carlo, grids, random corpora) run on rayon when
//! the default `parallel` feature is enabled and sequentially otherwise. Both
//! paths produce identical results.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod chase;
pub mod error;
pub mod gaf;
pub mod grunsky;
pub mod matrix;
pub mod par;
pub mod report;
pub mod rng;
pub mod series;
pub mod special;
pub mod symbols;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Crate version embedded in every emitted report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
