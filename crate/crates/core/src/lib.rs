//! Spectral solver and monodromy analysis for Poincaré–Steklov integral
//! equations whose parameter is a real rational map of degree at most three.

// Negated float comparisons are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod elliptic;
pub mod error;
pub mod io;
pub mod lift;
pub mod mobius;
pub mod monodromy;
pub mod pants;
pub mod poly;
pub mod quadrature;
pub mod rational_map;
pub mod spectral;

pub use error::{Error, Result};
