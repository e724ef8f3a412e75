//! Numerical spectral theory for ergodic CMV matrices.
//!
//! The crate builds unitary truncations of extended CMV matrices from
//! concrete ergodic Verblunsky families, and computes the objects that tie
//! their spectral data together: the density of states and its logarithmic
//! potential, Lyapunov exponents of the Szegő cocycle, Carathéodory, Schur
//! and Green functions, and radial boundary values of all of these.
//! [`kotani`] composes them into checks of the averaging formula for the
//! absolutely continuous part of the density of states and of the
//! characterization of almost-sure purely absolutely continuous spectrum.
//!
//! Everything here is pure computation over `alloc`; file formats, the CLI
//! and thread pools live in the companion `cmv-cli` crate.

#![no_std]
// Negated comparisons are how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod angle;
pub mod boundary;
pub mod cmv;
pub mod cocycle;
pub mod dos;
pub mod ergodic;
mod error;
pub mod exec;
pub mod kotani;
pub mod linalg;
pub mod measure;
pub mod schur;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// `1 / (2π)`, the boundary density of normalized Lebesgue measure.
pub const INV_TWO_PI: f64 = 1.0 / core::f64::consts::TAU;
