//! Pseudo-spectral simulation and verification toolkit for the scaled
//! compressible ideal MHD system on the periodic box, with independent Mach
//! and Alfvén numbers.
//!
//! The crate provides:
//!
//! - spectral calculus on `T³`/`T²` ([`field`], [`grid`]): transforms,
//!   derivatives, inverse Laplacians, averages, Sobolev norms, the 2D
//!   Leray-Helmholtz projection and 2/3-rule dealiasing;
//! - the Alfvén/Mach operator pair, the fast/intermediate/slow mode
//!   decomposition, the exact μ-dependent Fourier multipliers and per-mode
//!   eigenstructure verification ([`modes`], [`multipliers`], [`symbol`]);
//! - time integration of the full system with an exact per-mode exponential
//!   for the stiff constant-coefficient part ([`solver`]), the z-independent
//!   limit system and its correctors ([`limit`], [`corrector`]);
//! - well-prepared initial data construction and validation ([`init`]);
//! - a sweep harness that measures convergence-rate exponents against their
//!   predictions ([`metrics`], [`sweep`], [`fit`], [`report`]).
//!
//! Data-parallel kernels use rayon when the `parallel` feature (default) is
//! enabled and fall back to sequential loops otherwise; see [`exec`].

pub mod config;
pub mod corrector;
pub mod diag;
pub mod error;
pub mod exec;
pub mod field;
pub mod fit;
pub mod grid;
pub mod init;
pub mod limit;
pub mod metrics;
pub mod modes;
pub mod multipliers;
pub mod params;
pub mod report;
pub mod snapshot;
pub mod solver;
pub mod state;
pub mod sweep;
pub mod symbol;
pub mod synth;

pub use error::{Error, Result};
