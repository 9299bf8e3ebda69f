//! Numerical laboratory for the half-flux Aharonov-Bohm operator with a pole
//! approaching a flat boundary point.
//!
//! The crate is `no_std` (with `alloc`). It covers:
//!
//! - [`mesh`]: graded triangular meshes of half-disks with slit insertion,
//! - [`gauge`]: the real cut-gauge formulation of `(i∇ + A_a)^2` and its
//!   finite-element assembly,
//! - [`eigen`]: lowest eigenpairs of the sparse generalized problem,
//! - [`field`]: point evaluation and arc/disk integrals of analytic and FE fields,
//! - [`almgren`]: boundary mass, local energy and frequency diagnostics,
//! - [`crack`]: the limit crack problem on a truncated half-plane,
//! - [`ray`]: sweeps of the pole along straight lines and the rate/coefficient checks.
//!
//! IO, configuration and the command-line front end live in the `abpole` crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod almgren;
pub mod bessel;
pub mod cholesky;
pub mod crack;
pub mod dense;
pub mod eigen;
pub mod error;
pub mod fe;
pub mod field;
pub mod gauge;
pub mod geometry;
pub mod locate;
pub mod mesh;
pub mod quadrature;
pub mod ray;
pub mod sparse;

pub use error::{Error, Result};
pub use geometry::{Direction, Point};
