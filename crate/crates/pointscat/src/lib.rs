//! Spectral toolkit for the Laplacian with a delta potential on an
//! irrational torus (and on a Dirichlet rectangle).
//!
//! The crate reconstructs, at desk scale, the spectral objects attached to a
//! point scatterer whose squared side-ratio parameter γ is a diophantine
//! irrational:
//!
//! * [`lattice`] enumerates the distinct dual-lattice norms (Laplace
//!   eigenvalues) with exact multiplicities, representatives and angles;
//! * [`spectrum`] solves the weak-coupling secular equation, one new
//!   eigenvalue per interlacing interval, and generates arbitrary
//!   interlacing sequences for the strong-coupling regime;
//! * [`eigenfunction`] builds Green's-function coefficients and the
//!   momentum-space probability measures they induce;
//! * [`observables`] evaluates matrix elements of quantized phase-space
//!   observables and the scar-deviation diagnostics;
//! * [`statistics`] computes pair correlation, gap filters, clumping and
//!   short-interval statistics together with their window reports;
//! * [`dirichlet`] carries the same pipeline over to a rectangle with
//!   Dirichlet boundary conditions and an interior scatterer;
//! * [`oracle`] holds slow brute-force reference paths for everything the
//!   fast routines compute, so each statistic can be cross-checked.
//!
//! All tables are immutable after construction and safe to share across
//! threads; the heavier loops parallelize with rayon.

pub mod dirichlet;
pub mod eigenfunction;
pub mod error;
pub mod lattice;
pub mod numutil;
pub mod observables;
pub mod oracle;
pub mod precision;
pub mod report;
pub mod spectrum;
pub mod statistics;

pub use error::{Error, Result};
