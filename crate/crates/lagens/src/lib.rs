//! High-precision numerics for Laguerre-type random-matrix ensembles.
//!
//! The library computes, at arbitrary decimal precision:
//!
//! * the equilibrium measure of a polynomial potential `V(x) = x + Σ tₖ xᵏ`
//!   confined to the positive half-line (endpoint, density, log-potential,
//!   Euler–Lagrange constant),
//! * orthonormal-polynomial recurrence tables for the weight
//!   `x^α e^{−N V(x)}`, by two independent routes,
//! * finite-`N` log partition functions, again by two independent routes,
//!   plus the closed form for the undeformed weight,
//! * the one-point correlation function and linear eigenvalue statistics,
//! * Bessel (hard-edge) and Airy (soft-edge) local approximations of the
//!   one-point function, and
//! * asymptotic-expansion fits in powers of `1/N²` with Richardson
//!   extrapolation and parity diagnostics.
//!
//! All computations thread an explicit [`PrecisionContext`]; there is no
//! ambient global precision.

pub mod asymptotics;
pub mod correlation;
pub mod equilibrium;
mod error;
pub mod kernels;
pub mod numerics;
pub mod orthopoly;
pub mod partition;
pub mod potential;
mod precision;

pub use error::{Error, Result};
pub use potential::{DomainParams, Potential};
pub use precision::{format_sig, PrecisionContext};
