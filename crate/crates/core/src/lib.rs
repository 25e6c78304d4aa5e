//! Exact set-partition combinatorics and the moment identities built on it.
//!
//! The crate is organised by subject:
//!
//! - [`combinat`]: Stirling, Bell and hierarchy numbers, lazy enumerators for
//!   set partitions, pairings, permutations by cycles and hierarchies, and the
//!   partition-lattice Möbius factor.
//! - [`moments`]: exact conversions between ordinary, factorial and cumulant
//!   moments of a scalar variable.
//! - [`fock`]: Boson vacuum expectations evaluated combinatorially and by a
//!   truncated matrix oracle.
//! - [`fields`]: finite-index field models, Green function tables,
//!   Dyson–Schwinger residuals, Legendre duality, hierarchy expansions and
//!   Wick monomials.
//! - [`ito`]: off-diagonal multiple stochastic integrals for Wiener and
//!   compensated Poisson integrators.
//! - [`arith`]: factorisation, multiplicative functions and Dirichlet series.
//!
//! [`verify`] bundles deterministic invariant suites used by the command line
//! tool.

pub mod arith;
pub mod combinat;
pub mod error;
pub mod fields;
pub mod fock;
pub mod ito;
pub mod moments;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
