//! Numerical machinery for holomorphic self-maps of the unit disk.
//!
//! The crate is organized around a small expression-tree representation of
//! holomorphic maps ([`HoloMap`]) with exact structural derivatives, path
//! integrals and argument-principle root counting. On top of it sit:
//!
//! - [`caratheodory`]: the class of functions with nonnegative real part,
//!   positivity certification and boundary charges;
//! - [`generators`]: semigroup generators in Berkson-Porta form;
//! - [`approx`]: interpolation-controlled approximant families `q_tau`,
//!   `p_tau`, `f_tau` converging as the null point moves to the boundary;
//! - [`spiral`]: Koenigs functions, the perturbation formula, starlike
//!   factorization and Robertson-type positivity checks;
//! - [`flow`]: one-parameter semigroups by direct integration and by the
//!   Schroeder functional form;
//! - [`spectrum`]: k-valence classification of composition-operator
//!   eigenvalues and numerical valence certification;
//! - [`stock`]: the named library of example maps used by the CLI and the
//!   invariant suite;
//! - [`invariants`]: the registered cross-module invariant checks behind
//!   `diskflow check`.

pub mod approx;
pub mod caratheodory;
pub mod error;
pub mod flow;
pub mod generators;
pub mod holomap;
pub mod invariants;
pub mod spectrum;
pub mod spiral;
pub mod stock;

pub use error::CoreError;
pub use holomap::{DiskGrid, HoloMap};

/// Shorthand used throughout the crate.
pub type Complex = num_complex::Complex64;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, CoreError>;
