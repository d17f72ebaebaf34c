//! Spectral analysis of half-line Jacobi and discrete Schrödinger operators
//! through their Verblunsky coefficients, with Prüfer-variable propagation,
//! a continuum analogue, and an independent Sturm-bisection oracle.

pub mod bounds;
pub mod continuum;
pub mod corpus;
pub mod eigenfunctions;
pub mod error;
pub mod generators;
pub mod numerics;
pub mod oracle;
pub mod parallel;
pub mod potential;
pub mod prufer;
pub mod suite;
pub mod verblunsky;

pub use error::{Error, Result};
pub use numerics::Tolerances;
pub use potential::{JacobiCoeffs, Potential};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
