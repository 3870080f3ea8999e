//! Numerical ranges and numerical radii of small complex matrices, with a
//! certificate-producing verifier for `w(AB) ≤ w(A)w(B)` on commuting 2×2
//! pairs.
//!
//! Modules:
//! - [`mat`]: dense complex arithmetic, 2×2 eigenvalues and Schur form,
//!   Hermitian extreme eigenvalues, norms.
//! - [`numrange`]: `W(A)` and `w(A)` by the support function (any order) and
//!   by the elliptical range of 2×2 matrices.
//! - [`method`]: named registry of numerical-radius algorithms.
//! - [`commute`]: canonical form of commuting 2×2 pairs and the
//!   convex-combination certificates behind the product bound.
//! - [`family`]: named registry of commuting-pair generators.
//! - [`bounds`]: inequality checks, equality classification and ratio search.

pub mod bounds;
pub mod commute;
pub mod error;
pub mod family;
pub mod mat;
pub mod method;
pub mod numrange;
pub mod optimize;

pub use error::{Error, Result};
pub use mat::{c64, CMat, CScalar, UnitaryWitness};
