//! Exact symplectic classification over the p-adic numbers.
//!
//! The crate classifies symmetric 2x2 and 4x4 matrices over Q_p up to
//! congruence by symplectic matrices, derives the local linear models of
//! p-adic integrable systems at critical points, counts normal forms in
//! all dimensions, and ships a floating-point real classifier for
//! cross-checking against the classical Weierstrass-Williamson theory.

pub mod census;
pub mod classify;
pub mod error;
pub mod ext;
pub mod ext_tables;
pub mod integrable;
pub mod json;
pub mod padic;
pub mod reals;
pub mod rng;
pub mod symplin;

pub use error::{ArithError, Result};
pub use padic::{PadicScalar, Prime};
