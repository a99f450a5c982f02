//! Bounded Laurent monomials in the cluster variables of finite-type cluster
//! algebras.
//!
//! The pipeline is: build a seed ([`seeds`]), walk its bipartite belt to list
//! every cluster variable ([`finite_type`]), form the u-variables
//! ([`uvars`]), and answer cone questions with exact certificates
//! ([`cones`]). [`grassmannian`] specialises all of this to Plücker
//! coordinates.

pub mod cones;
pub mod error;
pub mod exact_arith;
pub mod expr;
pub mod finite_type;
pub mod grassmannian;
pub mod linalg;
pub mod seeds;
pub mod uvars;

pub use error::{Error, Result};
pub use exact_arith::{Integer, LaurentPolynomial, Rational};
