//! Extended generalized Fiedler pencils (EGFPs) of matrix polynomials and their
//! bordered counterparts for rational matrices `G(λ) = P(λ) + C(λE - A)^{-1}B`.
//!
//! Pencils are assembled symbolically: every block is a noncommutative polynomial
//! in the coefficients `A_j`, their inverses and the assigned matrices, so
//! operation-freeness and bandwidth are exact structural questions. Dense
//! realizations over complex or exact integer scalars come from binding values
//! to the symbols.

pub mod blockmat;
pub mod expr;
pub mod golden;
pub mod io;
pub mod oracle;
pub mod pencils;
pub mod rational;
pub mod recovery;
pub mod sample;
pub mod suites;
pub mod tuples;
