//! Exact symbolic machinery for the modified Veselov–Novikov hierarchy.
//!
//! The crate is `no_std` (it needs `alloc`). It provides
//!
//! * [`poly::DiffPoly`]: differential polynomials in `p, ω, ζ, ω̄, ζ̄` with
//!   arbitrary-precision rational coefficients, kept in a normal form where
//!   the nonlocal constraints `∂̄ω = ∂(p²)` and `∂̄ζ = ∂(p²ω − (∂p)²)` (and
//!   their conjugates) have been eliminated;
//! * [`operator::MatrixOperator`]: 2×2 matrix differential operators in
//!   `∂, ∂̄` with composition, commutators and the conjugation map that
//!   turns a `(+)` deformation into its `(−)` partner;
//! * [`parse`]: a small expression language for both, with a canonical
//!   printer whose output parses back to the same value;
//! * [`verifier`]: the first two flows, the second-flow deformation
//!   operators, and exact checks of the compatibility, telescoping and flux
//!   identities.
//!
//! Wirtinger convention: `z = x + iy`, `∂ = (∂x − i∂y)/2`, `∂̄ = (∂x + i∂y)/2`.

#![no_std]

extern crate alloc;

pub mod operator;
pub mod parse;
pub mod poly;
pub mod rewrite;
pub mod symbol;
pub mod verifier;

pub use operator::{Mat2, MatrixOperator};
pub use parse::{parse, parse_operator, parse_poly, Expr, ParseError};
pub use poly::{Coeff, DiffPoly, Monomial, Wirtinger};
pub use symbol::{DerivSymbol, Generator};
pub use verifier::{build_triple_n2, flow_rhs_symbolic, FluxForm, LaxTriple, Part};
