//! Numerics and file formats for the modified Veselov–Novikov hierarchy:
//! periodic spectral fields, flow integration with conserved-quantity
//! monitoring, generalized Weierstrass inducing and the `mvn` CLI.
//!
//! The exact symbolic layer lives in [`mvn_core`] and is re-exported as
//! [`algebra`].

// negated comparisons are deliberate: they reject NaN along with the bad range
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub use mvn_core as algebra;

pub mod cli;
pub mod eval;
pub mod evolve;
pub mod fieldio;
pub mod flow;
pub mod ic;
pub mod spectral;
pub mod weierstrass;
