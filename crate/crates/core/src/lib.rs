//! Finite-truncation laboratory for Chern characters in cyclic homology and the
//! higher index trace formulas of Toeplitz-type operators on S¹ and S³.
//!
//! The crate is layered: [`op`] wraps dense complex matrices, [`cyclic`] holds
//! the (b, B)-bicomplex, [`chern`] builds Chern characters and transgressions,
//! [`aspanier`] the Alexander–Spanier cochains that are paired against them,
//! [`models`] the truncated Hardy-space operators, and [`index`] the index
//! evaluators together with their independent oracles.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aspanier;
pub mod chern;
pub mod constants;
pub mod cyclic;
pub mod error;
pub mod index;
pub mod models;
pub mod op;
pub mod quadrature;
pub mod runner;
pub mod s3;

pub use aspanier::{ASCochain, FunctionRep, Manifold};
pub use cyclic::{Chain, ConeCocycle, MixedChain, Parity};
pub use error::{Error, Result};
pub use index::{IndexReport, Method};
pub use models::{Model, Space};
pub use op::{Op, C64};
