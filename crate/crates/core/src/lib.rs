//! Restricted isometry bounds for `lq` minimization (`0 < q <= 1`), exact
//! RIC/ROC enumeration for small matrices, and desk-scale sparse recovery.

// NaN must fail parameter checks, hence `!(x > 0.0)` style guards.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod harness;
pub mod norms;
pub mod numerics;
pub mod polytope;
pub mod qfuncs;
pub mod rip;
pub mod solvers;

pub use error::{Error, Result};
