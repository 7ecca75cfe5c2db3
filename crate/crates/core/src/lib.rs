//! Oracle-based solvers for nonsmooth convex optimization over simple sets.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod linalg;
pub mod moreau;
pub mod oracles;
pub mod par;
pub mod problems;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
