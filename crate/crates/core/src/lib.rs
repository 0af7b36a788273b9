//! Numerical laboratory for Orlicz-growth nonlinear potential theory.
//!
//! The crate covers Young-function algebra ([`young`]), decreasing and
//! maximal rearrangements ([`rearrange`]), measure data ([`measure`]),
//! generalized Wolff potentials ([`wolff`]), the Uhlenbeck vector field
//! ([`field`]), a 2-D finite-element solver for `-div A(x, Du) = mu`
//! ([`solver`]), estimate verification ([`verify`]) and the scenario runner
//! behind the `potlab` binary ([`scenario`]).

// `!(x > 0.0)` style checks deliberately reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod field;
pub mod measure;
pub mod quad;
pub mod rearrange;
pub mod scenario;
pub mod solver;
pub mod verify;
pub mod wolff;
pub mod young;

pub use error::{Error, Result};
pub use exec::Exec;
