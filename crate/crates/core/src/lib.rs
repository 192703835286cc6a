//! Energies of point sets on spheres, spherical designs, and the Jacobi-series
//! machinery relating the two.

// `!(x > 0.0)` is used on purpose so NaN lands in the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod cache;
pub mod cli;
pub mod designs;
pub mod energy;
pub mod error;
pub mod geom;
pub mod jacobi;
pub mod quadrature;

pub use error::{Error, Result};
