//! Simulation of on-demand single-atom preparation in fermionic micro-traps.

// `!(x > 0.0)` guards are meant to reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Tabulated constants keep every digit of their source.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod culling;
pub mod dfg;
pub mod error;
pub mod numeric;
pub mod potential;
pub mod resonance;
pub mod scattering;
pub mod specfun;
pub mod splitting;
pub mod tdse;
mod tridiag;
pub mod units;

pub use error::{Error, Result};
