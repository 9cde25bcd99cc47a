//! Production cost modeling with cost attribution.
//!
//! The crate runs day-ahead commitment and hourly look-ahead economic
//! dispatch on a PTDF network, attributes the cost gap between forecast and
//! realized operation to individual loads, renewables and initial
//! generator states by integrating LP shadow prices along a straight path,
//! and turns tail-scenario attributions into renewable capacity haircuts for
//! a risk-averse commitment.
//!
//! Module map:
//! - [`grid`]: network and asset data, series and scenario ingestion
//! - [`lp`]: linear programs, the bundled simplex solver, RHS gradients
//! - [`dispatch`]: economic dispatch model and heuristic commitment
//! - [`attribution`]: path-integrated shadow-price attribution
//! - [`risk`]: tail-scenario risk scores and capacity adjustment
//! - [`simulator`]: rolling day-ahead/real-time simulation and policy comparison
//! - [`cli`]: the `gridrisk` command line

// `!(x >= 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attribution;
pub mod cli;
pub mod dispatch;
pub mod error;
#[cfg(test)]
mod fixtures;
pub mod grid;
pub mod lp;
pub mod plot;
pub mod risk;
pub mod simulator;
pub mod tutorial;

pub use error::{Error, Result};
