//! Reliability-aware multicast resource allocation for V2X cellular networks.
//!
//! [`channel`] maps geometry to per-RB success probabilities, [`model`]
//! turns decisions into utility, [`association`] and [`solvers`] produce
//! decisions, and [`sim`] runs replicated campaigns over moving vehicles.

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod association;
pub mod channel;
pub mod error;
pub mod exec;
pub mod model;
pub mod sim;
pub mod solvers;
pub mod validate;

pub use error::{Error, Result};
