//! Real-time generation of critical cut-in scenarios against a black-box
//! ego controller.
//!
//! An agent vehicle is driven by a minimax planner that steers it toward the
//! state of perfect criticality just ahead of the ego while staying inside
//! the scenario's requirements. Between episodes the planner's cost weights
//! are adapted from pairwise criticality scores.

// Validation compares with negated predicates so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod adapt;
pub mod agent;
pub mod ego;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod kinematics;
pub mod scoring;
pub mod sim;
pub mod types;

pub use error::{BridgeError, Error, Result};
