//! Heuristic solvers for convex problems with nonconvex set constraints.
//!
//! A [`model::Problem`] couples a convex quadratic objective and conic
//! (zero / nonnegative / second-order) constraints with *nonconvex atoms*:
//! slices of the variable vector constrained to lie in a set from the
//! [`sets`] catalog. Every set knows how to project onto itself, how to
//! relax itself to convex constraints, how to restrict itself to a convex
//! subset around a member, and (for discrete sets) how to enumerate
//! neighbors of a member.
//!
//! On top of that machinery [`heuristics`] provides polishing,
//! relax-round-polish, neighbor search and nonconvex ADMM, all driven by
//! the embedded first-order conic solver in [`conic`]. [`oracle`] solves
//! small discrete instances exactly by enumeration.

// Dense kernels index several arrays in lockstep, and `!(x > 0.0)` is
// used on purpose so that NaN fails validation.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod conic;
pub mod error;
pub mod heuristics;
pub mod model;
pub mod numerics;
pub mod oracle;
pub mod sets;

pub use error::{Error, Result};
