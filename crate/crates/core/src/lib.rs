//! Rearrangement inequalities for the Dirichlet Laplacian with `L¹` data.
//!
//! The crate evaluates Green potentials of balls in closed form, computes
//! decreasing rearrangements of sampled and piecewise-analytic functions,
//! builds the extremal families that saturate the pointwise bounds
//! `u^*(t) ≤ N_V^*(t) ‖Δu‖₁` and their compactly supported refinements, and
//! evaluates the Zygmund, weak-Lebesgue and exponential norms that follow.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the usual double-precision instantiation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod extremal;
pub mod green;
pub mod norms;
pub mod profile;
pub mod quadrature;
pub mod radial;
pub mod rearrange;
pub mod scalar;
pub mod special;
pub mod target;

pub use error::{Error, Result};
pub use green::{BallGeometry, Scaled};
pub use profile::{Form, MonotoneProfile, Piece, TailBehavior};
pub use radial::{RadialForm, RadialProfile};
pub use rearrange::CellSample;
pub use scalar::Real;

pub type BallGeometry64 = BallGeometry<f64>;
pub type BallGeometry32 = BallGeometry<f32>;
pub type MonotoneProfile64 = MonotoneProfile<f64>;
pub type MonotoneProfile32 = MonotoneProfile<f32>;
pub type RadialProfile64 = RadialProfile<f64>;
pub type RadialProfile32 = RadialProfile<f32>;
pub type CellSample64 = CellSample<f64>;
pub type CellSample32 = CellSample<f32>;
