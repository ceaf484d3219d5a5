//! Numerical analysis of `O(p)×O(q)`-invariant hypersurfaces of constant mean
//! curvature in `R^{p+q}`.
//!
//! The profile curve lives in the orbit-space quadrant and solves a planar
//! ODE that degenerates on both axes and at the origin. This crate provides
//! the vector fields in the regular and blown-up charts, the equilibria on the
//! exceptional divisor, series for the two invariant branches through the
//! origin, an adaptive integrator with event detection, and a classifier for
//! global solution curves.

// `!(a <= b)` is used deliberately so that NaN takes the rejecting branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classify;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod manifolds;
pub mod model;
pub mod series;

pub use error::{Error, Result};
pub use model::{
    BlowupState, CurveSample, Direction, Params, PrincipalCurvatures, ProfileState, Provenance,
    TracedCurve,
};
