//! Numerics for minimal ends of finite total curvature in `M x R`, where `M`
//! is a Hadamard surface with pinched curvature `-a^2 <= K_M <= -b^2`.
//!
//! The crate is organised around the objects one meets when truncating such
//! an end:
//!
//! * [`metric`]: conformal disc metrics for `M` and warped polar metrics.
//! * [`end_model`]: the Hopf differential normal form `((m+1) z^m + c i / z)^2 dz^2`,
//!   its branch integrals `F_k` and the level set `Im F = 0`.
//! * [`lift`]: the generalized lift of the square curve through the branches
//!   and the closed polygon `P(C)` it produces.
//! * [`sinh_gordon`]: the field `xi = log|g|` solved on annuli and in natural
//!   coordinates, with decay fits.
//! * [`ledger`]: induced metric, intrinsic and geodesic curvature, and the
//!   Gauss-Bonnet accounting behind the total curvature formula.
//! * [`catenoid`]: rotational catenoid barriers and the comparison inequalities
//!   used under curvature pinching.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod catenoid;
pub mod end_model;
pub mod error;
pub mod ledger;
pub mod lift;
pub mod metric;
pub mod quad;
pub mod sinh_gordon;
pub mod stats;

pub use error::{Error, Result};

pub type Complex = num_complex::Complex64;
