//! Monte Carlo and closed-form tools for extreme values of unipotent flows on
//! the space of unimodular lattices in the plane.

// Range checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod harness;
pub mod lattice;
pub mod quadrature;
pub mod regions;
pub mod sampler;

pub use error::{Error, Result};
pub use geometry::{BoundingBox, Mat2, Vec2};
pub use lattice::{LatticePoint, UnimodularBasis};
pub use regions::{Region, SweepProfile};
