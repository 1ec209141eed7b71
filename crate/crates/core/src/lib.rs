//! Geometry of the neutral metric `G(X,Y) = g(ΠX,KY) + g(KX,ΠY)` on the
//! tangent bundle of a Riemannian manifold, with numerical checks of its
//! curvature, geodesics and Lagrangian submanifolds.

// Index loops mirror the tensor formulas; `!(x > eps)` also rejects NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod curvature;
pub mod error;
pub mod expr;
pub mod fd;
pub mod geodesics;
pub mod lagrangian;
pub mod line_space;
pub mod manifold;
pub mod ode;
pub mod sampling;
pub mod source_fields;
pub mod submanifold;
pub mod tangent_bundle;
pub mod tensor;
pub mod verify;

pub use error::{Error, Result};
