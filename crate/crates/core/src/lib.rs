//! Kirchhoff plate bending as three consecutively solved second-order
//! problems, with the boundary coupling condition enforced through a
//! Lagrange-multiplier space on curvilinear polygonal boundaries.
//!
//! The crate provides single-patch B-spline/NURBS discretization spaces,
//! the multiplier space construction, assembly of all bilinear forms, sparse
//! direct solvers for the three stages, and the verification machinery
//! (exact benchmark solutions, error norms, convergence studies) driven by
//! the `plate-bench` CLI.

pub mod assembly;
pub mod bspline;
pub mod error;
pub mod geometry;
mod linalg;
pub mod material;
pub mod multiplier;
pub mod pipeline;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod spline;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{unit_disk_patch, unit_square_patch, BcTag, GeometryPatch};
pub use material::{sym_curl, IsotropicMaterial, Mat2};
