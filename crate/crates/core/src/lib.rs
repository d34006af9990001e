//! Geometric optics in the space of oriented lines.
//!
//! Oriented lines in Euclidean 3-space are coordinatised by a pair of complex
//! numbers `(xi, eta)`: `xi` is the stereographic coordinate of the direction
//! (projected from the south pole) and `eta` locates the line in the fibre over
//! that direction. On top of this chart the crate provides
//!
//! * [`line_space`]: the incidence map and its inverse,
//! * [`congruence`]: optical scalars, their evolution along rays, focal sets
//!   and orthogonal wavefronts of 2-parameter line families,
//! * [`reflection`]: the reflection law written in line coordinates,
//! * [`cylinder`]: translation-invariant mirrors, their normal congruences,
//!   point-source reflection and the closed-form caustics,
//! * [`oracle`]: a Cartesian ray tracer and Jacobian caustic finder that never
//!   touches line coordinates, used to cross-check everything above.
//!
//! Grid sweeps run on rayon when the `parallel` feature is enabled (default);
//! the output order is always the input order.

// NaN-rejecting guards are written as `!(x > tol)` throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod congruence;
pub mod cylinder;
mod error;
pub mod line_space;
pub mod oracle;
pub mod par;
pub mod reflection;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub use congruence::{
    Flatness, FocalKind, FocalSolution, LineCongruence, OpticalScalars, ParametricCongruence,
};
pub use cylinder::{CylinderParam, ProfileCurve, ProfileShape, Sign};
pub use line_space::{DirCoord, OrientedLine, Point3, UnitVec3};
pub use reflection::{SourceRay, SurfaceFrame};
