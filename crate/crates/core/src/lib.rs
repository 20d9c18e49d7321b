//! Differential geometry of surfaces immersed in ℝ³ endowed with an
//! admissible (smooth, strictly convex, symmetric) norm.
//!
//! The pipeline runs bottom-up: [`norms`] supplies the gauge, the support
//! function and the map `u` from Euclidean normals to the unit sphere;
//! [`surfaces`] supplies second-order chart jets; [`geometry`] assembles the
//! pointwise curvature data; [`distances`] and [`blaschke`] build the
//! distance-function and affine-normal machinery on top.

pub mod blaschke;
pub mod distances;
pub mod error;
pub mod geometry;
pub mod norms;
pub mod numerics;
pub mod surfaces;

pub use error::{Error, Result};
pub use geometry::{point_geometry, PointGeometry};
pub use norms::{JetSource, NormModel};
pub use numerics::NumericsConfig;
pub use surfaces::SurfacePatch;
