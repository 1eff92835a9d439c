//! Size-guaranteed triangular mesh generation by packing interacting "bubbles"
//! inside a planar domain, plus lightweight P1/P2 Poisson solvers and the mesh
//! statistics used to study how edge-length control drives solver accuracy.
//!
//! The pipeline runs in stages, each usable on its own:
//!
//! 1. [`geometry`]: domain presets (signed distance + boundary parametrization),
//! 2. [`sizing`]: target edge-length fields,
//! 3. [`bubbles`]: damped particle dynamics that spaces mesh nodes,
//! 4. [`triangulate`]: Delaunay triangulation of the bubble centers, clipped to
//!    the domain,
//! 5. [`metrics`]: edge/shape statistics of the result,
//! 6. [`fem`]: P1/P2 Lagrange solvers and error norms on benchmark problems,
//! 7. [`harness`]: convergence studies over a sequence of mesh sizes, with CSV,
//!    mesh-file and SVG outputs.

pub mod bubbles;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod harness;
pub mod metrics;
pub mod sizing;
pub mod triangulate;
mod vec2;

pub use error::{Error, Result};
pub use vec2::{Aabb, Vec2};
