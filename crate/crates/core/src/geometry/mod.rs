//! Signed distance fields and indenter surface sampling.

mod grid;
mod mesh;
mod sampling;
mod sdf;

pub use grid::GridSdf;
pub use mesh::{closest_point_on_triangle, TriangleMesh};
pub use sampling::{sample_surface, sample_surface_with, SamplingOptions, SurfaceSamples, DEFAULT_SAMPLE_COUNT};
pub use sdf::{Aabb, Sdf};

use crate::types::TactileGrid;

/// Flat membrane: solid below `z = plane_height`.
pub fn elastomer_sdf(grid: &TactileGrid) -> Sdf {
    Sdf::HalfSpace {
        height: grid.plane_height,
    }
}
