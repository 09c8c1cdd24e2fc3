//! Signed-distance scenes with known topology and their rasterization.

mod bounds;
mod grid;
mod sample;
mod scene;
mod text;

pub use bounds::{apply_similarity, bounding_box, is_occupied, normalize_scene, Aabb, NORMALIZED_HALF_EXTENT};
pub use grid::{default_bounds, occupancy, rasterize, FieldKind, VolumeGrid};
pub use sample::{gradient, sample_surface, MAX_PROJECTION_STEPS, SURFACE_TOLERANCE};
pub use scene::{Rotation, SdfScene};
pub use text::{format_scene, parse_scene};

use crate::geom::Vec3;
use crate::scalar::Real;

/// Signed distance of `scene` at `p`.
pub fn eval_sdf<T: Real>(scene: &SdfScene<T>, p: Vec3<T>) -> T {
    scene.eval(p)
}
