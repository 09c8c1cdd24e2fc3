//! Persistence points `(birth, persistence)`, truncation and editing, persistence
//! images and landscapes, and matching distances between diagrams.

mod distance;
mod points;
mod svg;
mod vectorize;

pub use distance::{bottleneck_distance, diagonal_distance, wasserstein_distance, BOTTLENECK_MAX_POINTS, WASSERSTEIN_MAX_POINTS};
pub use points::{table_to_points, to_points, PersistencePoint, PersistencePointSet};
pub use svg::diagram_svg;
pub use vectorize::{
    image_to_raw, landscape_to_tsv, linspace, persistence_image, persistence_landscape, tent, PersistenceImageParams,
    PiRange, PiWeight, DEFAULT_PI_RESOLUTION, DEFAULT_PI_SIGMA,
};

/// Number of points fed to the topology encoder.
pub const DEFAULT_TOP_K: usize = 16;
