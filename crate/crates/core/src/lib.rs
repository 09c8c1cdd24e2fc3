//! Topological analysis of implicit 3D shapes.
//!
//! * [`field`] builds signed distance volumes from CSG scenes.
//! * [`cubical`] computes sublevel-set persistent homology of a volume on its cubical complex.
//! * [`pd`] handles persistence points, vectorizations and diagram distances.
//! * [`latentnet`] holds forward and loss kernels of a set-latent generative stack.
//! * [`metrics`] implements point-set and feature-statistics metrics for generated shapes.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the aliases below fix the
//! scalar for the common cases.

pub mod assignment;
pub mod cubical;
pub mod error;
pub mod field;
pub mod geom;
pub mod latentnet;
pub mod metrics;
pub mod pd;
pub mod scalar;
pub mod vgrd;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Vec3f = geom::Vec3<f32>;
pub type Vec3d = geom::Vec3<f64>;
pub type VolumeGridF32 = field::VolumeGrid<f32>;
pub type VolumeGridF64 = field::VolumeGrid<f64>;
pub type SceneF32 = field::SdfScene<f32>;
pub type SceneF64 = field::SdfScene<f64>;
pub type DiagramsF32 = cubical::PersistenceDiagramSet<f32>;
pub type DiagramsF64 = cubical::PersistenceDiagramSet<f64>;
pub type PointsF32 = pd::PersistencePointSet<f32>;
pub type PointsF64 = pd::PersistencePointSet<f64>;
