//! Evaluation metrics for generated shapes: Chamfer and EMD point-set distances,
//! 1-NNA, coverage, and the Fréchet distance on feature statistics.

mod distance;
mod fid;
mod kdtree;
mod nna;
mod points;

pub use distance::{chamfer, chamfer_root, emd, ShapeDistance, EMD_MAX_POINTS};
pub use fid::{fid, fid_multiview, FeatureStats, DEFAULT_VIEWS};
pub use kdtree::KdTree;
pub use nna::{coverage, cross_distances, one_nna};
pub use points::{PointSet, SetRole, ShapeSet};
