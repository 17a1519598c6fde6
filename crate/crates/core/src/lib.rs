//! Codec and evaluation toolkit for the two-depth-map ("mould") shape
//! representation.
//!
//! A mesh is encoded as a pair of registered depth maps holding the closest
//! and farthest ray intersection for every pixel of a camera. Decoding the
//! pair yields an oriented point cloud of the full surface. A surface voxel
//! grid is provided as a baseline, together with Chamfer and depth-accuracy
//! metrics, the training loss evaluators, and the resolution sweep that
//! compares both representations at matched dimensionality.

pub mod codec;
pub mod error;
pub mod geometry;
pub mod losses;
pub mod metrics;
pub mod sequence;
pub mod shapes;
pub mod voxel;

pub use codec::{decode, encode, encode_with_camera, foreground_mask, EncodeWarning, MouldPair};
pub use error::{Error, Result};
pub use geometry::bvh::Bvh;
pub use geometry::camera::{Camera, Ray};
pub use geometry::mesh::Mesh;
pub use geometry::point_cloud::{PointCloud, Provenance};
pub use geometry::{Aabb, Vec3};
pub use voxel::VoxelGrid;

/// Background distance behind the subject used for evaluation, in meters.
pub const DEFAULT_BACKGROUND: f64 = 1.5;

/// Default surface-selection margin below the background value, in meters.
pub const DEFAULT_EPSILON: f64 = 0.01;

/// Default square output resolution of an encoded pair.
pub const DEFAULT_RESOLUTION: usize = 128;
