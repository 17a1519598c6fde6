//! Resolution-independent limit of the two-map encoding.
//!
//! A surface point can only be recovered from the pair if it is the first
//! or the last crossing of the camera ray through it. Casting that ray for
//! a dense set of surface samples yields the cloud an infinitely fine pair
//! would decode to; its Chamfer error against the ground truth is the floor
//! that rising resolution converges to.

use rayon::prelude::*;

use super::{chamfer_with, sample_surface, ChamferMode};
use crate::error::Result;
use crate::geometry::camera::Camera;
use crate::geometry::point_cloud::PointCloud;
use crate::geometry::scene::{MeshScene, RayTarget};
use crate::geometry::{Ray, Vec3};

/// Tolerance on whether a sample coincides with the first or last crossing.
const COINCIDENT: f64 = 1e-7;

/// Surface samples (world coordinates) that are first or last crossings of
/// their own camera ray.
pub fn two_hit_cloud(scene: &MeshScene, camera: &Camera, count: usize, seed: u64) -> Result<PointCloud> {
    let samples = sample_surface(scene.mesh(), count, seed)?;
    let origin = camera.center_world();
    let keep: Vec<Vec3> = samples
        .points
        .par_iter()
        .filter(|p| {
            let offset = *p - origin;
            let dist = offset.norm();
            let ray = Ray {
                origin,
                direction: offset / dist,
            };
            match scene.hit_span(&ray) {
                Some((near, far)) => (near - dist).abs() <= COINCIDENT || (far - dist).abs() <= COINCIDENT,
                // Grazing samples the ray test cannot resolve.
                None => false,
            }
        })
        .copied()
        .collect();
    Ok(PointCloud::from_points(keep))
}

/// Share of surface samples that neither map can represent.
pub fn hidden_fraction(scene: &MeshScene, camera: &Camera, count: usize, seed: u64) -> Result<f64> {
    let kept = two_hit_cloud(scene, camera, count, seed)?.len();
    Ok(1.0 - kept as f64 / count as f64)
}

/// Chamfer error between `ground_truth` and the ideal two-hit cloud built
/// from `count` independent samples.
pub fn two_hit_floor(
    scene: &MeshScene,
    camera: &Camera,
    ground_truth: &PointCloud,
    count: usize,
    seed: u64,
    mode: ChamferMode,
) -> Result<f64> {
    let ideal = two_hit_cloud(scene, camera, count, seed)?;
    chamfer_with(ground_truth, &ideal, mode)
}
