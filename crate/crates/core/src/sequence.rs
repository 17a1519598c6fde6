//! Camera placement for per-frame ground-truth generation.
//!
//! A sequence draws one subject distance at its start and keeps the camera
//! fixed for every later frame, so the subject moves inside a static view.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::camera::front_view_pose;
use crate::{Camera, Mesh};

pub const MEAN_SUBJECT_DISTANCE: f64 = 8.0;
pub const SUBJECT_DISTANCE_SD: f64 = 1.0;

/// Draws below this are rejected so the subject stays well in front of the camera.
pub const MIN_SUBJECT_DISTANCE: f64 = 1.0;

/// Frames per sequence; longer directories are truncated.
pub const FRAMES_PER_SEQUENCE: usize = 100;

/// Subject distance for the sequence identified by `seed`.
pub fn sample_subject_distance(seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(MEAN_SUBJECT_DISTANCE, SUBJECT_DISTANCE_SD).expect("constant parameters");
    loop {
        let d = normal.sample(&mut rng);
        if d >= MIN_SUBJECT_DISTANCE {
            return d;
        }
    }
}

/// Camera fixed for a whole sequence: the first frame's centroid sits on the
/// optical axis at `distance`.
pub fn sequence_camera(frame: &Camera, first: &Mesh, distance: f64) -> Camera {
    frame.clone().with_pose(front_view_pose(&first.centroid(), distance))
}
