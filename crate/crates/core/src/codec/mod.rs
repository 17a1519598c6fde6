//! Visible/hidden depth-map codec.
//!
//! For every pixel the encoder stores the radial distance of the nearest
//! and the farthest surface crossing along the pixel ray, both centered on
//! the radial distance of the subject's center of mass. Rays that miss take
//! the background value `L`. The decoder keeps values at or below `L - ε`
//! and lifts them back onto their rays.

pub mod pfm;
pub mod store;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::camera::Camera;
use crate::geometry::point_cloud::{PointCloud, Provenance};
use crate::geometry::scene::RayTarget;
use crate::geometry::Vec3;
use crate::DEFAULT_EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EncodeWarning {
    /// The subject's square crop does not overlap the camera frame.
    OutsideFrame,
    /// The crop extends past the camera frame.
    PartiallyOutsideFrame,
    /// The surface is open; depths are min/max over whatever crossings exist.
    NotWatertight,
    /// Some surface depth lies at or beyond `L - ε` and is lost on decode.
    DepthBeyondBackground,
}

impl EncodeWarning {
    pub fn message(&self) -> &'static str {
        match self {
            EncodeWarning::OutsideFrame => "subject projects entirely outside the frame; pair is all background",
            EncodeWarning::PartiallyOutsideFrame => "subject crop extends beyond the camera frame",
            EncodeWarning::NotWatertight => "mesh is not watertight",
            EncodeWarning::DepthBeyondBackground => "subject is deeper than the background distance allows",
        }
    }
}

/// A pair of registered, centered radial depth maps.
///
/// Maps are row-major `resolution × resolution`, row 0 at the top. The
/// camera is the square crop camera whose pixel grid the maps sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MouldPair {
    pub resolution: usize,
    pub z_vis: Vec<f64>,
    pub z_hid: Vec<f64>,
    /// Radial distance from the camera center to the center of mass.
    pub z_orig: f64,
    /// Background distance `L`.
    pub background: f64,
    /// Surface-selection margin stored with the pair.
    pub epsilon: f64,
    pub camera: Camera,
    pub warnings: Vec<EncodeWarning>,
}

impl MouldPair {
    pub fn all_background(camera: Camera, z_orig: f64, background: f64) -> Self {
        let n = camera.width();
        MouldPair {
            resolution: n,
            z_vis: vec![background; n * n],
            z_hid: vec![background; n * n],
            z_orig,
            background,
            epsilon: DEFAULT_EPSILON,
            camera,
            warnings: Vec::new(),
        }
    }

    /// Number of scalars in the representation, `2 N²`.
    pub fn dimensionality(&self) -> usize {
        2 * self.resolution * self.resolution
    }

    pub fn threshold(&self, epsilon: f64) -> f64 {
        self.background - epsilon
    }

    /// World-space pixel width at the subject's distance.
    pub fn pixel_footprint(&self) -> f64 {
        self.camera.pixel_footprint(self.z_orig)
    }

    pub fn foreground_count(&self) -> usize {
        let thr = self.threshold(self.epsilon);
        self.z_vis.iter().filter(|&&z| z <= thr).count()
    }

    pub fn has_warning(&self, w: EncodeWarning) -> bool {
        self.warnings.contains(&w)
    }

    /// Describes every violated invariant; empty when the pair is valid.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n2 = self.resolution * self.resolution;
        if self.z_vis.len() != n2 || self.z_hid.len() != n2 {
            out.push(format!("maps must have {n2} pixels"));
            return out;
        }
        if self.camera.width() != self.resolution || self.camera.height() != self.resolution {
            out.push("camera does not match the map resolution".into());
        }
        let thr = self.threshold(self.epsilon);
        let (mut mask, mut order, mut bg, mut range) = (0, 0, 0, 0);
        for (&v, &h) in self.z_vis.iter().zip(&self.z_hid) {
            let (fv, fh) = (v <= thr, h <= thr);
            if fv != fh {
                mask += 1;
            }
            if fv && fh && v > h {
                order += 1;
            }
            if !fv && !fh && (v != self.background || h != self.background) {
                bg += 1;
            }
            for z in [v, h] {
                if !(z >= -self.z_orig && z <= self.background) {
                    range += 1;
                }
            }
        }
        if mask > 0 {
            out.push(format!("{mask} pixels differ between the visible and hidden masks"));
        }
        if order > 0 {
            out.push(format!("{order} pixels have visible depth beyond hidden depth"));
        }
        if bg > 0 {
            out.push(format!("{bg} background pixels are not exactly L"));
        }
        if range > 0 {
            out.push(format!("{range} values fall outside [-z_orig, L]"));
        }
        out
    }
}

fn check_background(background: f64) -> Result<()> {
    if !(background > 0.0 && background.is_finite()) {
        return Err(Error::InvalidParameter(format!("background distance {background} must be positive")));
    }
    Ok(())
}

fn check_epsilon(epsilon: f64, background: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < background) {
        return Err(Error::EpsilonOutOfRange { epsilon, background });
    }
    Ok(())
}

/// Square crop of `frame` around the projected bounding box of `target`:
/// the shorter side of the projected rectangle is extended to match the
/// longer one. Returns the `n`×`n` crop camera.
pub fn square_crop(target: &dyn RayTarget, frame: &Camera, n: usize) -> Result<Camera> {
    if n == 0 {
        return Err(Error::InvalidParameter("resolution must be at least 1".into()));
    }
    let corners: Vec<Vec3> = target.bounds().corners().iter().map(|c| frame.to_camera(c)).collect();
    let pts = if corners.iter().all(|c| c.z > 0.0) {
        corners
    } else {
        target.extreme_points().iter().map(|c| frame.to_camera(c)).collect()
    };
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        let [x, y] = frame.project(p);
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let side = (x1 - x0).max(y1 - y0);
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::InvalidParameter("subject has no projected extent".into()));
    }
    frame.square_window([(x0 + x1) / 2.0, (y0 + y1) / 2.0], side, n)
}

/// Encodes `target` seen by `frame` into an `n`×`n` pair over the subject's
/// square crop.
pub fn encode(target: &dyn RayTarget, frame: &Camera, background: f64, n: usize) -> Result<MouldPair> {
    check_background(background)?;
    if target.extreme_points().iter().any(|p| frame.to_camera(p).z <= 0.0) {
        return Err(Error::BehindCamera);
    }
    let crop = square_crop(target, frame, n)?;
    let [fx0, fy0, fx1, fy1] = frame.sensor_rect();
    let [cx0, cy0, cx1, cy1] = crop.sensor_rect();
    if cx1 <= fx0 || cx0 >= fx1 || cy1 <= fy0 || cy0 >= fy1 {
        let z_orig = frame.to_camera(&target.centroid()).norm();
        let mut pair = MouldPair::all_background(crop, z_orig, background);
        pair.warnings.push(EncodeWarning::OutsideFrame);
        return Ok(pair);
    }
    let mut pair = encode_with_camera(target, &crop, background)?;
    if cx0 < fx0 || cy0 < fy0 || cx1 > fx1 || cy1 > fy1 {
        pair.warnings.push(EncodeWarning::PartiallyOutsideFrame);
    }
    Ok(pair)
}

/// Encodes over the full pixel grid of a square camera.
pub fn encode_with_camera(target: &dyn RayTarget, camera: &Camera, background: f64) -> Result<MouldPair> {
    check_background(background)?;
    let n = camera.width();
    if camera.height() != n {
        return Err(Error::InvalidCamera(format!(
            "encoding camera must be square, got {}x{}",
            n,
            camera.height()
        )));
    }
    if target.extreme_points().iter().any(|p| camera.to_camera(p).z <= 0.0) {
        return Err(Error::BehindCamera);
    }
    let z_orig = camera.to_camera(&target.centroid()).norm();
    let spans: Vec<(f64, f64)> = (0..n * n)
        .into_par_iter()
        .map(|i| {
            let ray = camera.world_ray_unchecked(i % n, i / n);
            match target.hit_span(&ray) {
                Some((near, far)) => (near - z_orig, far - z_orig),
                None => (background, background),
            }
        })
        .collect();
    let (z_vis, z_hid): (Vec<f64>, Vec<f64>) = spans.into_iter().unzip();

    let mut pair = MouldPair {
        resolution: n,
        z_vis,
        z_hid,
        z_orig,
        background,
        epsilon: DEFAULT_EPSILON,
        camera: camera.clone(),
        warnings: Vec::new(),
    };
    if !target.is_watertight() {
        pair.warnings.push(EncodeWarning::NotWatertight);
    }
    let thr = pair.threshold(pair.epsilon);
    let lost = pair
        .z_vis
        .iter()
        .zip(&pair.z_hid)
        .any(|(&v, &h)| (v != background || h != background) && (v > thr || h > thr));
    if lost {
        pair.warnings.push(EncodeWarning::DepthBeyondBackground);
    }
    Ok(pair)
}

/// Foreground pixels of the pair: visible depth at or below `L - ε`.
pub fn foreground_mask(pair: &MouldPair, epsilon: f64) -> Result<Vec<bool>> {
    check_epsilon(epsilon, pair.background)?;
    let thr = pair.threshold(epsilon);
    Ok(pair.z_vis.iter().map(|&z| z <= thr).collect())
}

/// Same mask computed from the hidden map.
pub fn foreground_mask_hidden(pair: &MouldPair, epsilon: f64) -> Result<Vec<bool>> {
    check_epsilon(epsilon, pair.background)?;
    let thr = pair.threshold(epsilon);
    Ok(pair.z_hid.iter().map(|&z| z <= thr).collect())
}

/// Merged point cloud of both maps in camera coordinates, with normals from
/// depth-map differences and visible/hidden labels.
pub fn decode(pair: &MouldPair, epsilon: f64) -> Result<PointCloud> {
    check_epsilon(epsilon, pair.background)?;
    let mut cloud = decode_map(pair, &pair.z_vis, epsilon, Provenance::Visible);
    cloud.extend(decode_map(pair, &pair.z_hid, epsilon, Provenance::Hidden));
    Ok(cloud)
}

fn decode_map(pair: &MouldPair, map: &[f64], epsilon: f64, label: Provenance) -> PointCloud {
    let n = pair.resolution;
    let thr = pair.threshold(epsilon);
    let grid: Vec<Option<Vec3>> = map
        .iter()
        .enumerate()
        .map(|(i, &z)| (z <= thr).then(|| pair.camera.direction(i % n, i / n) * (z + pair.z_orig)))
        .collect();
    let at = |u: isize, v: isize| -> Option<Vec3> {
        if u < 0 || v < 0 || u >= n as isize || v >= n as isize {
            None
        } else {
            grid[v as usize * n + u as usize]
        }
    };
    // Central difference when both neighbors exist, one-sided otherwise.
    let diff = |p: Vec3, prev: Option<Vec3>, next: Option<Vec3>| match (prev, next) {
        (Some(a), Some(b)) => Some((b - a) * 0.5),
        (None, Some(b)) => Some(b - p),
        (Some(a), None) => Some(p - a),
        (None, None) => None,
    };

    let mut points = Vec::new();
    let mut normals = Vec::new();
    for v in 0..n as isize {
        for u in 0..n as isize {
            let Some(p) = at(u, v) else { continue };
            let du = diff(p, at(u - 1, v), at(u + 1, v));
            let dv = diff(p, at(u, v - 1), at(u, v + 1));
            let ray = p.normalize();
            let mut normal = match (du, dv) {
                (Some(a), Some(b)) => a.cross(&b).try_normalize(1e-300).unwrap_or(-ray),
                _ => -ray,
            };
            let facing = normal.dot(&ray);
            let flip = match label {
                Provenance::Visible => facing > 0.0,
                Provenance::Hidden => facing < 0.0,
            };
            if flip {
                normal = -normal;
            }
            points.push(p);
            normals.push(normal);
        }
    }
    let count = points.len();
    PointCloud {
        points,
        normals: Some(normals),
        provenance: Some(vec![label; count]),
    }
}
