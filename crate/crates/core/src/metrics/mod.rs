//! Reconstruction and depth-accuracy metrics, and the resolution sweep.

pub mod floor;
pub mod kdtree;
pub mod sweep;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::codec::MouldPair;
use crate::error::{Error, Result};
use crate::geometry::mesh::Mesh;
use crate::geometry::point_cloud::PointCloud;
use crate::geometry::Vec3;
pub use kdtree::KdIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChamferMode {
    /// Mean nearest-neighbour distance.
    #[default]
    Mean,
    /// Mean squared nearest-neighbour distance.
    Squared,
}

/// Mean distance from every point of `from` to its nearest point in `to`.
pub fn mean_nearest_distance(from: &[Vec3], to: &KdIndex, mode: ChamferMode) -> f64 {
    let d: Vec<f64> = from
        .par_iter()
        .map(|p| {
            let (_, d2) = to.nearest(p).expect("non-empty index");
            match mode {
                ChamferMode::Mean => d2.sqrt(),
                ChamferMode::Squared => d2,
            }
        })
        .collect();
    d.iter().sum::<f64>() / d.len() as f64
}

/// Symmetric Chamfer distance: the average of both directed mean
/// nearest-neighbour distances.
pub fn chamfer(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    chamfer_with(a, b, ChamferMode::Mean)
}

pub fn chamfer_with(a: &PointCloud, b: &PointCloud, mode: ChamferMode) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("chamfer needs two non-empty clouds"));
    }
    let ia = KdIndex::build(&a.points);
    let ib = KdIndex::build(&b.points);
    let ab = mean_nearest_distance(&a.points, &ib, mode);
    let ba = mean_nearest_distance(&b.points, &ia, mode);
    Ok(0.5 * (ab + ba))
}

/// Area-weighted uniform samples on the mesh surface, deterministic in the
/// seed.
pub fn sample_surface(mesh: &Mesh, count: usize, seed: u64) -> Result<PointCloud> {
    if count == 0 {
        return Err(Error::InvalidParameter("sample count must be at least 1".into()));
    }
    let mut cdf = Vec::with_capacity(mesh.triangle_count());
    let mut total = 0.0;
    for t in 0..mesh.triangle_count() {
        total += mesh.triangle_area(t);
        cdf.push(total);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..count)
        .map(|_| {
            let r = rng.random::<f64>() * total;
            let t = cdf.partition_point(|&c| c <= r).min(cdf.len() - 1);
            let [a, b, c] = mesh.triangle(t);
            let (r1, r2): (f64, f64) = (rng.random(), rng.random());
            let s = r1.sqrt();
            a * (1.0 - s) + b * (s * (1.0 - r2)) + c * (s * r2)
        })
        .collect();
    Ok(PointCloud::from_points(points))
}

/// Ground-truth side of a Chamfer comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundTruth {
    /// Area-weighted surface samples.
    Samples(usize),
    /// The mesh vertices themselves.
    Vertices,
}

impl Default for GroundTruth {
    fn default() -> Self {
        GroundTruth::Samples(30_000)
    }
}

impl GroundTruth {
    pub fn cloud(&self, mesh: &Mesh, seed: u64) -> Result<PointCloud> {
        match *self {
            GroundTruth::Samples(n) => sample_surface(mesh, n, seed),
            GroundTruth::Vertices => {
                let mut used = vec![false; mesh.vertices().len()];
                for t in mesh.triangles() {
                    for &i in t {
                        used[i as usize] = true;
                    }
                }
                Ok(PointCloud::from_points(
                    mesh.vertices()
                        .iter()
                        .zip(used)
                        .filter_map(|(v, u)| u.then_some(*v))
                        .collect(),
                ))
            }
        }
    }
}

/// Percentages of ground-truth foreground pixels predicted within `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthAccuracy {
    pub overall: f64,
    pub visible: f64,
    pub hidden: f64,
}

/// Fraction (in percent) of ground-truth foreground pixels whose centered
/// depth differs from the prediction by at most `tau`, per map and pooled.
/// Foreground is taken from the ground truth with its stored epsilon.
pub fn depth_accuracy(gt: &MouldPair, pred: &MouldPair, tau: f64) -> Result<DepthAccuracy> {
    if gt.resolution != pred.resolution {
        return Err(Error::ResolutionMismatch(gt.resolution, pred.resolution));
    }
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau {tau} must be positive")));
    }
    let thr = gt.threshold(gt.epsilon);
    let count = |g: &[f64], p: &[f64]| -> (usize, usize) {
        let mut total = 0;
        let mut ok = 0;
        for (a, b) in g.iter().zip(p) {
            if *a <= thr {
                total += 1;
                if (a - b).abs() <= tau {
                    ok += 1;
                }
            }
        }
        (ok, total)
    };
    let (vo, vt) = count(&gt.z_vis, &pred.z_vis);
    let (ho, ht) = count(&gt.z_hid, &pred.z_hid);
    if vt == 0 && ht == 0 {
        return Err(Error::NoForeground);
    }
    let pct = |o: usize, t: usize| if t == 0 { 100.0 } else { 100.0 * o as f64 / t as f64 };
    Ok(DepthAccuracy {
        overall: pct(vo + ho, vt + ht),
        visible: pct(vo, vt),
        hidden: pct(ho, ht),
    })
}
