//! Fidelity of both representations as their dimensionality grows.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use super::{chamfer_with, ChamferMode, GroundTruth};
use crate::codec::{decode, encode};
use crate::error::{Error, Result};
use crate::geometry::camera::{front_view_pose, Camera};
use crate::geometry::mesh::Mesh;
use crate::geometry::point_cloud::PointCloud;
use crate::geometry::scene::MeshScene;
use crate::voxel::{voxel_points, voxelize_surface};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Representation {
    Mould,
    Voxel,
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Representation::Mould => "mould",
            Representation::Voxel => "voxel",
        }
    }

    /// `2 N²` for the depth pair, `N³` for the voxel grid.
    pub fn dimensionality(&self, n: usize) -> u64 {
        let n = n as u64;
        match self {
            Representation::Mould => 2 * n * n,
            Representation::Voxel => n * n * n,
        }
    }
}

/// Smallest voxel resolution whose `N³` reaches a pair's `2 N²`.
pub fn matched_voxel_resolution(mould_n: usize) -> usize {
    let d = Representation::Mould.dimensionality(mould_n);
    let mut v = (d as f64).cbrt().floor() as usize;
    while Representation::Voxel.dimensionality(v) < d {
        v += 1;
    }
    while v > 1 && Representation::Voxel.dimensionality(v - 1) >= d {
        v -= 1;
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub representation: Representation,
    pub n: usize,
    pub dimensionality: u64,
    /// Chamfer error averaged over meshes, meters.
    pub chamfer_m: f64,
    /// Encode time averaged over meshes, milliseconds.
    pub encode_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub mould_resolutions: Vec<usize>,
    pub voxel_resolutions: Vec<usize>,
    pub ground_truth: GroundTruth,
    pub seed: u64,
    pub background: f64,
    pub epsilon: f64,
    pub mode: ChamferMode,
    /// Place each mesh's centroid on the optical axis at this distance;
    /// `None` keeps the frame camera's pose.
    pub subject_distance: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            mould_resolutions: vec![32, 64, 128, 256],
            voxel_resolutions: vec![32, 64, 128, 256].into_iter().map(matched_voxel_resolution).collect(),
            ground_truth: GroundTruth::default(),
            seed: 0,
            background: crate::DEFAULT_BACKGROUND,
            epsilon: crate::DEFAULT_EPSILON,
            mode: ChamferMode::Mean,
            subject_distance: Some(8.0),
        }
    }
}

/// Per-mesh error of one representation at one resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub mesh: usize,
    pub representation: Representation,
    pub n: usize,
    pub chamfer_m: f64,
    pub encode_ms: f64,
}

/// Camera used for mesh `mesh` of a sweep.
pub fn sweep_camera(mesh: &Mesh, frame: &Camera, config: &SweepConfig) -> Camera {
    match config.subject_distance {
        Some(d) => frame.clone().with_pose(front_view_pose(&mesh.centroid(), d)),
        None => frame.clone(),
    }
}

/// Decoded cloud of a mould pair in world coordinates.
pub fn mould_cloud(scene: &MeshScene, camera: &Camera, n: usize, config: &SweepConfig) -> Result<(PointCloud, f64)> {
    let start = Instant::now();
    let pair = encode(scene, camera, config.background, n)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let cloud = decode(&pair, config.epsilon)?;
    let world = cloud.points.iter().map(|p| pair.camera.to_world(p)).collect();
    Ok((PointCloud::from_points(world), ms))
}

pub fn measure_all(meshes: &[Mesh], frame: &Camera, config: &SweepConfig) -> Result<Vec<Measurement>> {
    if meshes.is_empty() {
        return Err(Error::EmptyInput("sweep needs at least one mesh"));
    }
    let scenes: Vec<MeshScene> = meshes.par_iter().map(|m| MeshScene::new(m.clone())).collect();
    let truths: Vec<PointCloud> = meshes
        .par_iter()
        .enumerate()
        .map(|(i, m)| config.ground_truth.cloud(m, config.seed.wrapping_add(i as u64)))
        .collect::<Result<_>>()?;

    let mut tasks = Vec::new();
    for mesh in 0..meshes.len() {
        for &n in &config.mould_resolutions {
            tasks.push((mesh, Representation::Mould, n));
        }
        for &n in &config.voxel_resolutions {
            tasks.push((mesh, Representation::Voxel, n));
        }
    }
    tasks
        .par_iter()
        .map(|&(mesh, representation, n)| {
            let (cloud, encode_ms) = match representation {
                Representation::Mould => {
                    let camera = sweep_camera(&meshes[mesh], frame, config);
                    mould_cloud(&scenes[mesh], &camera, n, config)?
                }
                Representation::Voxel => {
                    let start = Instant::now();
                    let grid = voxelize_surface(&meshes[mesh], n)?;
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    (voxel_points(&grid), ms)
                }
            };
            let chamfer_m = if cloud.is_empty() {
                f64::INFINITY
            } else {
                chamfer_with(&truths[mesh], &cloud, config.mode)?
            };
            Ok(Measurement {
                mesh,
                representation,
                n,
                chamfer_m,
                encode_ms,
            })
        })
        .collect()
}

/// Runs every (mesh, representation, resolution) task and averages over
/// meshes. Rows are sorted by dimensionality.
pub fn run_sweep(meshes: &[Mesh], frame: &Camera, config: &SweepConfig) -> Result<SweepReport> {
    let measurements = measure_all(meshes, frame, config)?;
    Ok(SweepReport::from_measurements(&measurements, meshes.len()))
}

impl SweepReport {
    pub fn from_measurements(measurements: &[Measurement], mesh_count: usize) -> Self {
        let mut keys: Vec<(Representation, usize)> =
            measurements.iter().map(|m| (m.representation, m.n)).collect();
        keys.sort();
        keys.dedup();
        let mut rows: Vec<SweepRow> = keys
            .into_iter()
            .map(|(rep, n)| {
                let (mut err, mut ms) = (0.0, 0.0);
                for m in measurements.iter().filter(|m| m.representation == rep && m.n == n) {
                    err += m.chamfer_m;
                    ms += m.encode_ms;
                }
                SweepRow {
                    representation: rep,
                    n,
                    dimensionality: rep.dimensionality(n),
                    chamfer_m: err / mesh_count as f64,
                    encode_ms: ms / mesh_count as f64,
                }
            })
            .collect();
        rows.sort_by_key(|r| (r.dimensionality, r.representation, r.n));
        SweepReport { rows }
    }

    pub fn row(&self, representation: Representation, n: usize) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.representation == representation && r.n == n)
    }

    /// Each mould row with the matched-dimensionality voxel row, when the
    /// sweep contains it.
    pub fn matched_pairs(&self) -> Vec<(&SweepRow, Option<&SweepRow>)> {
        self.rows
            .iter()
            .filter(|r| r.representation == Representation::Mould)
            .map(|r| (r, self.row(Representation::Voxel, matched_voxel_resolution(r.n))))
            .collect()
    }

    /// CSV with header `representation,N,D,chamfer_m,encode_ms`. Timings
    /// are left empty unless requested so that reruns are byte-identical.
    pub fn to_csv(&self, with_timings: bool) -> String {
        let mut out = String::from("representation,N,D,chamfer_m,encode_ms\n");
        for r in &self.rows {
            let ms = if with_timings { format!("{:.3}", r.encode_ms) } else { String::new() };
            let _ = writeln!(
                out,
                "{},{},{},{:.9},{}",
                r.representation.name(),
                r.n,
                r.dimensionality,
                r.chamfer_m,
                ms
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>5} {:>10} {:>14} {:>11}",
            "representation", "N", "D", "chamfer (mm)", "encode ms"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<14} {:>5} {:>10} {:>14.3} {:>11.2}",
                r.representation.name(),
                r.n,
                r.dimensionality,
                r.chamfer_m * 1e3,
                r.encode_ms
            );
        }
        let pairs = self.matched_pairs();
        if pairs.iter().any(|(_, v)| v.is_some()) {
            let _ = writeln!(out, "\nmatched dimensionality (voxel N^3 >= 2 N^2):");
            for (m, v) in pairs {
                if let Some(v) = v {
                    let _ = writeln!(
                        out,
                        "  mould N={:<4} D={:<8} {:>9.3} mm  |  voxel N={:<4} D={:<8} {:>9.3} mm",
                        m.n,
                        m.dimensionality,
                        m.chamfer_m * 1e3,
                        v.n,
                        v.dimensionality,
                        v.chamfer_m * 1e3
                    );
                }
            }
        }
        out
    }
}
