//! Surface occupancy grid baseline.
//!
//! A cell is occupied when its closed box overlaps any triangle. The grid
//! spans the mesh bounding box grown to a cube on its longest side, padded
//! by 2% of that side on every face.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::mesh::Mesh;
use crate::geometry::point_cloud::PointCloud;
use crate::geometry::{Aabb, Vec3};

pub const PADDING: f64 = 0.02;

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    resolution: usize,
    origin: Vec3,
    edge_length: f64,
    bits: Vec<u64>,
}

impl VoxelGrid {
    pub fn empty(resolution: usize, origin: Vec3, edge_length: f64) -> Self {
        let cells = resolution * resolution * resolution;
        VoxelGrid {
            resolution,
            origin,
            edge_length,
            bits: vec![0; cells.div_ceil(64)],
        }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn origin(&self) -> Vec3 {
        self.origin
    }

    pub fn edge_length(&self) -> f64 {
        self.edge_length
    }

    pub fn cell_size(&self) -> f64 {
        self.edge_length / self.resolution as f64
    }

    /// `N³` cells, one bit each.
    pub fn dimensionality(&self) -> usize {
        self.resolution.pow(3)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.resolution + j) * self.resolution + i
    }

    pub fn is_occupied(&self, i: usize, j: usize, k: usize) -> bool {
        let idx = self.index(i, j, k);
        self.bits[idx / 64] >> (idx % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize) {
        let idx = self.index(i, j, k);
        self.bits[idx / 64] |= 1 << (idx % 64);
    }

    pub fn occupied_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn cell_box(&self, i: usize, j: usize, k: usize) -> Aabb {
        let h = self.cell_size();
        let min = self.origin + Vec3::new(i as f64, j as f64, k as f64) * h;
        Aabb {
            min,
            max: min + Vec3::repeat(h),
        }
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) * self.cell_size()
    }

    pub fn bounds(&self) -> Aabb {
        Aabb {
            min: self.origin,
            max: self.origin + Vec3::repeat(self.edge_length),
        }
    }

    /// Occupied cells in index order.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let n = self.resolution;
        (0..n * n * n)
            .filter(|&idx| self.bits[idx / 64] >> (idx % 64) & 1 == 1)
            .map(move |idx| (idx % n, (idx / n) % n, idx / (n * n)))
    }

    pub fn raw_bits(&self) -> &[u64] {
        &self.bits
    }
}

/// Padded bounding cube `(origin, edge_length)` of a mesh.
pub fn bounding_cube(mesh: &Mesh) -> (Vec3, f64) {
    let b = mesh.bounds();
    let side = b.extent().max();
    let edge = side * (1.0 + 2.0 * PADDING);
    (b.center() - Vec3::repeat(edge / 2.0), edge)
}

pub fn voxelize_surface(mesh: &Mesh, resolution: usize) -> Result<VoxelGrid> {
    let (origin, edge) = bounding_cube(mesh);
    voxelize_in_cube(mesh, origin, edge, resolution)
}

/// Surface voxelization over an explicit cube.
pub fn voxelize_in_cube(mesh: &Mesh, origin: Vec3, edge_length: f64, resolution: usize) -> Result<VoxelGrid> {
    if resolution < 2 {
        return Err(Error::InvalidParameter(format!("voxel resolution {resolution} must be at least 2")));
    }
    if !(edge_length > 0.0 && edge_length.is_finite()) {
        return Err(Error::InvalidParameter(format!("edge length {edge_length} must be positive")));
    }
    let grid = VoxelGrid::empty(resolution, origin, edge_length);
    let words: Vec<AtomicU64> = grid.bits.iter().map(|_| AtomicU64::new(0)).collect();
    let h = grid.cell_size();
    let n = resolution;
    let cell_range = |lo: f64, hi: f64, o: f64| -> Option<(usize, usize)> {
        let a = ((lo - o) / h).floor() as i64;
        let b = ((hi - o) / h).floor() as i64;
        // Closed cells: a point exactly on a boundary touches both sides.
        let a = (a - 1).max(0);
        let b = (b + 1).min(n as i64 - 1);
        (a <= b).then_some((a as usize, b as usize))
    };
    (0..mesh.triangle_count()).into_par_iter().for_each(|t| {
        let tri = mesh.triangle(t);
        let tb = Aabb::from_points(tri.iter());
        let (Some((i0, i1)), Some((j0, j1)), Some((k0, k1))) = (
            cell_range(tb.min.x, tb.max.x, origin.x),
            cell_range(tb.min.y, tb.max.y, origin.y),
            cell_range(tb.min.z, tb.max.z, origin.z),
        ) else {
            return;
        };
        for k in k0..=k1 {
            for j in j0..=j1 {
                for i in i0..=i1 {
                    let cell = grid.cell_box(i, j, k);
                    if triangle_box_overlap(&tri, &cell) {
                        let idx = grid.index(i, j, k);
                        words[idx / 64].fetch_or(1 << (idx % 64), Ordering::Relaxed);
                    }
                }
            }
        }
    });
    let bits = words.into_iter().map(AtomicU64::into_inner).collect();
    Ok(VoxelGrid { bits, ..grid })
}

/// Separating-axis triangle/box test over the 13 candidate axes. Touching
/// counts as overlap.
pub fn triangle_box_overlap(tri: &[Vec3; 3], cell: &Aabb) -> bool {
    let c = cell.center();
    let half = cell.extent() * 0.5;
    let v = [tri[0] - c, tri[1] - c, tri[2] - c];
    let e = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];

    let separated = |axis: Vec3| -> bool {
        if axis.norm_squared() == 0.0 {
            return false;
        }
        let p = [axis.dot(&v[0]), axis.dot(&v[1]), axis.dot(&v[2])];
        let lo = p[0].min(p[1]).min(p[2]);
        let hi = p[0].max(p[1]).max(p[2]);
        let r = half.x * axis.x.abs() + half.y * axis.y.abs() + half.z * axis.z.abs();
        lo > r || hi < -r
    };

    for k in 0..3 {
        let lo = v[0][k].min(v[1][k]).min(v[2][k]);
        let hi = v[0][k].max(v[1][k]).max(v[2][k]);
        if lo > half[k] || hi < -half[k] {
            return false;
        }
    }
    let normal = e[0].cross(&e[1]);
    if separated(normal) {
        return false;
    }
    let units = [Vec3::x(), Vec3::y(), Vec3::z()];
    for edge in &e {
        for u in &units {
            if separated(u.cross(edge)) {
                return false;
            }
        }
    }
    true
}

/// One point at the center of every occupied cell.
pub fn voxel_points(grid: &VoxelGrid) -> PointCloud {
    PointCloud::from_points(grid.occupied().map(|(i, j, k)| grid.cell_center(i, j, k)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct GridHeader {
    pub N: usize,
    pub origin: [f64; 3],
    pub edge_length: f64,
}

/// Grid dump: one line of JSON header, then `ceil(N³ / 8)` bytes of
/// occupancy, cell `(k * N + j) * N + i` at bit `idx % 8` of byte `idx / 8`.
pub fn write_grid(path: impl AsRef<Path>, grid: &VoxelGrid) -> Result<()> {
    let path = path.as_ref();
    let header = GridHeader {
        N: grid.resolution,
        origin: [grid.origin.x, grid.origin.y, grid.origin.z],
        edge_length: grid.edge_length,
    };
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    let nbytes = grid.dimensionality().div_ceil(8);
    out.extend(grid.bits.iter().flat_map(|w| w.to_le_bytes()).take(nbytes));
    fs::File::create(path)
        .and_then(|mut f| f.write_all(&out))
        .map_err(|e| Error::io(path, e))
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<VoxelGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::malformed(path, "missing header line"))?;
    let header: GridHeader = serde_json::from_slice(&bytes[..nl]).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    let mut grid = VoxelGrid::empty(header.N, Vec3::from(header.origin), header.edge_length);
    let body = &bytes[nl + 1..];
    if body.len() != grid.dimensionality().div_ceil(8) {
        return Err(Error::malformed(path, "bitset length does not match N"));
    }
    for (w, chunk) in grid.bits.iter_mut().zip(body.chunks(8)) {
        let mut b = [0u8; 8];
        b[..chunk.len()].copy_from_slice(chunk);
        *w = u64::from_le_bytes(b);
    }
    Ok(grid)
}
