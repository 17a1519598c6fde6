use std::collections::HashMap;

use nalgebra::Isometry3;

use super::{Aabb, Vec3};
use crate::error::{Error, Result};

/// Indexed triangle surface in meters.
///
/// Construction validates indices, drops zero-area triangles and caches the
/// area-weighted surface centroid.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    centroid: Vec3,
    dropped: usize,
}

impl Mesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        let count = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &i in tri {
                if i as usize >= count {
                    return Err(Error::IndexOutOfRange {
                        triangle: t,
                        index: i as usize,
                        count,
                    });
                }
            }
        }
        let before = triangles.len();
        let triangles: Vec<[u32; 3]> = triangles
            .into_iter()
            .filter(|t| !is_degenerate(&vertices, t))
            .collect();
        if triangles.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let dropped = before - triangles.len();
        let centroid = area_weighted_centroid(&vertices, &triangles);
        Ok(Mesh {
            vertices,
            triangles,
            centroid,
            dropped,
        })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Area-weighted average of triangle centroids.
    pub fn centroid(&self) -> Vec3 {
        self.centroid
    }

    /// Number of zero-area triangles removed at construction.
    pub fn dropped_degenerate(&self) -> usize {
        self.dropped
    }

    #[inline]
    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let [a, b, c] = self.triangles[i];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    pub fn triangle_area(&self, i: usize) -> f64 {
        let [a, b, c] = self.triangle(i);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len()).map(|i| self.triangle_area(i)).sum()
    }

    pub fn bounds(&self) -> Aabb {
        // Only referenced vertices contribute.
        let mut b = Aabb::empty();
        for t in &self.triangles {
            for &i in t {
                b.grow(&self.vertices[i as usize]);
            }
        }
        b
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> Mesh {
        let vertices: Vec<Vec3> = self
            .vertices
            .iter()
            .map(|v| iso.transform_point(&(*v).into()).coords)
            .collect();
        let centroid = area_weighted_centroid(&vertices, &self.triangles);
        Mesh {
            vertices,
            triangles: self.triangles.clone(),
            centroid,
            dropped: self.dropped,
        }
    }

    /// Every undirected edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        let mut edges: HashMap<(u32, u32), u32> = HashMap::with_capacity(self.triangles.len() * 3 / 2);
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        edges.values().all(|&n| n == 2)
    }

    /// Splits every triangle into four at its edge midpoints.
    pub fn subdivided(&self) -> Mesh {
        let mut vertices = self.vertices.clone();
        let mut midpoints: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Vec3>| -> u32 {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                vertices.push((vertices[a as usize] + vertices[b as usize]) * 0.5);
                (vertices.len() - 1) as u32
            })
        };
        let mut triangles = Vec::with_capacity(self.triangles.len() * 4);
        for &[a, b, c] in &self.triangles {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        Mesh::new(vertices, triangles).expect("subdivision of a valid mesh is valid")
    }
}

fn is_degenerate(vertices: &[Vec3], t: &[u32; 3]) -> bool {
    if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
        return true;
    }
    let (a, b, c) = (vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]);
    let cross = (b - a).cross(&(c - a)).norm();
    let scale = (b - a).norm_squared().max((c - a).norm_squared()).max((c - b).norm_squared());
    !(cross > 1e-14 * scale) || !cross.is_finite()
}

fn area_weighted_centroid(vertices: &[Vec3], triangles: &[[u32; 3]]) -> Vec3 {
    let mut weighted = Vec3::zeros();
    let mut total = 0.0;
    for t in triangles {
        let (a, b, c) = (vertices[t[0] as usize], vertices[t[1] as usize], vertices[t[2] as usize]);
        let area = 0.5 * (b - a).cross(&(c - a)).norm();
        weighted += (a + b + c) * (area / 3.0);
        total += area;
    }
    weighted / total
}
