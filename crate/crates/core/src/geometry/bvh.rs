//! Bounding volume hierarchy over mesh triangles.
//!
//! Nodes are stored depth-first: an interior node's left child immediately
//! follows it and `right` holds the index of the right child. Leaves own a
//! contiguous range of the triangle permutation.

use super::intersect::ray_triangle;
use super::mesh::Mesh;
use super::{Aabb, Ray, Vec3, MERGE_DISTANCE, MIN_HIT_DISTANCE};

const MAX_LEAF: usize = 4;
const BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Distance from the ray origin, in meters.
    pub distance: f64,
    pub triangle: usize,
    /// Barycentric weights of the triangle's three vertices.
    pub barycentric: [f64; 3],
}

#[derive(Debug, Clone)]
struct Node {
    bounds: Aabb,
    start: u32,
    count: u32,
    right: u32,
}

impl Node {
    fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

#[derive(Debug, Clone)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
    triangle_count: usize,
}

struct BuildItem {
    bounds: Aabb,
    centroid: Vec3,
}

impl Bvh {
    pub fn build(mesh: &Mesh) -> Bvh {
        let items: Vec<BuildItem> = (0..mesh.triangle_count())
            .map(|i| {
                let tri = mesh.triangle(i);
                let bounds = Aabb::from_points(tri.iter());
                BuildItem {
                    bounds,
                    centroid: bounds.center(),
                }
            })
            .collect();
        let mut order: Vec<u32> = (0..items.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * items.len() / MAX_LEAF + 1);
        build_node(&items, &mut order, 0, items.len(), &mut nodes);

        // Pad every box by the same amount so that rounding in the slab test
        // never culls a triangle the exact test accepts. Containment of child
        // boxes in their parents is preserved.
        let scale = mesh
            .vertices()
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs().max()));
        let pad = Vec3::repeat(1e-9 * scale);
        for n in &mut nodes {
            n.bounds.min -= pad;
            n.bounds.max += pad;
        }
        Bvh {
            nodes,
            order,
            triangle_count: mesh.triangle_count(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_leaf()).count()
    }

    pub fn bounds(&self) -> Aabb {
        self.nodes[0].bounds
    }

    /// Triangle indices stored in each leaf.
    pub fn leaves(&self) -> Vec<Vec<usize>> {
        self.nodes
            .iter()
            .filter(|n| n.is_leaf())
            .map(|n| {
                self.order[n.start as usize..(n.start + n.count) as usize]
                    .iter()
                    .map(|&i| i as usize)
                    .collect()
            })
            .collect()
    }

    /// Checks both structural invariants: each triangle is in exactly one
    /// leaf and each child box lies inside its parent.
    pub fn check_invariants(&self, mesh: &Mesh) -> Result<(), String> {
        let mut seen = vec![0u32; mesh.triangle_count()];
        for leaf in self.leaves() {
            for t in leaf {
                seen[t] += 1;
            }
        }
        if let Some(t) = seen.iter().position(|&n| n != 1) {
            return Err(format!("triangle {t} appears in {} leaves", seen[t]));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if n.is_leaf() {
                for &t in &self.order[n.start as usize..(n.start + n.count) as usize] {
                    let tb = Aabb::from_points(mesh.triangle(t as usize).iter());
                    if !n.bounds.contains_box(&tb) {
                        return Err(format!("leaf {i} does not contain triangle {t}"));
                    }
                }
            } else {
                for c in [i + 1, n.right as usize] {
                    if !n.bounds.contains_box(&self.nodes[c].bounds) {
                        return Err(format!("child {c} escapes parent {i}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Nearest intersection beyond the minimum hit distance. Equal distances
    /// resolve to the lower triangle index.
    pub fn closest(&self, mesh: &Mesh, ray: &Ray) -> Option<Hit> {
        debug_assert_eq!(mesh.triangle_count(), self.triangle_count);
        let inv = inverse(&ray.direction);
        let mut best: Option<Hit> = None;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let Some((t0, _)) = node.bounds.ray_interval(&ray.origin, &inv) else {
                continue;
            };
            if best.is_some_and(|b| t0 > b.distance) {
                continue;
            }
            if node.is_leaf() {
                for &t in self.leaf(node) {
                    if let Some(h) = hit_triangle(mesh, ray, t as usize) {
                        if best.is_none_or(|b| closer(&h, &b)) {
                            best = Some(h);
                        }
                    }
                }
            } else {
                stack.push(node.right as usize);
                stack.push(ni + 1);
            }
        }
        best
    }

    /// Farthest intersection. Equal distances resolve to the lower triangle
    /// index.
    pub fn farthest(&self, mesh: &Mesh, ray: &Ray) -> Option<Hit> {
        debug_assert_eq!(mesh.triangle_count(), self.triangle_count);
        let inv = inverse(&ray.direction);
        let mut best: Option<Hit> = None;
        let mut stack = Vec::with_capacity(64);
        stack.push(0usize);
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            let Some((_, t1)) = node.bounds.ray_interval(&ray.origin, &inv) else {
                continue;
            };
            if best.is_some_and(|b| t1 < b.distance) {
                continue;
            }
            if node.is_leaf() {
                for &t in self.leaf(node) {
                    if let Some(h) = hit_triangle(mesh, ray, t as usize) {
                        if best.is_none_or(|b| farther(&h, &b)) {
                            best = Some(h);
                        }
                    }
                }
            } else {
                stack.push(ni + 1);
                stack.push(node.right as usize);
            }
        }
        best
    }

    /// Every surface crossing along the ray, sorted by distance. Hits within
    /// the merge distance of the previously accepted one (shared edges and
    /// vertices) are collapsed into it.
    pub fn all_hits(&self, mesh: &Mesh, ray: &Ray) -> Vec<Hit> {
        let inv = inverse(&ray.direction);
        let mut hits = Vec::new();
        let mut stack = vec![0usize];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni];
            if node.bounds.ray_interval(&ray.origin, &inv).is_none() {
                continue;
            }
            if node.is_leaf() {
                hits.extend(self.leaf(node).iter().filter_map(|&t| hit_triangle(mesh, ray, t as usize)));
            } else {
                stack.push(node.right as usize);
                stack.push(ni + 1);
            }
        }
        merge_hits(hits)
    }

    fn leaf(&self, node: &Node) -> &[u32] {
        &self.order[node.start as usize..(node.start + node.count) as usize]
    }
}

/// Sorts hits by `(distance, triangle)` and merges near-coincident crossings.
pub fn merge_hits(mut hits: Vec<Hit>) -> Vec<Hit> {
    hits.sort_by(|a, b| a.distance.total_cmp(&b.distance).then(a.triangle.cmp(&b.triangle)));
    let mut out: Vec<Hit> = Vec::with_capacity(hits.len());
    for h in hits {
        match out.last() {
            Some(last) if h.distance - last.distance <= MERGE_DISTANCE => {}
            _ => out.push(h),
        }
    }
    out
}

#[inline]
pub fn hit_triangle(mesh: &Mesh, ray: &Ray, t: usize) -> Option<Hit> {
    let [a, b, c] = mesh.triangle(t);
    let (d, u, v) = ray_triangle(&ray.origin, &ray.direction, &a, &b, &c)?;
    (d > MIN_HIT_DISTANCE).then_some(Hit {
        distance: d,
        triangle: t,
        barycentric: [1.0 - u - v, u, v],
    })
}

#[inline]
fn closer(a: &Hit, b: &Hit) -> bool {
    a.distance < b.distance || (a.distance == b.distance && a.triangle < b.triangle)
}

#[inline]
fn farther(a: &Hit, b: &Hit) -> bool {
    a.distance > b.distance || (a.distance == b.distance && a.triangle < b.triangle)
}

fn inverse(d: &Vec3) -> Vec3 {
    Vec3::new(1.0 / d.x, 1.0 / d.y, 1.0 / d.z)
}

fn build_node(items: &[BuildItem], order: &mut [u32], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let slice = &mut order[start..end];
    let bounds = slice
        .iter()
        .fold(Aabb::empty(), |b, &i| b.union(&items[i as usize].bounds));
    let index = nodes.len();
    nodes.push(Node {
        bounds,
        start: start as u32,
        count: (end - start) as u32,
        right: 0,
    });
    if end - start <= MAX_LEAF {
        return index;
    }

    let mut centroid_bounds = Aabb::empty();
    for &i in slice.iter() {
        centroid_bounds.grow(&items[i as usize].centroid);
    }
    let axis = centroid_bounds.largest_axis();
    let lo = centroid_bounds.min[axis];
    let span = centroid_bounds.max[axis] - lo;

    let mid = if span > 0.0 {
        sah_split(items, slice, axis, lo, span).unwrap_or_else(|| median_split(items, slice, axis))
    } else {
        // All centroids coincide; split by position in the list.
        slice.len() / 2
    };

    nodes[index].count = 0;
    build_node(items, order, start, start + mid, nodes);
    let right = build_node(items, order, start + mid, end, nodes);
    nodes[index].right = right as u32;
    index
}

fn bin_of(c: f64, lo: f64, span: f64) -> usize {
    (((c - lo) / span * BINS as f64) as usize).min(BINS - 1)
}

/// Binned surface-area heuristic. Returns the size of the left partition
/// after reordering `slice`, or `None` when no split beats a leaf.
fn sah_split(items: &[BuildItem], slice: &mut [u32], axis: usize, lo: f64, span: f64) -> Option<usize> {
    let mut counts = [0usize; BINS];
    let mut boxes = [Aabb::empty(); BINS];
    for &i in slice.iter() {
        let it = &items[i as usize];
        let b = bin_of(it.centroid[axis], lo, span);
        counts[b] += 1;
        boxes[b] = boxes[b].union(&it.bounds);
    }
    let mut right_area = [0.0; BINS];
    let mut right_count = [0usize; BINS];
    let (mut acc, mut n) = (Aabb::empty(), 0);
    for b in (1..BINS).rev() {
        acc = acc.union(&boxes[b]);
        n += counts[b];
        right_area[b] = acc.surface_area();
        right_count[b] = n;
    }
    let (mut acc, mut n) = (Aabb::empty(), 0);
    let mut best: Option<(f64, usize)> = None;
    for b in 0..BINS - 1 {
        acc = acc.union(&boxes[b]);
        n += counts[b];
        if n == 0 || right_count[b + 1] == 0 {
            continue;
        }
        let cost = acc.surface_area() * n as f64 + right_area[b + 1] * right_count[b + 1] as f64;
        if best.is_none_or(|(c, _)| cost < c) {
            best = Some((cost, b));
        }
    }
    let (_, split_bin) = best?;
    let mut left = 0;
    for k in 0..slice.len() {
        let c = items[slice[k] as usize].centroid[axis];
        if bin_of(c, lo, span) <= split_bin {
            slice.swap(k, left);
            left += 1;
        }
    }
    (left > 0 && left < slice.len()).then_some(left)
}

fn median_split(items: &[BuildItem], slice: &mut [u32], axis: usize) -> usize {
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| {
        items[a as usize].centroid[axis].total_cmp(&items[b as usize].centroid[axis])
    });
    mid
}
