//! Brute-force reference implementations. Deliberately naive and written
//! independently of the library algorithms they check.

#![allow(dead_code)]

use mouldkit::{Mesh, Vec3};
use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every crossing of a ray with the mesh, solved as a 3×3 linear system per
/// triangle (`o + t d = a + u (b - a) + v (c - a)`), sorted by distance.
pub fn all_crossings(mesh: &Mesh, origin: &Vec3, dir: &Vec3) -> Vec<(f64, usize)> {
    let mut out = Vec::new();
    for i in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(i);
        let m = Matrix3::from_columns(&[-dir, b - a, c - a]);
        let Some(inv) = m.try_inverse() else { continue };
        let x = inv * (origin - a);
        let (t, u, v) = (x[0], x[1], x[2]);
        if t > 1e-6 && u >= 0.0 && v >= 0.0 && u + v <= 1.0 {
            out.push((t, i));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    out
}

pub fn nearest_crossing(mesh: &Mesh, origin: &Vec3, dir: &Vec3) -> Option<f64> {
    all_crossings(mesh, origin, dir).first().map(|h| h.0)
}

pub fn farthest_crossing(mesh: &Mesh, origin: &Vec3, dir: &Vec3) -> Option<f64> {
    all_crossings(mesh, origin, dir).last().map(|h| h.0)
}

fn segment_distance(p: &Vec3, a: &Vec3, b: &Vec3) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Distance from `p` to a triangle: the plane projection when it falls
/// inside, otherwise the nearest of the three edges.
pub fn triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let n = (b - a).cross(&(c - a));
    let n2 = n.norm_squared();
    let q = p - n * (n.dot(&(p - a)) / n2);
    let inside = [(a, b), (b, c), (c, a)].iter().all(|(x, y)| (*y - *x).cross(&(q - *x)).dot(&n) >= 0.0);
    if inside {
        (p - q).norm()
    } else {
        segment_distance(p, a, b).min(segment_distance(p, b, c)).min(segment_distance(p, c, a))
    }
}

pub fn mesh_distance(mesh: &Mesh, p: &Vec3) -> f64 {
    (0..mesh.triangle_count())
        .map(|i| {
            let [a, b, c] = mesh.triangle(i);
            triangle_distance(p, &a, &b, &c)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Area-weighted mean of triangle centroids.
pub fn centroid(mesh: &Mesh) -> Vec3 {
    let mut sum = Vec3::zeros();
    let mut area = 0.0;
    for i in 0..mesh.triangle_count() {
        let [a, b, c] = mesh.triangle(i);
        let w = 0.5 * (b - a).cross(&(c - a)).norm();
        sum += (a + b + c) / 3.0 * w;
        area += w;
    }
    sum / area
}

fn directed(from: &[Vec3], to: &[Vec3], squared: bool) -> f64 {
    let total: f64 = from
        .iter()
        .map(|p| {
            let d2 = to.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min);
            if squared {
                d2
            } else {
                d2.sqrt()
            }
        })
        .sum();
    total / from.len() as f64
}

/// O(n·m) symmetric Chamfer distance.
pub fn chamfer(a: &[Vec3], b: &[Vec3], squared: bool) -> f64 {
    0.5 * (directed(a, b, squared) + directed(b, a, squared))
}

/// Clips a convex polygon to `x[axis] <= bound`, or `>= bound` when `keep_below` is false.
fn clip(poly: &[Vec3], axis: usize, bound: f64, keep_below: bool) -> Vec<Vec3> {
    let inside = |p: &Vec3| if keep_below { p[axis] <= bound } else { p[axis] >= bound };
    let mut out = Vec::new();
    for i in 0..poly.len() {
        let cur = poly[i];
        let next = poly[(i + 1) % poly.len()];
        let (ci, ni) = (inside(&cur), inside(&next));
        if ci {
            out.push(cur);
        }
        if ci != ni {
            let t = (bound - cur[axis]) / (next[axis] - cur[axis]);
            let mut x = cur + (next - cur) * t;
            x[axis] = bound;
            out.push(x);
        }
    }
    out
}

/// Triangle–box overlap by clipping the triangle against all six faces.
pub fn triangle_meets_box(tri: &[Vec3; 3], lo: &Vec3, hi: &Vec3) -> bool {
    let mut poly = tri.to_vec();
    for axis in 0..3 {
        poly = clip(&poly, axis, lo[axis], false);
        if poly.is_empty() {
            return false;
        }
        poly = clip(&poly, axis, hi[axis], true);
        if poly.is_empty() {
            return false;
        }
    }
    true
}

/// Unit vector uniformly distributed on the sphere.
pub fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Rays from outside the mesh bounds aimed at random points inside them, so
/// that most rays hit.
pub fn random_rays(mesh: &Mesh, count: usize, seed: u64) -> Vec<(Vec3, Vec3)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = mesh.bounds();
    let center = b.center();
    let radius = b.extent().norm();
    (0..count)
        .map(|_| {
            let origin = center + random_direction(&mut rng) * radius * 1.5;
            let target = Vec3::new(
                rng.random_range(b.min.x..b.max.x),
                rng.random_range(b.min.y..b.max.y),
                rng.random_range(b.min.z..b.max.z),
            );
            (origin, (target - origin).normalize())
        })
        .collect()
}

pub fn l1(gt: &[f64], pred: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..gt.len() {
        s += (gt[i] - pred[i]).abs();
    }
    s / gt.len() as f64
}

pub fn gan(real: &[f64], fake: &[f64]) -> f64 {
    let clamp = |s: f64| s.clamp(1e-7, 1.0 - 1e-7);
    let mut r = 0.0;
    for &s in real {
        r += clamp(s).ln();
    }
    let mut f = 0.0;
    for &s in fake {
        f += (1.0 - clamp(s)).ln();
    }
    r / real.len() as f64 + f / fake.len() as f64
}
