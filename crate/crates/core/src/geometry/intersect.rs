use super::Vec3;

/// Barycentric slack so rays through shared edges and vertices cannot slip
/// between adjacent triangles.
const BARY_EPS: f64 = 1e-10;

/// Möller–Trumbore ray/triangle test. Returns `(t, u, v)` where `t` is the
/// ray parameter and `(u, v)` are the barycentric weights of `b` and `c`.
/// Edges and vertices count as inside.
#[inline]
pub fn ray_triangle(origin: &Vec3, dir: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Option<(f64, f64, f64)> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = origin - a;
    let u = s.dot(&p) * inv_det;
    if !(-BARY_EPS..=1.0 + BARY_EPS).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv_det;
    if v < -BARY_EPS || u + v > 1.0 + BARY_EPS {
        return None;
    }
    let t = e2.dot(&q) * inv_det;
    Some((t, u, v))
}

/// Entry and exit parameters of a ray against a sphere, `t_near <= t_far`.
/// A tangent ray yields `t_near == t_far`.
pub fn ray_sphere(origin: &Vec3, dir: &Vec3, center: &Vec3, radius: f64) -> Option<(f64, f64)> {
    let oc = origin - center;
    let a = dir.norm_squared();
    let half_b = oc.dot(dir);
    let c = oc.norm_squared() - radius * radius;
    let disc = half_b * half_b - a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable root pair.
    let q = if half_b > 0.0 { -(half_b + sq) } else { -half_b + sq };
    if q == 0.0 {
        return Some((0.0, 0.0));
    }
    let (r0, r1) = (q / a, c / q);
    Some(if r0 <= r1 { (r0, r1) } else { (r1, r0) })
}

/// Unsigned distance from a point to a triangle (closest-point by region).
pub fn point_triangle_distance(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (p - closest_point_on_triangle(p, a, b, c)).norm()
}

pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_hit_and_miss() {
        let a = Vec3::new(-1.0, -1.0, 5.0);
        let b = Vec3::new(1.0, -1.0, 5.0);
        let c = Vec3::new(0.0, 1.0, 5.0);
        let o = Vec3::zeros();
        let (t, _, _) = ray_triangle(&o, &Vec3::z(), &a, &b, &c).unwrap();
        assert!((t - 5.0).abs() < 1e-15);
        assert!(ray_triangle(&o, &Vec3::new(1.0, 1.0, 0.1).normalize(), &a, &b, &c).is_none());
        // parallel
        assert!(ray_triangle(&o, &Vec3::x(), &a, &b, &c).is_none());
    }

    #[test]
    fn sphere_roots() {
        let (t0, t1) = ray_sphere(&Vec3::zeros(), &Vec3::z(), &Vec3::new(0.0, 0.0, 8.0), 0.5).unwrap();
        assert_eq!((t0, t1), (7.5, 8.5));
        assert!(ray_sphere(&Vec3::zeros(), &Vec3::x(), &Vec3::new(0.0, 0.0, 8.0), 0.5).is_none());
    }

    #[test]
    fn closest_point_regions() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(1.0, 0.0, 0.0);
        let c = Vec3::new(0.0, 1.0, 0.0);
        assert_eq!(point_triangle_distance(&Vec3::new(0.2, 0.2, 3.0), &a, &b, &c), 3.0);
        assert_eq!(point_triangle_distance(&Vec3::new(-1.0, -1.0, 0.0), &a, &b, &c), 2f64.sqrt());
        assert!((point_triangle_distance(&Vec3::new(1.0, 1.0, 0.0), &a, &b, &c) - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(point_triangle_distance(&Vec3::new(0.5, -2.0, 0.0), &a, &b, &c), 2.0);
    }
}
