//! Procedural test geometry: boxes, spheres, capsules and articulated
//! capsule humanoids.
//!
//! Humanoids are y-up, face +z and stand with their feet at y = 0. Parts
//! overlap at the joints; triangles buried inside another part are removed
//! so the mesh approximates the outer surface of the union.

use std::f64::consts::PI;

use nalgebra::{Rotation3, Unit};

use crate::geometry::mesh::Mesh;
use crate::geometry::Vec3;

/// Axis-aligned cube with the given edge length, 12 outward-wound triangles.
pub fn cube(center: Vec3, side: f64) -> Mesh {
    let h = side / 2.0;
    box_mesh(center - Vec3::repeat(h), center + Vec3::repeat(h))
}

pub fn box_mesh(min: Vec3, max: Vec3) -> Mesh {
    let v: Vec<Vec3> = (0..8)
        .map(|i| {
            Vec3::new(
                if i & 1 != 0 { max.x } else { min.x },
                if i & 2 != 0 { max.y } else { min.y },
                if i & 4 != 0 { max.z } else { min.z },
            )
        })
        .collect();
    let quads = [
        [0, 2, 3, 1], // z-
        [4, 5, 7, 6], // z+
        [0, 1, 5, 4], // y-
        [2, 6, 7, 3], // y+
        [0, 4, 6, 2], // x-
        [1, 3, 7, 5], // x+
    ];
    let tris = quads
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    Mesh::new(v, tris).expect("box is valid")
}

/// Latitude/longitude sphere with its poles on the ±z axis.
pub fn uv_sphere(center: Vec3, radius: f64, segments: usize, rings: usize) -> Mesh {
    let (v, t) = capsule_geometry(center, center, radius, segments, rings.div_ceil(2).max(1), Vec3::z());
    Mesh::new(v, t).expect("sphere is valid")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capsule {
    pub a: Vec3,
    pub b: Vec3,
    pub radius: f64,
}

impl Capsule {
    pub fn new(a: Vec3, b: Vec3, radius: f64) -> Self {
        Capsule { a, b, radius }
    }

    /// Signed distance, negative inside.
    pub fn sdf(&self, p: &Vec3) -> f64 {
        let ab = self.b - self.a;
        let len2 = ab.norm_squared();
        let t = if len2 > 0.0 {
            ((p - self.a).dot(&ab) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        (p - (self.a + ab * t)).norm() - self.radius
    }

    pub fn mesh_geometry(&self, segments: usize, hemi_rings: usize) -> (Vec<Vec3>, Vec<[u32; 3]>) {
        let axis = self.b - self.a;
        let w = if axis.norm() > 1e-12 { axis.normalize() } else { Vec3::y() };
        capsule_geometry(self.a, self.b, self.radius, segments, hemi_rings, w)
    }
}

fn capsule_geometry(
    a: Vec3,
    b: Vec3,
    radius: f64,
    segments: usize,
    hemi_rings: usize,
    w: Vec3,
) -> (Vec<Vec3>, Vec<[u32; 3]>) {
    let segments = segments.max(3);
    let seed = if w.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = w.cross(&seed).normalize();
    let v = w.cross(&u);
    let len = (b - a).norm();
    let cyl_steps = if len > 1e-12 {
        ((len / (radius * 2.0 * PI / segments as f64)).ceil() as usize).max(1)
    } else {
        0
    };

    // (center, latitude) of each ring from the bottom pole to the top pole.
    let mut rings: Vec<(Vec3, f64)> = Vec::new();
    for k in 1..=hemi_rings {
        rings.push((a, -PI / 2.0 + k as f64 * PI / 2.0 / hemi_rings as f64));
    }
    for j in 1..=cyl_steps {
        rings.push((a + (b - a) * (j as f64 / cyl_steps as f64), 0.0));
    }
    for k in 1..hemi_rings {
        rings.push((b, k as f64 * PI / 2.0 / hemi_rings as f64));
    }

    let mut vertices = vec![a - w * radius];
    for &(c, lat) in &rings {
        for s in 0..segments {
            let th = 2.0 * PI * s as f64 / segments as f64;
            let radial = u * th.cos() + v * th.sin();
            vertices.push(c + (radial * lat.cos() + w * lat.sin()) * radius);
        }
    }
    vertices.push(b + w * radius);
    let top = (vertices.len() - 1) as u32;
    let ring = |r: usize, s: usize| (1 + r * segments + s % segments) as u32;

    let mut tris = Vec::new();
    for s in 0..segments {
        tris.push([0, ring(0, s + 1), ring(0, s)]);
    }
    for r in 0..rings.len() - 1 {
        for s in 0..segments {
            let (p0, p1) = (ring(r, s), ring(r, s + 1));
            let (q0, q1) = (ring(r + 1, s), ring(r + 1, s + 1));
            tris.push([p0, p1, q1]);
            tris.push([p0, q1, q0]);
        }
    }
    let last = rings.len() - 1;
    for s in 0..segments {
        tris.push([top, ring(last, s), ring(last, s + 1)]);
    }
    (vertices, tris)
}

/// Spherical limb direction: `abduct` swings outward in the frontal plane,
/// `flex` swings forward (+z). Zero angles point straight down.
fn limb_dir(side: f64, abduct_deg: f64, flex_deg: f64) -> Vec3 {
    let (a, f) = (abduct_deg.to_radians(), flex_deg.to_radians());
    Vec3::new(side * a.sin(), -a.cos() * f.cos(), a.cos() * f.sin()).normalize()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimbPose {
    /// (abduction, flexion) of the proximal segment in degrees.
    pub upper: (f64, f64),
    /// (abduction, flexion) of the distal segment in degrees.
    pub lower: (f64, f64),
}

impl LimbPose {
    pub const fn new(upper: (f64, f64), lower: (f64, f64)) -> Self {
        LimbPose { upper, lower }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HumanoidPose {
    pub name: &'static str,
    pub left_arm: LimbPose,
    pub right_arm: LimbPose,
    pub left_leg: LimbPose,
    pub right_leg: LimbPose,
    /// Rotation of the whole body about the vertical axis, degrees.
    pub yaw_deg: f64,
    /// Forward lean of the trunk, degrees.
    pub lean_deg: f64,
    /// Uniform body scale.
    pub scale: f64,
}

impl HumanoidPose {
    pub fn standing(name: &'static str) -> Self {
        let arm = LimbPose::new((20.0, 0.0), (15.0, 10.0));
        let leg = LimbPose::new((4.0, 0.0), (2.0, 0.0));
        HumanoidPose {
            name,
            left_arm: arm,
            right_arm: arm,
            left_leg: leg,
            right_leg: leg,
            yaw_deg: 0.0,
            lean_deg: 0.0,
            scale: 1.0,
        }
    }

    /// Body parts as capsules in world coordinates.
    pub fn capsules(&self) -> Vec<Capsule> {
        let s = self.scale;
        let mut parts = Vec::new();
        let pelvis_y = 0.92;
        let hip = Vec3::new(0.0, pelvis_y, 0.0);
        let lean = Rotation3::from_axis_angle(&Vec3::x_axis(), self.lean_deg.to_radians());
        let trunk = |p: Vec3| hip + lean * (p - hip);

        parts.push(Capsule::new(Vec3::new(-0.07, pelvis_y, 0.0), Vec3::new(0.07, pelvis_y, 0.0), 0.12));
        parts.push(Capsule::new(trunk(Vec3::new(0.0, 1.0, 0.0)), trunk(Vec3::new(0.0, 1.32, 0.0)), 0.145));
        parts.push(Capsule::new(trunk(Vec3::new(-0.09, 1.36, 0.0)), trunk(Vec3::new(0.09, 1.36, 0.0)), 0.085));
        parts.push(Capsule::new(trunk(Vec3::new(0.0, 1.42, 0.0)), trunk(Vec3::new(0.0, 1.52, 0.0)), 0.05));
        let head = trunk(Vec3::new(0.0, 1.63, 0.01));
        parts.push(Capsule::new(head, head, 0.105));

        for (side, arm) in [(1.0, &self.left_arm), (-1.0, &self.right_arm)] {
            let shoulder = trunk(Vec3::new(side * 0.19, 1.37, 0.0));
            let elbow = shoulder + lean * limb_dir(side, arm.upper.0, arm.upper.1) * 0.29;
            let wrist = elbow + lean * limb_dir(side, arm.lower.0, arm.lower.1) * 0.26;
            parts.push(Capsule::new(shoulder, elbow, 0.048));
            parts.push(Capsule::new(elbow, wrist, 0.04));
            parts.push(Capsule::new(wrist, wrist + lean * limb_dir(side, arm.lower.0, arm.lower.1) * 0.07, 0.035));
        }
        for (side, leg) in [(1.0, &self.left_leg), (-1.0, &self.right_leg)] {
            let hip_joint = Vec3::new(side * 0.09, pelvis_y - 0.04, 0.0);
            let knee = hip_joint + limb_dir(side, leg.upper.0, leg.upper.1) * 0.42;
            let ankle = knee + limb_dir(side, leg.lower.0, leg.lower.1) * 0.42;
            parts.push(Capsule::new(hip_joint, knee, 0.072));
            parts.push(Capsule::new(knee, ankle, 0.052));
            let toe = ankle + Vec3::new(0.0, -0.01, 0.15);
            parts.push(Capsule::new(ankle + Vec3::new(0.0, -0.02, -0.02), toe, 0.04));
        }

        let yaw = Rotation3::from_axis_angle(&Unit::new_normalize(Vec3::y()), self.yaw_deg.to_radians());
        for c in &mut parts {
            c.a = yaw * c.a * s;
            c.b = yaw * c.b * s;
            c.radius *= s;
        }
        parts
    }

    pub fn mesh(&self) -> Mesh {
        union_mesh(&self.capsules(), 20, 5)
    }
}

/// Concatenates capsule meshes and removes triangles whose centroid is
/// inside another capsule.
pub fn union_mesh(parts: &[Capsule], segments: usize, hemi_rings: usize) -> Mesh {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (i, part) in parts.iter().enumerate() {
        let (v, t) = part.mesh_geometry(segments, hemi_rings);
        let base = vertices.len() as u32;
        for tri in t {
            let c = (v[tri[0] as usize] + v[tri[1] as usize] + v[tri[2] as usize]) / 3.0;
            let buried = parts
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && other.sdf(&c) < -1e-4);
            if !buried {
                triangles.push([tri[0] + base, tri[1] + base, tri[2] + base]);
            }
        }
        vertices.extend(v);
    }
    // Drop vertices no triangle references.
    let mut remap = vec![u32::MAX; vertices.len()];
    let mut kept = Vec::new();
    for t in &mut triangles {
        for i in t.iter_mut() {
            if remap[*i as usize] == u32::MAX {
                remap[*i as usize] = kept.len() as u32;
                kept.push(vertices[*i as usize]);
            }
            *i = remap[*i as usize];
        }
    }
    Mesh::new(kept, triangles).expect("humanoid has triangles")
}

/// Articulated humanoid test set covering open, crossed and turned poses.
pub fn humanoid_poses() -> Vec<HumanoidPose> {
    let mut out = Vec::new();

    out.push(HumanoidPose::standing("a_pose"));

    let mut p = HumanoidPose::standing("t_pose");
    p.left_arm = LimbPose::new((88.0, 0.0), (88.0, 0.0));
    p.right_arm = p.left_arm;
    out.push(p);

    let mut p = HumanoidPose::standing("walk");
    p.left_arm = LimbPose::new((8.0, -25.0), (8.0, 5.0));
    p.right_arm = LimbPose::new((8.0, 25.0), (8.0, 50.0));
    p.left_leg = LimbPose::new((3.0, 28.0), (2.0, -5.0));
    p.right_leg = LimbPose::new((3.0, -18.0), (2.0, -40.0));
    out.push(p);

    let mut p = HumanoidPose::standing("arms_crossed");
    p.left_arm = LimbPose::new((8.0, 25.0), (-75.0, 55.0));
    p.right_arm = LimbPose::new((8.0, 30.0), (-80.0, 45.0));
    out.push(p);

    let mut p = HumanoidPose::standing("reach_forward");
    p.right_arm = LimbPose::new((5.0, 80.0), (3.0, 85.0));
    out.push(p);

    let mut p = HumanoidPose::standing("hands_on_hips");
    p.left_arm = LimbPose::new((35.0, -10.0), (-60.0, -20.0));
    p.right_arm = p.left_arm;
    p.left_leg = LimbPose::new((10.0, 0.0), (8.0, 0.0));
    p.right_leg = p.left_leg;
    out.push(p);

    let mut p = HumanoidPose::standing("walk_side");
    p.yaw_deg = 90.0;
    p.left_arm = LimbPose::new((6.0, -22.0), (6.0, 10.0));
    p.right_arm = LimbPose::new((6.0, 22.0), (6.0, 45.0));
    p.left_leg = LimbPose::new((2.0, 25.0), (2.0, 0.0));
    p.right_leg = LimbPose::new((2.0, -15.0), (2.0, -35.0));
    out.push(p);

    let mut p = HumanoidPose::standing("turned_reach");
    p.yaw_deg = 40.0;
    p.left_arm = LimbPose::new((10.0, 70.0), (5.0, 95.0));
    out.push(p);

    let mut p = HumanoidPose::standing("squat");
    p.lean_deg = 20.0;
    p.left_arm = LimbPose::new((10.0, 75.0), (8.0, 80.0));
    p.right_arm = p.left_arm;
    p.left_leg = LimbPose::new((12.0, 75.0), (6.0, -15.0));
    p.right_leg = p.left_leg;
    out.push(p);

    let mut p = HumanoidPose::standing("guard");
    p.left_arm = LimbPose::new((20.0, 20.0), (-30.0, 150.0));
    p.right_arm = LimbPose::new((20.0, 35.0), (-25.0, 140.0));
    p.left_leg = LimbPose::new((6.0, 12.0), (4.0, -8.0));
    out.push(p);

    let mut p = HumanoidPose::standing("knee_raise");
    p.scale = 0.94;
    p.left_leg = LimbPose::new((4.0, 85.0), (2.0, -5.0));
    p.left_arm = LimbPose::new((40.0, 10.0), (30.0, 30.0));
    p.right_arm = LimbPose::new((45.0, -10.0), (35.0, 20.0));
    out.push(p);

    let mut p = HumanoidPose::standing("wave_turned");
    p.yaw_deg = -30.0;
    p.scale = 1.06;
    p.right_arm = LimbPose::new((100.0, 10.0), (160.0, 20.0));
    out.push(p);

    out
}
