use super::bvh::{Bvh, Hit};
use super::intersect::ray_sphere;
use super::mesh::Mesh;
use super::{Aabb, Ray, Vec3, MIN_HIT_DISTANCE};

/// A surface that can be probed along rays for its nearest and farthest
/// crossings. Both the triangle mesh and the analytic sphere implement it,
/// so the encoder works on either.
pub trait RayTarget: Sync {
    /// `(closest, farthest)` hit distances, or `None` on a miss.
    fn hit_span(&self, ray: &Ray) -> Option<(f64, f64)>;

    /// Center of mass used to center depths, world coordinates.
    fn centroid(&self) -> Vec3;

    /// World-space bounding box.
    fn bounds(&self) -> Aabb;

    /// Points that must lie in front of the camera for encoding to be valid.
    fn extreme_points(&self) -> Vec<Vec3>;

    fn is_watertight(&self) -> bool;
}

/// A mesh bundled with its acceleration structure.
#[derive(Debug, Clone)]
pub struct MeshScene {
    mesh: Mesh,
    bvh: Bvh,
    watertight: bool,
}

impl MeshScene {
    pub fn new(mesh: Mesh) -> Self {
        let bvh = Bvh::build(&mesh);
        let watertight = mesh.is_watertight();
        MeshScene { mesh, bvh, watertight }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn bvh(&self) -> &Bvh {
        &self.bvh
    }

    pub fn closest(&self, ray: &Ray) -> Option<Hit> {
        self.bvh.closest(&self.mesh, ray)
    }

    pub fn farthest(&self, ray: &Ray) -> Option<Hit> {
        self.bvh.farthest(&self.mesh, ray)
    }

    pub fn all_hits(&self, ray: &Ray) -> Vec<Hit> {
        self.bvh.all_hits(&self.mesh, ray)
    }
}

impl RayTarget for MeshScene {
    fn hit_span(&self, ray: &Ray) -> Option<(f64, f64)> {
        let near = self.closest(ray)?;
        let far = self.farthest(ray)?;
        Some((near.distance, far.distance))
    }

    fn centroid(&self) -> Vec3 {
        self.mesh.centroid()
    }

    fn bounds(&self) -> Aabb {
        self.mesh.bounds()
    }

    fn extreme_points(&self) -> Vec<Vec3> {
        self.mesh.vertices().to_vec()
    }

    fn is_watertight(&self) -> bool {
        self.watertight
    }
}

/// Analytic sphere, used where exact surface geometry is needed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Vec3,
    pub radius: f64,
}

impl Sphere {
    pub fn new(center: Vec3, radius: f64) -> Self {
        Sphere { center, radius }
    }

    pub fn distance_to_surface(&self, p: &Vec3) -> f64 {
        ((p - self.center).norm() - self.radius).abs()
    }
}

impl RayTarget for Sphere {
    fn hit_span(&self, ray: &Ray) -> Option<(f64, f64)> {
        let (t0, t1) = ray_sphere(&ray.origin, &ray.direction, &self.center, self.radius)?;
        if t1 <= MIN_HIT_DISTANCE {
            return None;
        }
        Some((if t0 > MIN_HIT_DISTANCE { t0 } else { t1 }, t1))
    }

    fn centroid(&self) -> Vec3 {
        self.center
    }

    fn bounds(&self) -> Aabb {
        Aabb {
            min: self.center - Vec3::repeat(self.radius),
            max: self.center + Vec3::repeat(self.radius),
        }
    }

    fn extreme_points(&self) -> Vec<Vec3> {
        self.bounds().corners().to_vec()
    }

    fn is_watertight(&self) -> bool {
        true
    }
}
