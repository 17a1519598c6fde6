use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion};

use super::Vec3;
use crate::error::{Error, Result};

/// Pinhole camera with square pixels.
///
/// Camera coordinates: +x right, +y down, +z along the optical axis. The
/// sensor height follows from the width and the pixel aspect. A sensor
/// offset shifts the image window off the optical axis, which is how square
/// crops of a larger frame are represented.
#[derive(Debug, Clone, PartialEq)]
pub struct Camera {
    width: usize,
    height: usize,
    sensor_width_mm: f64,
    focal_length_mm: f64,
    sensor_offset_mm: [f64; 2],
    pose: Isometry3<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Vec3,
    pub direction: Vec3,
}

impl Ray {
    pub fn at(&self, t: f64) -> Vec3 {
        self.origin + self.direction * t
    }
}

impl Camera {
    pub fn new(width: usize, height: usize, sensor_width_mm: f64, focal_length_mm: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidCamera(format!("image size {width}x{height}")));
        }
        if !(sensor_width_mm > 0.0 && sensor_width_mm.is_finite()) {
            return Err(Error::InvalidCamera(format!("sensor width {sensor_width_mm} mm")));
        }
        if !(focal_length_mm > 0.0 && focal_length_mm.is_finite()) {
            return Err(Error::InvalidCamera(format!("focal length {focal_length_mm} mm")));
        }
        Ok(Camera {
            width,
            height,
            sensor_width_mm,
            focal_length_mm,
            sensor_offset_mm: [0.0, 0.0],
            pose: Isometry3::identity(),
        })
    }

    pub fn with_pose(mut self, pose: Isometry3<f64>) -> Self {
        self.pose = pose;
        self
    }

    pub fn with_sensor_offset(mut self, offset_mm: [f64; 2]) -> Self {
        self.sensor_offset_mm = offset_mm;
        self
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn sensor_width_mm(&self) -> f64 {
        self.sensor_width_mm
    }

    pub fn sensor_height_mm(&self) -> f64 {
        self.pixel_pitch_mm() * self.height as f64
    }

    pub fn focal_length_mm(&self) -> f64 {
        self.focal_length_mm
    }

    pub fn sensor_offset_mm(&self) -> [f64; 2] {
        self.sensor_offset_mm
    }

    /// World → camera transform.
    pub fn pose(&self) -> &Isometry3<f64> {
        &self.pose
    }

    pub fn pixel_pitch_mm(&self) -> f64 {
        self.sensor_width_mm / self.width as f64
    }

    /// World-space width subtended by one pixel at `distance` meters.
    pub fn pixel_footprint(&self, distance: f64) -> f64 {
        self.pixel_pitch_mm() / self.focal_length_mm * distance
    }

    /// Camera center in world coordinates.
    pub fn center_world(&self) -> Vec3 {
        self.pose.inverse_transform_point(&Point3::origin()).coords
    }

    pub fn to_camera(&self, world: &Vec3) -> Vec3 {
        self.pose.transform_point(&Point3::from(*world)).coords
    }

    pub fn to_world(&self, cam: &Vec3) -> Vec3 {
        self.pose.inverse_transform_point(&Point3::from(*cam)).coords
    }

    /// Sensor-plane position in millimeters of a pixel-space coordinate.
    pub fn sensor_position(&self, x_px: f64, y_px: f64) -> [f64; 2] {
        let pitch = self.pixel_pitch_mm();
        [
            self.sensor_offset_mm[0] + (x_px - 0.5 * self.width as f64) * pitch,
            self.sensor_offset_mm[1] + (y_px - 0.5 * self.height as f64) * pitch,
        ]
    }

    /// Unit direction in camera coordinates through the center of pixel
    /// `(u, v)`. No bounds check.
    #[inline]
    pub fn direction(&self, u: usize, v: usize) -> Vec3 {
        let [x, y] = self.sensor_position(u as f64 + 0.5, v as f64 + 0.5);
        Vec3::new(x, y, self.focal_length_mm).normalize()
    }

    fn check_pixel(&self, u: usize, v: usize) -> Result<()> {
        if u >= self.width || v >= self.height {
            return Err(Error::PixelOutOfRange {
                u,
                v,
                width: self.width,
                height: self.height,
            });
        }
        Ok(())
    }

    /// Ray through the pixel center in camera coordinates.
    pub fn pixel_ray(&self, u: usize, v: usize) -> Result<Ray> {
        self.check_pixel(u, v)?;
        Ok(Ray {
            origin: Vec3::zeros(),
            direction: self.direction(u, v),
        })
    }

    /// The same ray expressed in world coordinates.
    pub fn world_ray(&self, u: usize, v: usize) -> Result<Ray> {
        self.check_pixel(u, v)?;
        Ok(self.world_ray_unchecked(u, v))
    }

    #[inline]
    pub(crate) fn world_ray_unchecked(&self, u: usize, v: usize) -> Ray {
        let d = self.direction(u, v);
        Ray {
            origin: self.center_world(),
            direction: self.pose.inverse_transform_vector(&d),
        }
    }

    /// Pinhole projection of a camera-space point onto the sensor, in mm.
    pub fn project(&self, cam: &Vec3) -> [f64; 2] {
        [cam.x * self.focal_length_mm / cam.z, cam.y * self.focal_length_mm / cam.z]
    }

    /// The sensor rectangle `[xmin, ymin, xmax, ymax]` in millimeters.
    pub fn sensor_rect(&self) -> [f64; 4] {
        let [x0, y0] = self.sensor_position(0.0, 0.0);
        let [x1, y1] = self.sensor_position(self.width as f64, self.height as f64);
        [x0, y0, x1, y1]
    }

    /// Square `n`×`n` camera covering a sensor window of side `side_mm`
    /// centered at `center_mm` (absolute sensor coordinates).
    pub fn square_window(&self, center_mm: [f64; 2], side_mm: f64, n: usize) -> Result<Camera> {
        Ok(Camera::new(n, n, side_mm, self.focal_length_mm)?
            .with_sensor_offset(center_mm)
            .with_pose(self.pose))
    }
}

/// Row-major 4×4 matrix of a rigid transform.
pub fn pose_to_row_major(pose: &Isometry3<f64>) -> [f64; 16] {
    let m = pose.to_homogeneous();
    let mut out = [0.0; 16];
    for r in 0..4 {
        for c in 0..4 {
            out[4 * r + c] = m[(r, c)];
        }
    }
    out
}

/// Parses a row-major 4×4 rigid transform, rejecting non-rigid matrices.
pub fn pose_from_row_major(m: &[f64]) -> Result<Isometry3<f64>> {
    if m.len() != 16 {
        return Err(Error::InvalidCamera(format!("pose has {} entries, expected 16", m.len())));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidCamera("pose has non-finite entries".into()));
    }
    let r = Matrix3::new(m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]);
    let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
    if ortho > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidCamera("pose rotation is not orthonormal".into()));
    }
    if m[12] != 0.0 || m[13] != 0.0 || m[14] != 0.0 || m[15] != 1.0 {
        return Err(Error::InvalidCamera("pose bottom row must be [0 0 0 1]".into()));
    }
    let rot = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(r));
    Ok(Isometry3::from_parts(Translation3::new(m[3], m[7], m[11]), rot))
}

/// Pose that looks at a y-up subject from its front (+z side) so that its
/// `target` point lands on the optical axis at `distance` meters.
pub fn front_view_pose(target: &Vec3, distance: f64) -> Isometry3<f64> {
    // World y-up/z-toward-viewer to camera y-down/z-forward.
    let rot = UnitQuaternion::from_axis_angle(&Vec3::x_axis(), std::f64::consts::PI);
    let t = Vec3::new(0.0, 0.0, distance) - rot * target;
    Isometry3::from_parts(Translation3::from(t), rot)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_camera() -> Camera {
        Camera::new(320, 240, 32.0, 60.0).unwrap()
    }

    #[test]
    fn rejects_invalid() {
        assert!(Camera::new(0, 10, 32.0, 60.0).is_err());
        assert!(Camera::new(10, 10, 0.0, 60.0).is_err());
        assert!(Camera::new(10, 10, 32.0, -1.0).is_err());
        assert!(Camera::new(10, 10, 32.0, f64::NAN).is_err());
    }

    #[test]
    fn principal_pixel_is_optical_axis() {
        let cam = Camera::new(5, 5, 10.0, 50.0).unwrap();
        let r = cam.pixel_ray(2, 2).unwrap();
        assert_eq!(r.direction, Vec3::z());
        assert_eq!(r.origin, Vec3::zeros());
    }

    #[test]
    fn corner_pixel_matches_pinhole() {
        let cam = reference_camera();
        let d = cam.pixel_ray(0, 0).unwrap().direction;
        // Pixel center (0.5, 0.5): sensor offset (-160 + 0.5) * 0.1 mm, (-120 + 0.5) * 0.1 mm.
        let xs = -15.95;
        let ys = -11.95;
        assert!((d.x / d.z - xs / 60.0).abs() < 1e-12);
        assert!((d.y / d.z - ys / 60.0).abs() < 1e-12);
        assert!((d.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirrored_pixels() {
        let cam = reference_camera();
        let a = cam.pixel_ray(10, 37).unwrap().direction;
        let b = cam.pixel_ray(309, 37).unwrap().direction;
        assert!((a.x + b.x).abs() < 1e-15);
        assert_eq!(a.y, b.y);
        assert_eq!(a.z, b.z);
    }

    #[test]
    fn out_of_range_pixel() {
        assert!(matches!(reference_camera().pixel_ray(320, 0), Err(Error::PixelOutOfRange { .. })));
        assert!(reference_camera().pixel_ray(0, 240).is_err());
    }

    #[test]
    fn footprint_at_eight_meters() {
        assert!((reference_camera().pixel_footprint(8.0) - 0.1 / 60.0 * 8.0).abs() < 1e-15);
    }

    #[test]
    fn pose_round_trip_and_rejection() {
        let pose = front_view_pose(&Vec3::new(0.1, 0.9, -0.2), 8.0);
        let m = pose_to_row_major(&pose);
        let back = pose_from_row_major(&m).unwrap();
        assert!((back.to_homogeneous() - pose.to_homogeneous()).abs().max() < 1e-12);
        let mut bad = m;
        bad[0] = 2.0;
        assert!(pose_from_row_major(&bad).is_err());
    }

    #[test]
    fn front_view_places_target_on_axis() {
        let target = Vec3::new(0.1, 0.9, -0.2);
        let cam = reference_camera().with_pose(front_view_pose(&target, 8.0));
        let c = cam.to_camera(&target);
        assert!((c - Vec3::new(0.0, 0.0, 8.0)).norm() < 1e-12);
        // world up maps to image up (negative camera y)
        let up = cam.to_camera(&(target + Vec3::y()));
        assert!(up.y < c.y);
        let world_ray = cam.world_ray(160, 120).unwrap();
        assert!((world_ray.origin - cam.center_world()).norm() < 1e-15);
    }
}
