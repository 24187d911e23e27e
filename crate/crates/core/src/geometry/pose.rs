use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::quaternion::Quaternion;

/// Rigid pose of a marker in the camera frame.
///
/// `orientation` maps marker-frame vectors into the camera frame. The marker
/// frame has x along the marker's east axis, y along north, and z along the
/// outward face normal (up).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: Quaternion,
}

impl Pose {
    pub fn new(position: Vector3<f64>, orientation: Quaternion) -> Self {
        Self { position, orientation }
    }

    /// Builds the marker frame from its outward normal and an in-plane hint for
    /// the east axis; the hint is projected onto the plane.
    pub fn from_normal_and_east(position: Vector3<f64>, normal: &Vector3<f64>, east_hint: &Vector3<f64>) -> Self {
        let z = normal.normalize();
        let mut x = east_hint - z * z.dot(east_hint);
        if x.norm() < 1e-12 {
            let helper = if z.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
            x = helper - z * z.dot(&helper);
        }
        let x = x.normalize();
        let y = z.cross(&x);
        let m = Matrix3::from_columns(&[x, y, z]);
        Self { position, orientation: Quaternion::from_rotation_matrix(&m) }
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        self.orientation.to_rotation_matrix()
    }

    /// Outward face normal in the camera frame.
    pub fn normal(&self) -> Vector3<f64> {
        self.orientation.rotate(&Vector3::z())
    }

    pub fn east(&self) -> Vector3<f64> {
        self.orientation.rotate(&Vector3::x())
    }

    pub fn north(&self) -> Vector3<f64> {
        self.orientation.rotate(&Vector3::y())
    }

    /// Marker-frame point to camera frame.
    pub fn transform_point(&self, local: &Vector3<f64>) -> Vector3<f64> {
        self.position + self.orientation.rotate(local)
    }

    /// Point on the marker plane at polar coordinates `(radius, angle)`, with
    /// the angle measured from east toward north.
    pub fn plane_point(&self, radius: f64, angle: f64) -> Vector3<f64> {
        self.transform_point(&Vector3::new(radius * angle.cos(), radius * angle.sin(), 0.0))
    }

    /// The other pose an ideal circle could have produced: a half-turn about
    /// the line of sight composed with a half-turn about the marker normal.
    /// East and north components of the position target change sign, up is kept.
    pub fn ambiguity_twin(&self) -> Pose {
        let sight = Quaternion::from_axis_angle(&self.position, std::f64::consts::PI);
        let spin = Quaternion::from_axis_angle(&Vector3::z(), std::f64::consts::PI);
        Pose { position: self.position, orientation: sight * self.orientation * spin }
    }
}
