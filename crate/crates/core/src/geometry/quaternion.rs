use std::ops::{Mul, Neg};

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

/// Unit quaternion `w + xi + yj + zk`.
///
/// Every constructor normalizes, so a value of this type always has unit
/// norm up to rounding. `q` and `-q` describe the same rotation; the distance
/// functions in this module respect that.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Default for Quaternion {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Quaternion {
    pub const IDENTITY: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    /// Normalizing constructor. A zero quaternion maps to the identity.
    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        let n = (w * w + x * x + y * y + z * z).sqrt();
        if n == 0.0 || !n.is_finite() {
            return Self::IDENTITY;
        }
        Self { w: w / n, x: x / n, y: y / n, z: z / n }
    }

    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n == 0.0 {
            return Self::IDENTITY;
        }
        let a = axis / n;
        let (s, c) = (0.5 * angle).sin_cos();
        Self::new(c, a.x * s, a.y * s, a.z * s)
    }

    /// Rotation from the columns of an orthonormal matrix.
    pub fn from_rotation_matrix(m: &Matrix3<f64>) -> Self {
        let uq = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(*m));
        let q = uq.quaternion();
        Self::new(q.w, q.i, q.j, q.k)
    }

    pub fn to_rotation_matrix(&self) -> Matrix3<f64> {
        let Quaternion { w, x, y, z } = *self;
        Matrix3::new(
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        )
    }

    pub fn conjugate(&self) -> Self {
        Self { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn rotate(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.to_rotation_matrix() * v
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let v = (self.x * self.x + self.y * self.y + self.z * self.z).sqrt();
        2.0 * v.atan2(self.w.abs())
    }

    /// Intrinsic Z-Y-X rotation `Rz(yaw) · Ry(pitch) · Rx(roll)`.
    pub fn from_ypr(yaw: f64, pitch: f64, roll: f64) -> Self {
        let (sy, cy) = (0.5 * yaw).sin_cos();
        let (sp, cp) = (0.5 * pitch).sin_cos();
        let (sr, cr) = (0.5 * roll).sin_cos();
        Self::new(
            cy * cp * cr + sy * sp * sr,
            cy * cp * sr - sy * sp * cr,
            cy * sp * cr + sy * cp * sr,
            sy * cp * cr - cy * sp * sr,
        )
    }

    /// Intrinsic Z-Y-X angles `(yaw, pitch, roll)`.
    ///
    /// At gimbal lock (`|pitch| = π/2`) roll is pinned to zero and yaw carries
    /// the remaining free angle.
    pub fn to_ypr(&self) -> (f64, f64, f64) {
        let m = self.to_rotation_matrix();
        let cos_pitch = (m[(0, 0)] * m[(0, 0)] + m[(1, 0)] * m[(1, 0)]).sqrt();
        let pitch = (-m[(2, 0)]).atan2(cos_pitch);
        if cos_pitch < 1e-12 {
            let yaw = (-m[(0, 1)]).atan2(m[(1, 1)]);
            return (yaw, pitch, 0.0);
        }
        let yaw = m[(1, 0)].atan2(m[(0, 0)]);
        let roll = m[(2, 1)].atan2(m[(2, 2)]);
        (yaw, pitch, roll)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, r: Quaternion) -> Quaternion {
        let l = self;
        Quaternion::new(
            l.w * r.w - l.x * r.x - l.y * r.y - l.z * r.z,
            l.w * r.x + l.x * r.w + l.y * r.z - l.z * r.y,
            l.w * r.y - l.x * r.z + l.y * r.w + l.z * r.x,
            l.w * r.z + l.x * r.y - l.y * r.x + l.z * r.w,
        )
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }
}

/// Geodesic distance on SO(3): `2·arccos(|⟨q1, q2⟩|)`, in `[0, π]`.
///
/// Evaluated through the equivalent `4·atan2(|q1 − s·q2|, |q1 + s·q2|)` with
/// `s = sign⟨q1, q2⟩`, which keeps full precision for nearly equal rotations.
pub fn geodesic_distance(q1: &Quaternion, q2: &Quaternion) -> f64 {
    let s = if q1.dot(q2) < 0.0 { -1.0 } else { 1.0 };
    let diff = [q1.w - s * q2.w, q1.x - s * q2.x, q1.y - s * q2.y, q1.z - s * q2.z];
    let sum = [q1.w + s * q2.w, q1.x + s * q2.x, q1.y + s * q2.y, q1.z + s * q2.z];
    let norm = |v: [f64; 4]| v.iter().map(|c| c * c).sum::<f64>().sqrt();
    (4.0 * norm(diff).atan2(norm(sum))).min(std::f64::consts::PI)
}

/// Which angle `dist(q1, q2)` reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeodesicConvention {
    /// Full rotation angle, `2·arccos|dot|`; a half-turn costs π.
    #[default]
    FullAngle,
    /// Angle between the quaternions on S³, `arccos|dot|`.
    HalfAngle,
}

impl GeodesicConvention {
    pub fn distance(self, q1: &Quaternion, q2: &Quaternion) -> f64 {
        match self {
            GeodesicConvention::FullAngle => geodesic_distance(q1, q2),
            GeodesicConvention::HalfAngle => 0.5 * geodesic_distance(q1, q2),
        }
    }
}
