use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryKind {
    Static,
    /// Azimuth swings left, back, right, back: `az0 − A·sin(2πt/T)`.
    OrbitEastWest,
    /// Elevation swings down, back, up, back.
    OrbitNorthSouth,
    /// Range eases from `distance` to `distance_end`.
    InOut,
    /// Fixed eye; the view direction pans and tilts.
    PanTilt,
}

/// Camera path around a look-at target on the marker plane.
///
/// The eye sits at `target + d·(sin az·cos el, sin el, cos az·cos el)`, so
/// azimuth moves it east and elevation north. Angles are radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub duration: f64,
    pub frame_rate: f64,
    pub distance: f64,
    #[serde(default)]
    pub distance_end: Option<f64>,
    #[serde(default)]
    pub azimuth: f64,
    #[serde(default)]
    pub elevation: f64,
    #[serde(default)]
    pub amplitude: f64,
    /// Look-at point in world coordinates; the scene centroid when absent.
    #[serde(default)]
    pub target: Option<Vector3<f64>>,
}

/// Camera placement: `rotation` maps camera-frame vectors (x right, y down,
/// z forward) into the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraPose {
    pub eye: Vector3<f64>,
    pub rotation: Matrix3<f64>,
}

impl CameraPose {
    /// Camera at `eye` looking at `target` with world `+y` up in the image.
    pub fn look_at(eye: Vector3<f64>, target: Vector3<f64>) -> Self {
        let forward = (target - eye).normalize();
        let up = if forward.cross(&Vector3::y()).norm() > 1e-6 { Vector3::y() } else { -Vector3::z() };
        let right = forward.cross(&up).normalize();
        let down = forward.cross(&right);
        Self { eye, rotation: Matrix3::from_columns(&[right, down, forward]) }
    }

    /// World point into the camera frame.
    pub fn to_camera(&self, world: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.transpose() * (world - self.eye)
    }
}

impl Trajectory {
    pub fn new(kind: TrajectoryKind, duration: f64, frame_rate: f64, distance: f64) -> Self {
        Self {
            kind,
            duration,
            frame_rate,
            distance,
            distance_end: None,
            azimuth: 0.0,
            elevation: 0.0,
            amplitude: 0.0,
            target: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.duration > 0.0 && self.frame_rate > 0.0) {
            return bad(format!("duration ({}) and frame rate ({}) must be positive", self.duration, self.frame_rate));
        }
        if !(self.distance > 0.0) || self.distance_end.is_some_and(|d| !(d > 0.0)) {
            return bad("distances must be positive".into());
        }
        let max_el = self.elevation.abs() + if self.kind == TrajectoryKind::OrbitNorthSouth { self.amplitude } else { 0.0 };
        if max_el >= 0.5 * PI - 1e-3 {
            return bad(format!("elevation reaches {:.1}°; the camera would leave the front of the plane", max_el.to_degrees()));
        }
        if !(self.amplitude >= 0.0) {
            return bad(format!("amplitude must be non-negative, got {}", self.amplitude));
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.frame_rate).round().max(1.0) as usize
    }

    pub fn timestamp(&self, frame: usize) -> f64 {
        frame as f64 / self.frame_rate
    }

    fn eye_offset(&self, az: f64, el: f64, d: f64) -> Vector3<f64> {
        d * Vector3::new(az.sin() * el.cos(), el.sin(), az.cos() * el.cos())
    }

    /// Camera pose at time `t` around the look-at point `target`.
    pub fn camera_at(&self, t: f64, target: Vector3<f64>) -> CameraPose {
        let phase = TAU * t / self.duration;
        let (az, el, d) = (self.azimuth, self.elevation, self.distance);
        match self.kind {
            TrajectoryKind::Static => CameraPose::look_at(target + self.eye_offset(az, el, d), target),
            TrajectoryKind::OrbitEastWest => {
                let az = az - self.amplitude * phase.sin();
                CameraPose::look_at(target + self.eye_offset(az, el, d), target)
            }
            TrajectoryKind::OrbitNorthSouth => {
                let el = el - self.amplitude * phase.sin();
                CameraPose::look_at(target + self.eye_offset(az, el, d), target)
            }
            TrajectoryKind::InOut => {
                let end = self.distance_end.unwrap_or(d);
                let s = 0.5 * (1.0 - (PI * t / self.duration).cos());
                CameraPose::look_at(target + self.eye_offset(az, el, d + (end - d) * s), target)
            }
            TrajectoryKind::PanTilt => {
                let base = CameraPose::look_at(target + self.eye_offset(az, el, d), target);
                let pan = self.amplitude * phase.sin();
                let tilt = 0.5 * self.amplitude * (2.0 * phase).sin();
                let turn = nalgebra::Rotation3::from_axis_angle(&Vector3::y_axis(), pan)
                    * nalgebra::Rotation3::from_axis_angle(&Vector3::x_axis(), tilt);
                CameraPose { eye: base.eye, rotation: base.rotation * turn.matrix() }
            }
        }
    }
}
