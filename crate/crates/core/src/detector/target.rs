use nalgebra::Vector3;

use crate::geometry::{CameraIntrinsics, Pose};

/// Camera-to-marker translation in the marker's east/north/up frame.
///
/// Treats the marker as lying flat and facing up, so a marker directly
/// below a downward-looking camera at distance `d` gives `(0, 0, -d)`.
pub fn position_target(pose: &Pose) -> Vector3<f64> {
    pose.orientation.conjugate().rotate(&pose.position)
}

/// Pixel position mapped to `[-1, 1]` across the image.
pub fn normalized_pixel(u: f64, v: f64, cam: &CameraIntrinsics) -> (f64, f64) {
    let w = cam.width as f64;
    let h = cam.height as f64;
    ((2.0 * u - w) / w, (2.0 * v - h) / h)
}
