use nalgebra::Vector3;

use super::detect::{MarkerDetection, Solution};
use super::target::normalized_pixel;
use crate::error::{Error, Result};
use crate::geometry::{fit_plane, CameraIntrinsics, Pose};

/// Fuses coplanar markers into one detection.
///
/// The plane through the constituent positions gives the bundle normal
/// (pitch and roll); east comes from the lowest-ID constituent projected into
/// that plane; position is the mean of the constituent positions.
pub fn bundle_multi(dets: &[MarkerDetection], cam: &CameraIntrinsics) -> Result<MarkerDetection> {
    let members: Vec<&MarkerDetection> = dets.iter().filter(|d| d.id.is_some()).collect();
    if members.len() < 3 {
        return Err(Error::TooFewConstituents(members.len()));
    }
    // constituents stay in the given order so the mean is the plain
    // in-order average of their positions
    let positions: Vec<Vector3<f64>> = members.iter().map(|d| d.position()).collect();
    let plane = fit_plane(&positions)?;
    let mean = positions.iter().sum::<Vector3<f64>>() / positions.len() as f64;
    let yaw_source = *members.iter().min_by_key(|d| d.id).expect("at least three members");
    let pose = Pose::from_normal_and_east(mean, &plane.normal, &yaw_source.chosen_pose().east());
    let center_px = cam.project(&mean)?;
    let mut ellipse = yaw_source.ellipse;
    ellipse.u = center_px.x;
    ellipse.v = center_px.y;
    Ok(MarkerDetection {
        frame: yaw_source.frame,
        timestamp: yaw_source.timestamp,
        id: yaw_source.id,
        pose_a: pose,
        pose_b: pose.ambiguity_twin(),
        chosen: Some(Solution::A),
        variance_a: 0.0,
        variance_b: 0.0,
        fallback: false,
        center_px,
        normalized_pixel: normalized_pixel(center_px.x, center_px.y, cam),
        ellipse,
        inner_center: center_px,
        threshold: yaw_source.threshold,
        white_level: yaw_source.white_level,
        black_level: yaw_source.black_level,
    })
}
