//! Rotation algebra, camera model, conic geometry and plane fitting.
//!
//! Everything here is a pure function of its inputs.

pub mod camera;
pub mod conic;
pub mod plane;
pub mod pose;
pub mod quaternion;

pub use camera::CameraIntrinsics;
pub use conic::{
    circle_pose_candidates, circle_pose_from_boundary, circle_pose_from_conic, fit_conic, CirclePoseCandidates, CircleSolution, Ellipse,
};
pub use plane::{fit_plane, Plane};
pub use pose::Pose;
pub use quaternion::{geodesic_distance, GeodesicConvention, Quaternion};
