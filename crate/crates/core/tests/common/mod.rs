#![allow(dead_code)]

use fidmark_core::eval::{PoseTrace, TraceRecord};
use fidmark_core::synth::presets::preset_camera;
use fidmark_core::synth::{render_sequence, RenderOptions, RenderedSequence, Scene, Trajectory};

pub fn render(scene: &Scene, traj: &Trajectory, sigma: f64, seed: u64) -> RenderedSequence {
    let opts = RenderOptions { noise_sigma: sigma, blur_radius: 0.6, seed, supersample: 2 };
    render_sequence(scene, traj, &preset_camera(), &opts).unwrap()
}

/// Ground-truth poses of one marker as a trace.
pub fn truth_trace(seq: &RenderedSequence, id: u32) -> PoseTrace {
    let records = seq
        .ground_truth
        .iter()
        .filter(|g| g.marker_id == id)
        .map(|g| TraceRecord::from_pose(g.frame, g.t, g.marker_id, &g.pose, g.normalized_pixel))
        .collect();
    PoseTrace::new("truth", "gt", records)
}

/// Ground truth along a trajectory without rendering any pixels.
pub fn truth_only(scene: &Scene, traj: &Trajectory) -> PoseTrace {
    let cam = preset_camera();
    let target = traj.target.unwrap_or_else(|| scene.centroid());
    let records = (0..traj.frame_count())
        .flat_map(|i| {
            let t = traj.timestamp(i);
            fidmark_core::synth::ground_truth(scene, &cam, &traj.camera_at(t, target), i, t).unwrap()
        })
        .map(|g| TraceRecord::from_pose(g.frame, g.t, g.marker_id, &g.pose, g.normalized_pixel))
        .collect();
    PoseTrace::new("truth", "gt", records)
}
