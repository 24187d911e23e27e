//! Named test cases mirroring the evaluation corpus: 33 discontinuity cases
//! and 14 detection-rate cases.
//!
//! The speed cases use representative distances and deflections; the source
//! recordings did not publish theirs.

use serde::{Deserialize, Serialize};

use super::render::RenderOptions;
use super::scene::Scene;
use super::trajectory::{Trajectory, TrajectoryKind};
use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::marker::MarkerSpec;

/// ID of the single large marker.
pub const SINGLE_ID: u32 = 19;
pub const SINGLE_DIAMETER: f64 = 0.3;
/// IDs of the three-marker bundle, lowest first.
pub const BUNDLE_IDS: [u32; 3] = [19, 23, 37];
pub const BUNDLE_DIAMETER: f64 = 0.123;
/// Bundle layout on the plane, meters.
pub const BUNDLE_OFFSETS: [(f64, f64); 3] = [(-0.15, -0.1), (0.15, -0.1), (0.0, 0.16)];

pub const DISCONTINUITY_FRAME_RATE: f64 = 10.0;
pub const DISCONTINUITY_DURATION: f64 = 6.0;
pub const SPEED_FRAME_RATE: f64 = 15.0;
pub const SPEED_DURATION: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetGroup {
    Discontinuity,
    Speed,
    Demo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerLayout {
    Single,
    Bundle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub group: PresetGroup,
    pub trajectory: Trajectory,
    pub noise_sigma: f64,
    pub blur_radius: f64,
    pub seed: u64,
    /// Parameters chosen to be typical rather than taken from a recording.
    pub representative: bool,
}

impl Preset {
    pub fn scene(&self, layout: MarkerLayout) -> Scene {
        match layout {
            MarkerLayout::Single => Scene::single(single_marker()),
            MarkerLayout::Bundle => bundle_scene(),
        }
    }

    pub fn render_options(&self) -> RenderOptions {
        RenderOptions { noise_sigma: self.noise_sigma, blur_radius: self.blur_radius, seed: self.seed, supersample: 2 }
    }
}

pub fn single_marker() -> MarkerSpec {
    MarkerSpec::new(SINGLE_ID, 8, SINGLE_DIAMETER).expect("canonical constant id")
}

pub fn bundle_scene() -> Scene {
    let specs = BUNDLE_IDS.iter().map(|&id| MarkerSpec::new(id, 8, BUNDLE_DIAMETER).expect("canonical constant id"));
    Scene::coplanar(specs.collect(), &BUNDLE_OFFSETS).expect("non-overlapping constant layout")
}

/// 640×480, 77° horizontal field of view, mild barrel distortion.
pub fn preset_camera() -> CameraIntrinsics {
    CameraIntrinsics::webcam_480p().with_distortion(-0.05, 0.01, 0.0, 0.0, 0.0)
}

fn traj(kind: TrajectoryKind, distance: f64, azimuth: f64, elevation: f64, amplitude: f64) -> Trajectory {
    Trajectory {
        azimuth,
        elevation,
        amplitude,
        ..Trajectory::new(kind, DISCONTINUITY_DURATION, DISCONTINUITY_FRAME_RATE, distance)
    }
}

fn case(name: String, group: PresetGroup, trajectory: Trajectory, noise_sigma: f64, seed: u64) -> Preset {
    Preset { name, group, trajectory, noise_sigma, blur_radius: 0.6, seed, representative: group == PresetGroup::Speed }
}

/// Ranges spread evenly over 1–3 m.
fn spread(i: usize, n: usize) -> f64 {
    1.0 + 2.0 * i as f64 / (n - 1) as f64
}

/// The 33 discontinuity cases, in a fixed order.
pub fn discontinuity_presets() -> Vec<Preset> {
    let d = PresetGroup::Discontinuity;
    let mut out = Vec::with_capacity(33);
    let mut seed = 1000;
    let mut push = |name: String, t: Trajectory| {
        seed += 1;
        out.push(case(name, d, t, 8.0, seed));
    };
    for z in [0.96, 1.5, 2.0, 2.5, 3.0] {
        push(format!("calibration-z{z}"), traj(TrajectoryKind::Static, z, 0.05, 0.05, 0.0));
    }
    for i in 0..7 {
        push(format!("east-west-{}", i + 1), traj(TrajectoryKind::OrbitEastWest, spread(i, 7), 0.0, 0.1, 0.5));
    }
    for i in 0..7 {
        push(format!("north-south-{}", i + 1), traj(TrajectoryKind::OrbitNorthSouth, spread(i, 7), 0.1, 0.0, 0.45));
    }
    for i in 0..7 {
        let (near, far) = (1.0, 3.0);
        let mut t = traj(TrajectoryKind::InOut, near, 0.1 * i as f64, 0.05 * i as f64 - 0.1, 0.0);
        t.distance_end = Some(far);
        if i % 2 == 1 {
            (t.distance, t.distance_end) = (far, Some(near));
        }
        push(format!("in-out-{}", i + 1), t);
    }
    for i in 0..7 {
        push(format!("pan-tilt-{}", i + 1), traj(TrajectoryKind::PanTilt, spread(i, 7), 0.15, -0.1, 0.3));
    }
    out
}

/// The 14 detection-rate cases: static views at seven ranges, frontal and
/// deflected, 60 s each.
pub fn speed_presets() -> Vec<Preset> {
    let mut out = Vec::with_capacity(14);
    for (j, deflection) in [0.0, 0.35].into_iter().enumerate() {
        for i in 0..7 {
            let mut t = Trajectory::new(TrajectoryKind::Static, SPEED_DURATION, SPEED_FRAME_RATE, spread(i, 7));
            t.azimuth = deflection;
            let n = out.len() + 1;
            out.push(case(format!("speed-{n}"), PresetGroup::Speed, t, 4.0, 2000 + (7 * j + i) as u64));
        }
    }
    out
}

/// Short single-trajectory examples.
pub fn demo_presets() -> Vec<Preset> {
    let demo = PresetGroup::Demo;
    vec![
        case("east-west".into(), demo, traj(TrajectoryKind::OrbitEastWest, 1.5, 0.0, 0.1, 0.5), 0.0, 1),
        case("north-south".into(), demo, traj(TrajectoryKind::OrbitNorthSouth, 1.5, 0.1, 0.0, 0.45), 0.0, 2),
        case(
            "in-out".into(),
            demo,
            Trajectory { distance_end: Some(3.0), ..traj(TrajectoryKind::InOut, 1.0, 0.3, 0.1, 0.0) },
            0.0,
            3,
        ),
        case("pan-tilt".into(), demo, traj(TrajectoryKind::PanTilt, 1.5, 0.15, -0.1, 0.3), 0.0, 4),
        case("static-2m".into(), demo, traj(TrajectoryKind::Static, 2.0, 0.0, 0.0, 0.0), 0.0, 5),
    ]
}

pub fn all_presets() -> Vec<Preset> {
    let mut all = discontinuity_presets();
    all.extend(speed_presets());
    all.extend(demo_presets());
    all
}

pub fn find_preset(name: &str) -> Result<Preset> {
    let all = all_presets();
    all.iter().find(|p| p.name == name).cloned().ok_or_else(|| Error::UnknownPreset {
        name: name.to_string(),
        available: all.iter().map(|p| p.name.as_str()).collect::<Vec<_>>().join(", "),
    })
}
