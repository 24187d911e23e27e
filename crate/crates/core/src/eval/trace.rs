use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::detector::{MarkerDetection, Solution};
use crate::geometry::{Pose, Quaternion};

/// One line of a pose trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub frame: usize,
    pub t: f64,
    pub id: u32,
    pub e: f64,
    pub n: f64,
    pub u: f64,
    pub qw: f64,
    pub qx: f64,
    pub qy: f64,
    pub qz: f64,
    pub un: f64,
    pub vn: f64,
    pub solution: Option<Solution>,
    pub var_a: Option<f64>,
    pub var_b: Option<f64>,
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl TraceRecord {
    /// Record for the chosen pose of a decoded detection.
    pub fn from_detection(det: &MarkerDetection) -> Option<Self> {
        let id = det.id?;
        Some(Self::from_pose(det.frame, det.timestamp, id, det.chosen_pose(), det.normalized_pixel).with_scores(
            det.chosen.unwrap_or(Solution::A),
            det.variance_a,
            det.variance_b,
        ))
    }

    pub fn from_pose(frame: usize, t: f64, id: u32, pose: &Pose, normalized_pixel: (f64, f64)) -> Self {
        let p = crate::detector::position_target(pose);
        let q = pose.orientation;
        Self {
            frame,
            t,
            id,
            e: p.x,
            n: p.y,
            u: p.z,
            qw: q.w,
            qx: q.x,
            qy: q.y,
            qz: q.z,
            un: normalized_pixel.0,
            vn: normalized_pixel.1,
            solution: None,
            var_a: None,
            var_b: None,
        }
    }

    fn with_scores(mut self, solution: Solution, var_a: f64, var_b: f64) -> Self {
        self.solution = Some(solution);
        self.var_a = finite(var_a);
        self.var_b = finite(var_b);
        self
    }

    pub fn position_target(&self) -> Vector3<f64> {
        Vector3::new(self.e, self.n, self.u)
    }

    pub fn orientation(&self) -> Quaternion {
        Quaternion { w: self.qw, x: self.qx, y: self.qy, z: self.qz }
    }

    /// Camera-frame pose reconstructed from the position target and orientation.
    pub fn pose(&self) -> Pose {
        let q = self.orientation();
        Pose::new(q.rotate(&self.position_target()), q)
    }

    /// The same record with the pose replaced by its ambiguity twin: east and
    /// north change sign, up and the pixel position are untouched.
    pub fn ambiguity_twin(&self) -> Self {
        let twin = self.pose().ambiguity_twin().orientation;
        Self {
            e: -self.e,
            n: -self.n,
            qw: twin.w,
            qx: twin.x,
            qy: twin.y,
            qz: twin.z,
            solution: self.solution.map(|s| match s {
                Solution::A => Solution::B,
                Solution::B => Solution::A,
            }),
            var_a: self.var_b,
            var_b: self.var_a,
            ..self.clone()
        }
    }
}

/// Time-ordered records of one system on one test case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseTrace {
    pub system: String,
    pub case: String,
    pub records: Vec<TraceRecord>,
}

impl PoseTrace {
    pub fn new(system: impl Into<String>, case: impl Into<String>, records: Vec<TraceRecord>) -> Self {
        Self { system: system.into(), case: case.into(), records }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records of a single marker ID, order preserved.
    pub fn for_id(&self, id: u32) -> PoseTrace {
        PoseTrace {
            system: self.system.clone(),
            case: self.case.clone(),
            records: self.records.iter().filter(|r| r.id == id).cloned().collect(),
        }
    }

    /// Span between the first and last timestamp.
    pub fn duration(&self) -> f64 {
        match (self.records.first(), self.records.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}
