//! Discontinuity classification: a sign flip of the position target that
//! coincides with an implausibly fast rotation.

use log::warn;
use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::trace::{PoseTrace, TraceRecord};
use crate::error::{Error, Result};
use crate::geometry::{GeodesicConvention, Quaternion};

/// Position-target components closer to zero than this never count as a sign flip.
pub const NEAR_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Angular speed limit, rad/s.
    pub theta_a: f64,
    /// Ratio of consecutive position-target components; negative.
    pub theta_l: f64,
    pub convention: GeodesicConvention,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { theta_a: 1.0, theta_l: -0.8, convention: GeodesicConvention::FullAngle }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta_a > 0.0 && self.theta_a.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta_a must be positive, got {}", self.theta_a)));
        }
        if !(self.theta_l < 0.0 && self.theta_l.is_finite()) {
            return Err(Error::InvalidParameter(format!("theta_l must be negative, got {}", self.theta_l)));
        }
        Ok(())
    }
}

/// Per-axis `next/prev < θ_l`; an axis with `|prev| ≤ 1e-9` is never flagged.
pub fn linear_discontinuity(prev: &Vector3<f64>, next: &Vector3<f64>, theta_l: f64) -> [bool; 3] {
    std::array::from_fn(|i| prev[i].abs() > NEAR_ZERO && next[i] / prev[i] < theta_l)
}

/// Full-angle geodesic distance per second. `None` when `dt ≤ 0`.
pub fn angular_speed(q0: &Quaternion, q1: &Quaternion, dt: f64) -> Option<f64> {
    angular_speed_with(GeodesicConvention::FullAngle, q0, q1, dt)
}

pub fn angular_speed_with(convention: GeodesicConvention, q0: &Quaternion, q1: &Quaternion, dt: f64) -> Option<f64> {
    (dt > 0.0).then(|| convention.distance(q0, q1) / dt)
}

/// Test results for one consecutive pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairTest {
    pub linear: bool,
    pub angular: bool,
    pub speed: f64,
}

impl PairTest {
    pub fn flagged(&self) -> bool {
        self.linear && self.angular
    }
}

/// `None` when the pair cannot be evaluated (non-increasing time).
pub fn test_pair(prev: &TraceRecord, next: &TraceRecord, th: &Thresholds) -> Option<PairTest> {
    let speed = angular_speed_with(th.convention, &prev.orientation(), &next.orientation(), next.t - prev.t)?;
    let linear = linear_discontinuity(&prev.position_target(), &next.position_target(), th.theta_l).iter().any(|&b| b);
    Some(PairTest { linear, angular: speed > th.theta_a, speed })
}

/// Per-pair test results; entry `i` covers records `(i, i + 1)`.
pub fn pair_tests(trace: &PoseTrace, th: &Thresholds) -> Vec<Option<PairTest>> {
    trace
        .records
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            let t = test_pair(&w[0], &w[1], th);
            if t.is_none() {
                warn!("{}/{}: skipping pair {i} with non-positive time step", trace.system, trace.case);
            }
            t
        })
        .collect()
}

/// Indices `i` of flagged pairs `(i, i + 1)`: the linear and angular tests both fire.
pub fn classify_discontinuities(trace: &PoseTrace, th: &Thresholds) -> Vec<usize> {
    pair_tests(trace, th)
        .iter()
        .enumerate()
        .filter_map(|(i, t)| t.filter(PairTest::flagged).map(|_| i))
        .collect()
}

/// Flagged pairs over the number of records.
pub fn discontinuity_rate(trace: &PoseTrace, th: &Thresholds) -> Result<f64> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    Ok(classify_discontinuities(trace, th).len() as f64 / trace.len() as f64)
}
