use std::f64::consts::TAU;

use image::GrayImage;
use log::debug;
use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::params::DetectorParams;
use super::segment::{segment_image, SegmentPair};
use super::target::{normalized_pixel, position_target};
use crate::geometry::{circle_pose_candidates, circle_pose_from_boundary, CameraIntrinsics, Ellipse, Pose};
use crate::marker::decode_ring;

/// Boundary rays cast from the ellipse center during edge refinement.
const BOUNDARY_RAYS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Solution {
    A,
    B,
}

impl std::fmt::Display for Solution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Solution::A => "A",
            Solution::B => "B",
        })
    }
}

/// One detected marker with both pose candidates.
///
/// Candidate A's normal makes the smaller angle with the line of sight. The
/// two candidate centers lie at the same range from the camera.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerDetection {
    pub frame: usize,
    pub timestamp: f64,
    pub id: Option<u32>,
    pub pose_a: Pose,
    pub pose_b: Pose,
    pub chosen: Option<Solution>,
    pub variance_a: f64,
    pub variance_b: f64,
    /// Set when the edge strategy could not find edges and fell back to tooth counts.
    pub fallback: bool,
    /// Projection of the circle center, in pixels.
    pub center_px: Vector2<f64>,
    pub normalized_pixel: (f64, f64),
    pub ellipse: Ellipse,
    /// Centroid of the white inner region, in pixels.
    pub inner_center: Vector2<f64>,
    pub threshold: f64,
    pub white_level: f64,
    pub black_level: f64,
}

impl MarkerDetection {
    pub fn pose(&self, solution: Solution) -> &Pose {
        match solution {
            Solution::A => &self.pose_a,
            Solution::B => &self.pose_b,
        }
    }

    /// The chosen pose, or candidate A before disambiguation.
    pub fn chosen_pose(&self) -> &Pose {
        self.pose(self.chosen.unwrap_or(Solution::A))
    }

    /// Circle center independent of the candidate choice: the midpoint of
    /// the two candidate centers.
    pub fn position(&self) -> Vector3<f64> {
        0.5 * (self.pose_a.position + self.pose_b.position)
    }

    pub fn position_target(&self) -> Vector3<f64> {
        position_target(self.chosen_pose())
    }

    pub fn ypr(&self) -> (f64, f64, f64) {
        self.chosen_pose().orientation.to_ypr()
    }
}

/// Bilinear gray value; `None` outside the image.
pub(crate) fn sample_gray(img: &GrayImage, x: f64, y: f64) -> Option<f64> {
    let (w, h) = (img.width() as i64, img.height() as i64);
    let (x0, y0) = (x.floor() as i64, y.floor() as i64);
    if x0 < 0 || y0 < 0 || x0 + 1 >= w || y0 + 1 >= h || !x.is_finite() || !y.is_finite() {
        return None;
    }
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let data = img.as_raw();
    let at = |xx: i64, yy: i64| data[(yy * w + xx) as usize] as f64;
    let top = at(x0, y0) * (1.0 - fx) + at(x0 + 1, y0) * fx;
    let bottom = at(x0, y0 + 1) * (1.0 - fx) + at(x0 + 1, y0 + 1) * fx;
    Some(top * (1.0 - fy) + bottom * fy)
}

/// Ring colors at `n` uniform angles of a circle in the pose's marker frame.
pub(crate) fn ring_samples(
    img: &GrayImage,
    cam: &CameraIntrinsics,
    pose: &Pose,
    radius: f64,
    n: usize,
    threshold: f64,
) -> Option<Vec<bool>> {
    (0..n)
        .map(|j| {
            let p = cam.project(&pose.plane_point(radius, TAU * j as f64 / n as f64)).ok()?;
            sample_gray(img, p.x, p.y).map(|g| g >= threshold)
        })
        .collect()
}

/// Sub-pixel outer boundary: mid-threshold crossings along rays from the
/// ellipse center, each searched between 0.8 and 1.2 of the moment ellipse.
fn refine_boundary(img: &GrayImage, ellipse: &Ellipse, threshold: f64) -> Vec<Vector2<f64>> {
    let c = ellipse.center();
    let mut points = Vec::with_capacity(BOUNDARY_RAYS);
    for i in 0..BOUNDARY_RAYS {
        let rim = ellipse.point_at(TAU * i as f64 / BOUNDARY_RAYS as f64, 1.0);
        let dir = rim - c;
        let len = dir.norm();
        if len < 1.0 {
            continue;
        }
        let step = 0.25 / len;
        let mut s = 0.8;
        let mut prev = match sample_gray(img, c.x + dir.x * s, c.y + dir.y * s) {
            Some(g) => g,
            None => continue,
        };
        while s < 1.2 {
            let next_s = s + step;
            let Some(g) = sample_gray(img, c.x + dir.x * next_s, c.y + dir.y * next_s) else {
                break;
            };
            if prev < threshold && g >= threshold {
                let f = (threshold - prev) / (g - prev);
                let at = s + f * step;
                points.push(c + dir * at);
                break;
            }
            prev = g;
            s = next_s;
        }
    }
    points
}

/// Orients a candidate by decoding the ring in a provisional frame; the
/// decoded phase fixes the east axis. Returns the pose and canonical ID.
fn orient(
    img: &GrayImage,
    cam: &CameraIntrinsics,
    params: &DetectorParams,
    position: Vector3<f64>,
    normal: &Vector3<f64>,
    threshold: f64,
) -> Option<(Pose, u32)> {
    let provisional = Pose::from_normal_and_east(position, normal, &Vector3::x());
    let radius = params.teeth_sample_ratio * params.radius();
    let samples = ring_samples(img, cam, &provisional, radius, params.id_samples, threshold)?;
    let code = decode_ring(&samples, params.id_bits)?;
    let east = provisional.east() * code.phase.cos() + provisional.north() * code.phase.sin();
    Some((Pose::from_normal_and_east(position, normal, &east), code.id))
}

fn detection_from_pair(
    img: &GrayImage,
    cam: &CameraIntrinsics,
    params: &DetectorParams,
    pair: &SegmentPair,
    frame: usize,
    timestamp: f64,
) -> Option<MarkerDetection> {
    let boundary = refine_boundary(img, &pair.ellipse, pair.threshold);
    let candidates = if boundary.len() >= BOUNDARY_RAYS * 3 / 4 {
        circle_pose_from_boundary(&boundary, cam, params.circle_diameter)
    } else {
        circle_pose_candidates(&pair.ellipse, cam, params.circle_diameter)
    };
    let candidates = match candidates {
        Ok(c) => c,
        Err(e) => {
            debug!("frame {frame}: dropping segment at ({:.1}, {:.1}): {e}", pair.ellipse.u, pair.ellipse.v);
            return None;
        }
    };
    // each candidate keeps its own circle center; both lie at the same range
    let a = orient(img, cam, params, candidates.a.center, &candidates.a.normal, pair.threshold);
    let b = orient(img, cam, params, candidates.b.center, &candidates.b.normal, pair.threshold);
    let (pose_a, pose_b, id) = match (a, b) {
        (Some((pa, ia)), Some((pb, _))) => (pa, pb, Some(ia)),
        (Some((pa, ia)), None) => (pa, pa.ambiguity_twin(), Some(ia)),
        (None, Some((pb, ib))) => (pb.ambiguity_twin(), pb, Some(ib)),
        (None, None) => {
            let pa = Pose::from_normal_and_east(candidates.a.center, &candidates.a.normal, &Vector3::x());
            (pa, pa.ambiguity_twin(), None)
        }
    };
    let center_px = cam.project(&candidates.position()).ok()?;
    Some(MarkerDetection {
        frame,
        timestamp,
        id,
        pose_a,
        pose_b,
        chosen: None,
        variance_a: f64::NAN,
        variance_b: f64::NAN,
        fallback: false,
        center_px,
        normalized_pixel: normalized_pixel(center_px.x, center_px.y, cam),
        ellipse: pair.ellipse,
        inner_center: pair.inner.centroid,
        threshold: pair.threshold,
        white_level: pair.inner.mean_gray,
        black_level: pair.outer.mean_gray,
    })
}

/// Segments the image and builds a detection, with both pose candidates and
/// the decoded ID, for every marker found. No candidate is chosen yet.
pub fn detect_markers(
    img: &GrayImage,
    cam: &CameraIntrinsics,
    params: &DetectorParams,
    frame: usize,
    timestamp: f64,
) -> Vec<MarkerDetection> {
    segment_image(img, params)
        .iter()
        .filter_map(|pair| detection_from_pair(img, cam, params, pair, frame, timestamp))
        .collect()
}
