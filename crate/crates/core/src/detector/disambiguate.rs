//! Choosing between the two pose candidates of a detection.

use image::GrayImage;
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use super::detect::{ring_samples, sample_gray, MarkerDetection, Solution};
use super::params::DetectorParams;
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Pose};
use crate::marker::codec::read_cells;
use crate::marker::encode_id;

/// Radial half-length of an edge sampling line, as a fraction of the outer radius.
const EDGE_HALF_SPAN: f64 = 0.15;
/// Minimum step across an edge line, relative to the ring contrast, to count as an edge.
const MIN_EDGE_STEP: f64 = 0.15;
/// Perpendicular offsets, in pixels, of the parallel lines averaged into one profile.
const STRIP_OFFSETS: [f64; 3] = [-1.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Orig,
    Ellipse,
    Multi,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "orig" => Ok(Variant::Orig),
            "ellipse" => Ok(Variant::Ellipse),
            "multi" => Ok(Variant::Multi),
            other => Err(Error::InvalidParameter(format!("unknown variant {other:?} (orig, ellipse, multi)"))),
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Orig => "orig",
            Variant::Ellipse => "ellipse",
            Variant::Multi => "multi",
        })
    }
}

/// Outcome of a disambiguation: the lower-variance candidate, ties to A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disambiguation {
    pub solution: Solution,
    pub variance_a: f64,
    pub variance_b: f64,
    pub fallback: bool,
}

impl Disambiguation {
    fn from_scores(variance_a: f64, variance_b: f64, fallback: bool) -> Self {
        let solution = if variance_b < variance_a { Solution::B } else { Solution::A };
        Self { solution, variance_a, variance_b, fallback }
    }

    pub fn apply(&self, det: &mut MarkerDetection) {
        det.chosen = Some(self.solution);
        det.variance_a = self.variance_a;
        det.variance_b = self.variance_b;
        det.fallback = self.fallback;
    }
}

fn variance(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    if n == 0.0 {
        return f64::INFINITY;
    }
    let mean = values.clone().sum::<f64>() / n;
    values.map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Variance of the number of ring samples per tooth when the sampling circle
/// is placed by `pose`. Unreadable rings score infinity.
fn tooth_count_variance(img: &GrayImage, cam: &CameraIntrinsics, params: &DetectorParams, pose: &Pose, threshold: f64) -> f64 {
    let radius = params.teeth_sample_ratio * params.radius();
    let Some(samples) = ring_samples(img, cam, pose, radius, params.id_samples, threshold) else {
        return f64::INFINITY;
    };
    let Some(cells) = read_cells(&samples, params.id_bits) else {
        return f64::INFINITY;
    };
    let per_cell = cells.runs.iter().flat_map(|&(len, n)| std::iter::repeat_n(len as f64 / n as f64, n));
    variance(per_cell)
}

/// Tooth-count strategy: sample the predicted mid-teeth ellipse of each
/// candidate and keep the one whose teeth receive the most even sample counts.
pub fn disambiguate_orig(
    det: &MarkerDetection,
    img: &GrayImage,
    cam: &CameraIntrinsics,
    params: &DetectorParams,
) -> Result<Disambiguation> {
    if det.id.is_none() {
        return Err(Error::MissingId);
    }
    let va = tooth_count_variance(img, cam, params, &det.pose_a, det.threshold);
    let vb = tooth_count_variance(img, cam, params, &det.pose_b, det.threshold);
    Ok(Disambiguation::from_scores(va, vb, false))
}

/// Edge positions along one line per tooth, as fractions of the line length
/// (0 = inner end). `None` marks lines without a clear edge.
fn edge_fractions(
    det: &MarkerDetection,
    img: &GrayImage,
    cam: &CameraIntrinsics,
    params: &DetectorParams,
    pose: &Pose,
    id: u32,
) -> Result<Vec<Option<f64>>> {
    let pattern = encode_id(id, params.id_bits)?;
    let r = params.radius();
    let contrast = (det.white_level - det.black_level).abs().max(1.0);
    let n = params.edge_samples;
    let mut out = Vec::with_capacity(pattern.cells.len());
    for cell in &pattern.cells {
        let theta = 0.5 * (cell.start + cell.end);
        // black teeth meet the white disc; white teeth meet the black ring
        let edge_r = if cell.white { params.teeth_outer_ratio * r } else { params.inner_ratio * r };
        let project = |radius: f64| cam.project(&pose.plane_point(radius, theta)).ok();
        let (Some(edge), Some(tooth), Some(outer)) =
            (project(edge_r), project(params.teeth_sample_ratio * r), project(edge_r + EDGE_HALF_SPAN * r))
        else {
            out.push(None);
            continue;
        };
        let dir = tooth - det.inner_center;
        if dir.norm() < 1e-9 {
            out.push(None);
            continue;
        }
        let dir = dir.normalize();
        let half = (outer - edge).norm();
        let start: Vector2<f64> = edge - dir * half;
        let step = 2.0 * half / (n - 1) as f64;
        let across = Vector2::new(-dir.y, dir.x);
        let gray: Option<Vec<f64>> = (0..n)
            .map(|i| {
                let p = start + dir * (step * i as f64);
                let mut sum = 0.0;
                for off in STRIP_OFFSETS {
                    let q = p + across * off;
                    sum += sample_gray(img, q.x, q.y)?;
                }
                Some(sum / STRIP_OFFSETS.len() as f64)
            })
            .collect();
        let Some(gray) = gray else {
            out.push(None);
            continue;
        };
        let diffs: Vec<f64> = gray.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let (k, &peak) = diffs
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.total_cmp(y.1).then(y.0.cmp(&x.0)))
            .expect("at least two samples");
        if peak < MIN_EDGE_STEP * contrast {
            out.push(None);
            continue;
        }
        // parabolic refinement of the peak between neighbouring differences
        let mut offset = 0.0;
        if k > 0 && k + 1 < diffs.len() {
            let (l, c, rr) = (diffs[k - 1], peak, diffs[k + 1]);
            let denom = l - 2.0 * c + rr;
            if denom < 0.0 {
                offset = (0.5 * (l - rr) / denom).clamp(-0.5, 0.5);
            }
        }
        let position = k as f64 + 0.5 + offset;
        out.push(Some(position / (n - 1) as f64));
    }
    Ok(out)
}

/// Radial edge strategy: for each tooth, sample a line from the white-region
/// center through the predicted tooth center, centered on the predicted
/// white-to-black edge, and keep the candidate whose observed edges sit most
/// consistently along their lines.
pub fn disambiguate_ellipse(
    det: &MarkerDetection,
    img: &GrayImage,
    cam: &CameraIntrinsics,
    params: &DetectorParams,
) -> Result<Disambiguation> {
    let id = det.id.ok_or(Error::MissingId)?;
    let fa = edge_fractions(det, img, cam, params, &det.pose_a, id)?;
    let fb = edge_fractions(det, img, cam, params, &det.pose_b, id)?;
    let missing = |f: &[Option<f64>]| f.iter().filter(|x| x.is_none()).count();
    let half = fa.len() / 2;
    if missing(&fa) > half && missing(&fb) > half {
        let mut d = disambiguate_orig(det, img, cam, params)?;
        d.fallback = true;
        return Ok(d);
    }
    let va = variance(fa.iter().flatten().copied());
    let vb = variance(fb.iter().flatten().copied());
    Ok(Disambiguation::from_scores(va, vb, false))
}
