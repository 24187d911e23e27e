use std::f64::consts::TAU;

use image::GrayImage;
use nalgebra::{Matrix3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scene::Scene;
use super::trajectory::{CameraPose, Trajectory};
use crate::detector::{normalized_pixel, position_target};
use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Pose, Quaternion};
use crate::marker::MarkerTexture;

/// Outline samples checked against the image border per marker and frame.
const OUTLINE_SAMPLES: usize = 72;
/// Required clearance between a marker and the image border, in pixels.
const BORDER_MARGIN: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenderOptions {
    /// Additive Gaussian noise, in gray levels.
    pub noise_sigma: f64,
    /// Gaussian blur standard deviation, in pixels (0 disables).
    pub blur_radius: f64,
    pub seed: u64,
    /// Samples per pixel side; 2 gives 4 rays per pixel.
    pub supersample: u32,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self { noise_sigma: 0.0, blur_radius: 0.0, seed: 0, supersample: 2 }
    }
}

/// Ground truth for one marker in one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub frame: usize,
    pub t: f64,
    pub marker_id: u32,
    /// Marker pose in the camera frame.
    pub pose: Pose,
    pub position_target: Vector3<f64>,
    pub normalized_pixel: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct RenderedSequence {
    pub frames: Vec<GrayImage>,
    pub ground_truth: Vec<GroundTruthRecord>,
}

/// Gray levels of white paper and black print.
fn levels(ambient: f64) -> (f64, f64) {
    (20.0 + 210.0 * ambient, 10.0 + 20.0 * ambient)
}

/// A marker expressed in one camera frame, ready for ray casting.
struct CameraMarker {
    texture: MarkerTexture,
    normal: Vector3<f64>,
    center: Vector3<f64>,
    to_local: Matrix3<f64>,
}

impl CameraMarker {
    /// Texture shade where the ray `dir` from the camera hits the marker plane.
    fn shade(&self, dir: &Vector3<f64>) -> Option<bool> {
        let denom = self.normal.dot(dir);
        if denom.abs() < 1e-12 {
            return None;
        }
        let s = self.normal.dot(&self.center) / denom;
        if s <= 0.0 {
            return None;
        }
        let local = self.to_local * (dir * s - self.center);
        self.texture.shade(local.x, local.y)
    }
}

/// Camera-frame poses of all markers; errors if any leaves the image.
fn marker_poses(scene: &Scene, cam: &CameraIntrinsics, camera: &CameraPose, frame: usize) -> Result<Vec<Pose>> {
    let r_cw = camera.rotation.transpose();
    scene
        .markers
        .iter()
        .map(|m| {
            let rotation = r_cw * m.pose.rotation_matrix();
            let pose = Pose::new(camera.to_camera(&m.pose.position), Quaternion::from_rotation_matrix(&rotation));
            let out = || Error::MarkerOutOfFrame { frame, marker_id: m.spec.id };
            if pose.normal().dot(&pose.position) >= 0.0 {
                return Err(out());
            }
            for k in 0..OUTLINE_SAMPLES {
                let p = pose.plane_point(m.spec.radius(), TAU * k as f64 / OUTLINE_SAMPLES as f64);
                let uv = cam.project(&p).map_err(|_| out())?;
                if !cam.contains(&uv, BORDER_MARGIN) {
                    return Err(out());
                }
            }
            Ok(pose)
        })
        .collect()
}

/// Pixel box covering all markers, padded for blur.
fn footprint(scene: &Scene, cam: &CameraIntrinsics, poses: &[Pose], pad: usize) -> (usize, usize, usize, usize) {
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (m, pose) in scene.markers.iter().zip(poses) {
        for k in 0..OUTLINE_SAMPLES {
            if let Ok(uv) = cam.project(&pose.plane_point(m.spec.radius(), TAU * k as f64 / OUTLINE_SAMPLES as f64)) {
                x0 = x0.min(uv.x);
                y0 = y0.min(uv.y);
                x1 = x1.max(uv.x);
                y1 = y1.max(uv.y);
            }
        }
    }
    let pad = pad as f64 + 2.0;
    let w = cam.width as f64 - 1.0;
    let h = cam.height as f64 - 1.0;
    (
        (x0 - pad).clamp(0.0, w) as usize,
        (y0 - pad).clamp(0.0, h) as usize,
        (x1 + pad).ceil().clamp(0.0, w) as usize,
        (y1 + pad).ceil().clamp(0.0, h) as usize,
    )
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let half = (3.0 * sigma).ceil() as i64;
    let k: Vec<f64> = (-half..=half).map(|i| (-0.5 * (i as f64 / sigma).powi(2)).exp()).collect();
    let sum: f64 = k.iter().sum();
    k.into_iter().map(|v| v / sum).collect()
}

/// Separable blur restricted to a box; outside it the image is constant.
fn blur_box(buf: &mut [f64], w: usize, h: usize, bbox: (usize, usize, usize, usize), sigma: f64) {
    let kernel = gaussian_kernel(sigma);
    let half = (kernel.len() / 2) as i64;
    let (x0, y0, x1, y1) = bbox;
    let clamp = |v: i64, hi: usize| v.clamp(0, hi as i64 - 1) as usize;
    let mut tmp = buf.to_vec();
    for y in y0..=y1 {
        for x in x0..=x1 {
            tmp[y * w + x] =
                kernel.iter().enumerate().map(|(k, c)| c * buf[y * w + clamp(x as i64 + k as i64 - half, w)]).sum();
        }
    }
    for y in y0..=y1 {
        for x in x0..=x1 {
            buf[y * w + x] =
                kernel.iter().enumerate().map(|(k, c)| c * tmp[clamp(y as i64 + k as i64 - half, h) * w + x]).sum();
        }
    }
}

/// Renders one frame by casting rays through every (sub)pixel near the
/// markers into the marker planes, using the camera's own distortion model.
pub fn render_frame(
    scene: &Scene,
    cam: &CameraIntrinsics,
    camera: &CameraPose,
    opts: &RenderOptions,
    frame: usize,
) -> Result<GrayImage> {
    let poses = marker_poses(scene, cam, camera, frame)?;
    let (white, black) = levels(scene.ambient);
    let (w, h) = (cam.width as usize, cam.height as usize);
    let mut buf = vec![white; w * h];
    let markers: Vec<CameraMarker> = scene
        .markers
        .iter()
        .zip(&poses)
        .map(|(m, p)| CameraMarker {
            texture: m.spec.texture(),
            normal: p.normal(),
            center: p.position,
            to_local: p.rotation_matrix().transpose(),
        })
        .collect();
    let blur_pad = if opts.blur_radius > 0.0 { (3.0 * opts.blur_radius).ceil() as usize } else { 0 };
    let bbox = footprint(scene, cam, &poses, blur_pad);
    let ss = opts.supersample.max(1) as usize;
    let weight = 1.0 / (ss * ss) as f64;
    for y in bbox.1..=bbox.3 {
        for x in bbox.0..=bbox.2 {
            let mut acc = 0.0;
            for sy in 0..ss {
                for sx in 0..ss {
                    let u = x as f64 - 0.5 + (sx as f64 + 0.5) / ss as f64;
                    let v = y as f64 - 0.5 + (sy as f64 + 0.5) / ss as f64;
                    let shade = cam.undistort_pixel(u, v).ok().and_then(|dir| markers.iter().find_map(|m| m.shade(&dir)));
                    acc += match shade {
                        Some(false) => black,
                        _ => white,
                    };
                }
            }
            buf[y * w + x] = acc * weight;
        }
    }
    if opts.blur_radius > 0.0 {
        blur_box(&mut buf, w, h, bbox, opts.blur_radius);
    }
    if opts.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(frame as u64);
        let normal = Normal::new(0.0, opts.noise_sigma)
            .map_err(|e| Error::InvalidParameter(format!("noise sigma {}: {e}", opts.noise_sigma)))?;
        for v in &mut buf {
            *v += normal.sample(&mut rng);
        }
    }
    let pixels = buf.iter().map(|v| v.round().clamp(0.0, 255.0) as u8).collect();
    Ok(GrayImage::from_raw(cam.width, cam.height, pixels).expect("buffer sized to the image"))
}

/// Ground truth of every marker at one camera pose.
pub fn ground_truth(
    scene: &Scene,
    cam: &CameraIntrinsics,
    camera: &CameraPose,
    frame: usize,
    t: f64,
) -> Result<Vec<GroundTruthRecord>> {
    let poses = marker_poses(scene, cam, camera, frame)?;
    scene
        .markers
        .iter()
        .zip(poses)
        .map(|(m, pose)| {
            let uv = cam.project(&pose.position)?;
            Ok(GroundTruthRecord {
                frame,
                t,
                marker_id: m.spec.id,
                pose,
                position_target: position_target(&pose),
                normalized_pixel: normalized_pixel(uv.x, uv.y, cam),
            })
        })
        .collect()
}

/// Renders a whole trajectory. Every frame is validated before any pixel is
/// drawn; frames render in parallel and come back in trajectory order.
pub fn render_sequence(
    scene: &Scene,
    traj: &Trajectory,
    cam: &CameraIntrinsics,
    opts: &RenderOptions,
) -> Result<RenderedSequence> {
    scene.validate()?;
    traj.validate()?;
    cam.validate()?;
    if !(opts.noise_sigma >= 0.0 && opts.blur_radius >= 0.0) {
        return Err(Error::InvalidParameter("noise and blur must be non-negative".into()));
    }
    let target = traj.target.unwrap_or_else(|| scene.centroid());
    let cameras: Vec<CameraPose> = (0..traj.frame_count()).map(|i| traj.camera_at(traj.timestamp(i), target)).collect();
    let mut truth = Vec::with_capacity(cameras.len() * scene.markers.len());
    for (i, camera) in cameras.iter().enumerate() {
        truth.extend(ground_truth(scene, cam, camera, i, traj.timestamp(i))?);
    }
    let frames = cameras
        .par_iter()
        .enumerate()
        .map(|(i, camera)| render_frame(scene, cam, camera, opts, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(RenderedSequence { frames, ground_truth: truth })
}
