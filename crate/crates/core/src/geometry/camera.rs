use nalgebra::{Matrix2, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const UNDISTORT_MAX_ITERATIONS: usize = 20;

/// Pinhole camera with 5-coefficient plumb-bob (radial + tangential) distortion.
///
/// Pixel centers sit at integer coordinates. The camera frame is x right,
/// y down, z forward along the optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    #[serde(default)]
    pub k1: f64,
    #[serde(default)]
    pub k2: f64,
    #[serde(default)]
    pub p1: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default)]
    pub k3: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    /// Undistorted camera; fails unless `fx, fy > 0`, `0 ≤ cx < width`, `0 ≤ cy < height`.
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let cam = Self { fx, fy, cx, cy, k1: 0.0, k2: 0.0, p1: 0.0, p2: 0.0, k3: 0.0, width, height };
        cam.validate()?;
        Ok(cam)
    }

    /// Square pixels, principal point at the image center, focal length from
    /// the horizontal field of view.
    pub fn from_hfov(width: u32, height: u32, hfov_deg: f64) -> Result<Self> {
        if !(hfov_deg > 0.0 && hfov_deg < 180.0) {
            return Err(Error::InvalidCamera(format!("horizontal fov {hfov_deg} out of (0, 180)")));
        }
        let f = 0.5 * width as f64 / (0.5 * hfov_deg.to_radians()).tan();
        Self::new(f, f, 0.5 * width as f64 - 0.5, 0.5 * height as f64 - 0.5, width, height)
    }

    /// 640×480 with a 77° horizontal field of view (fx ≈ 402 px).
    pub fn webcam_480p() -> Self {
        Self::from_hfov(640, 480, 77.0).expect("valid constant intrinsics")
    }

    pub fn with_distortion(mut self, k1: f64, k2: f64, p1: f64, p2: f64, k3: f64) -> Self {
        self.k1 = k1;
        self.k2 = k2;
        self.p1 = p1;
        self.p2 = p2;
        self.k3 = k3;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.fx, self.fy, self.cx, self.cy, self.k1, self.k2, self.p1, self.p2, self.k3]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidCamera("non-finite parameter".into()));
        }
        if self.fx <= 0.0 || self.fy <= 0.0 {
            return Err(Error::InvalidCamera(format!("focal lengths must be positive ({}, {})", self.fx, self.fy)));
        }
        if !(0.0..self.width as f64).contains(&self.cx) || !(0.0..self.height as f64).contains(&self.cy) {
            return Err(Error::InvalidCamera(format!(
                "principal point ({}, {}) outside {}x{}",
                self.cx, self.cy, self.width, self.height
            )));
        }
        Ok(())
    }

    pub fn has_distortion(&self) -> bool {
        [self.k1, self.k2, self.p1, self.p2, self.k3].iter().any(|&c| c != 0.0)
    }

    /// Applies the distortion model to a normalized image point.
    pub fn distort(&self, x: f64, y: f64) -> (f64, f64) {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3));
        (
            x * radial + 2.0 * self.p1 * x * y + self.p2 * (r2 + 2.0 * x * x),
            y * radial + self.p1 * (r2 + 2.0 * y * y) + 2.0 * self.p2 * x * y,
        )
    }

    fn distort_jacobian(&self, x: f64, y: f64) -> Matrix2<f64> {
        let r2 = x * x + y * y;
        let radial = 1.0 + r2 * (self.k1 + r2 * (self.k2 + r2 * self.k3));
        let dradial = self.k1 + r2 * (2.0 * self.k2 + 3.0 * self.k3 * r2);
        let cross = 2.0 * x * y * dradial + 2.0 * self.p1 * x + 2.0 * self.p2 * y;
        Matrix2::new(
            radial + 2.0 * x * x * dradial + 2.0 * self.p1 * y + 6.0 * self.p2 * x,
            cross,
            cross,
            radial + 2.0 * y * y * dradial + 6.0 * self.p1 * y + 2.0 * self.p2 * x,
        )
    }

    /// Normalized (undistorted) image point to pixel.
    pub fn normalized_to_pixel(&self, x: f64, y: f64) -> Vector2<f64> {
        let (xd, yd) = self.distort(x, y);
        Vector2::new(self.fx * xd + self.cx, self.fy * yd + self.cy)
    }

    /// Projects a camera-frame point to pixels. Points with `z ≤ 0` are rejected.
    pub fn project(&self, p: &Vector3<f64>) -> Result<Vector2<f64>> {
        if p.z <= 0.0 || !p.z.is_finite() {
            return Err(Error::BehindCamera { z: p.z });
        }
        Ok(self.normalized_to_pixel(p.x / p.z, p.y / p.z))
    }

    /// Inverts the distortion model by Newton iteration; returns the ray
    /// `(x, y, 1)` in normalized coordinates.
    pub fn undistort_pixel(&self, u: f64, v: f64) -> Result<Vector3<f64>> {
        let target = Vector2::new((u - self.cx) / self.fx, (v - self.cy) / self.fy);
        if !self.has_distortion() {
            return Ok(Vector3::new(target.x, target.y, 1.0));
        }
        let mut p = target;
        for _ in 0..UNDISTORT_MAX_ITERATIONS {
            let (xd, yd) = self.distort(p.x, p.y);
            let residual = Vector2::new(xd, yd) - target;
            if residual.norm() < 1e-14 {
                break;
            }
            let step = match self.distort_jacobian(p.x, p.y).try_inverse() {
                Some(inv) => inv * residual,
                None => break,
            };
            p -= step;
            if !p.x.is_finite() || !p.y.is_finite() {
                break;
            }
        }
        let (xd, yd) = self.distort(p.x, p.y);
        // A root past the fold of the radial polynomial maps the ray backwards.
        let on_monotone_branch = self.distort_jacobian(p.x, p.y).determinant() > 0.0;
        if p.x.is_finite() && on_monotone_branch && (Vector2::new(xd, yd) - target).norm() < 1e-10 {
            return Ok(Vector3::new(p.x, p.y, 1.0));
        }
        Err(Error::UndistortDiverged { u, v, iterations: UNDISTORT_MAX_ITERATIONS })
    }

    /// Unit-length viewing ray through a pixel.
    pub fn pixel_ray(&self, u: f64, v: f64) -> Result<Vector3<f64>> {
        Ok(self.undistort_pixel(u, v)?.normalize())
    }

    /// True if the pixel lies at least `margin` px inside the image border.
    pub fn contains(&self, uv: &Vector2<f64>, margin: f64) -> bool {
        uv.x >= margin
            && uv.y >= margin
            && uv.x <= self.width as f64 - 1.0 - margin
            && uv.y <= self.height as f64 - 1.0 - margin
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profiles() -> Vec<CameraIntrinsics> {
        let base = CameraIntrinsics::webcam_480p();
        vec![
            base,
            base.with_distortion(-0.28, 0.07, 0.001, -0.0005, 0.0),
            base.with_distortion(0.08, 0.01, -0.0008, 0.0006, 0.002),
        ]
    }

    /// Hierarchical grid search for the normalized point whose distortion
    /// lands on `target`: independent of the Newton path.
    fn grid_invert(cam: &CameraIntrinsics, target: (f64, f64)) -> (f64, f64) {
        let mut center = target;
        let mut half = 0.5;
        for _ in 0..40 {
            let mut best = (f64::INFINITY, center);
            let n = 20;
            for i in 0..=n {
                for j in 0..=n {
                    let x = center.0 - half + 2.0 * half * i as f64 / n as f64;
                    let y = center.1 - half + 2.0 * half * j as f64 / n as f64;
                    let (xd, yd) = cam.distort(x, y);
                    let err = (xd - target.0).hypot(yd - target.1);
                    if err < best.0 {
                        best = (err, (x, y));
                    }
                }
            }
            center = best.1;
            half *= 0.3;
        }
        center
    }

    #[test]
    fn optical_axis_projects_to_principal_point() {
        for cam in profiles() {
            let uv = cam.project(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
            assert_eq!((uv.x, uv.y), (cam.cx, cam.cy));
            let ray = cam.undistort_pixel(cam.cx, cam.cy).unwrap();
            assert_eq!(ray, Vector3::new(0.0, 0.0, 1.0));
        }
    }

    #[test]
    fn pinhole_arithmetic() {
        let cam = CameraIntrinsics::new(500.0, 500.0, 320.0, 240.0, 640, 480).unwrap();
        let uv = cam.project(&Vector3::new(0.1, 0.0, 1.0)).unwrap();
        assert!((uv.x - 370.0).abs() < 1e-12);
        let ray = cam.undistort_pixel(320.0 + 500.0, 240.0).unwrap();
        assert!((ray - Vector3::new(1.0, 0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn rejects_points_behind() {
        let cam = CameraIntrinsics::webcam_480p();
        assert!(matches!(cam.project(&Vector3::new(0.0, 0.0, 0.0)), Err(Error::BehindCamera { .. })));
        assert!(cam.project(&Vector3::new(0.1, 0.1, -2.0)).is_err());
    }

    #[test]
    fn invalid_intrinsics_rejected() {
        assert!(CameraIntrinsics::new(-1.0, 400.0, 320.0, 240.0, 640, 480).is_err());
        assert!(CameraIntrinsics::new(400.0, 400.0, 640.0, 240.0, 640, 480).is_err());
        assert!(CameraIntrinsics::new(400.0, 400.0, 320.0, -1.0, 640, 480).is_err());
    }

    #[test]
    fn webcam_focal_length() {
        let cam = CameraIntrinsics::webcam_480p();
        assert!((cam.fx - 402.3).abs() < 0.5, "fx = {}", cam.fx);
    }

    #[test]
    fn newton_matches_grid_inversion_for_strong_barrel() {
        let cam = CameraIntrinsics::webcam_480p().with_distortion(-0.3, 0.0, 0.0, 0.0, 0.0);
        for &(u, v) in &[(400.0, 300.0), (100.0, 80.0), (520.0, 380.0), (320.0, 20.0)] {
            let ray = cam.undistort_pixel(u, v).unwrap();
            let target = ((u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy);
            let (gx, gy) = grid_invert(&cam, target);
            assert!((ray.x - gx).abs() < 1e-6 && (ray.y - gy).abs() < 1e-6, "({u},{v})");
        }
    }

    #[test]
    fn unreachable_pixel_reports_divergence() {
        // r·(1 − 0.3 r²) never exceeds ≈0.70, so the image corner has no preimage.
        let cam = CameraIntrinsics::webcam_480p().with_distortion(-0.3, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(cam.undistort_pixel(0.0, 0.0), Err(Error::UndistortDiverged { .. })));
    }

    #[test]
    fn round_trip_over_grid() {
        for cam in profiles() {
            for i in 0..20 {
                for j in 0..20 {
                    let u = (cam.width as f64 - 1.0) * i as f64 / 19.0;
                    let v = (cam.height as f64 - 1.0) * j as f64 / 19.0;
                    let ray = cam.undistort_pixel(u, v).unwrap();
                    let (xd, yd) = cam.distort(ray.x, ray.y);
                    let resid = (xd - (u - cam.cx) / cam.fx).hypot(yd - (v - cam.cy) / cam.fy);
                    assert!(resid < 1e-8);
                    let back = cam.project(&(ray * 2.5)).unwrap();
                    assert!((back.x - u).abs() < 1e-6 && (back.y - v).abs() < 1e-6);
                }
            }
        }
    }
}
