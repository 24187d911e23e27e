//! Ellipses, image conics, and the two-fold pose of a circle seen in perspective.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Matrix3, SMatrix, SymmetricEigen, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::camera::CameraIntrinsics;
use crate::error::{Error, Result};

/// Axis ratio `b/a` below which an ellipse is treated as degenerate.
pub const MIN_AXIS_RATIO: f64 = 0.05;

/// Image ellipse: center `(u, v)`, semi-axes `a ≥ b > 0`, major-axis angle in `[0, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    pub u: f64,
    pub v: f64,
    pub a: f64,
    pub b: f64,
    pub angle: f64,
}

impl Ellipse {
    /// Normalizing constructor: swaps the axes if needed and wraps the angle.
    pub fn new(u: f64, v: f64, a: f64, b: f64, angle: f64) -> Self {
        let (a, b, angle) = if b > a { (b, a, angle + 0.5 * PI) } else { (a, b, angle) };
        Self { u, v, a: a.abs(), b: b.abs(), angle: angle.rem_euclid(PI) }
    }

    /// Ellipse with the same second moments as a filled region:
    /// semi-axes `2·sqrt(λ)` of the central moment matrix.
    pub fn from_moments(mean: Vector2<f64>, cov: &Matrix2<f64>) -> Self {
        let (l1, l2, major) = sym2_eigen(cov);
        Self::new(mean.x, mean.y, 2.0 * l1.max(0.0).sqrt(), 2.0 * l2.max(0.0).sqrt(), major.y.atan2(major.x))
    }

    pub fn center(&self) -> Vector2<f64> {
        Vector2::new(self.u, self.v)
    }

    pub fn axis_ratio(&self) -> f64 {
        if self.a > 0.0 {
            self.b / self.a
        } else {
            0.0
        }
    }

    /// Major and minor axis unit vectors; the pair has positive orientation
    /// in pixel coordinates.
    pub fn axes(&self) -> (Vector2<f64>, Vector2<f64>) {
        let (s, c) = self.angle.sin_cos();
        (Vector2::new(c, s), Vector2::new(-s, c))
    }

    /// Point at parameter `t` scaled by `scale` (1 = on the ellipse).
    pub fn point_at(&self, t: f64, scale: f64) -> Vector2<f64> {
        let (e1, e2) = self.axes();
        self.center() + e1 * (scale * self.a * t.cos()) + e2 * (scale * self.b * t.sin())
    }

    pub fn area(&self) -> f64 {
        PI * self.a * self.b
    }

    /// Symmetric conic matrix `C` with `[u v 1] C [u v 1]ᵀ = 0` on the ellipse
    /// and negative inside.
    pub fn to_conic(&self) -> Matrix3<f64> {
        let (e1, e2) = self.axes();
        let m = e1 * e1.transpose() / (self.a * self.a) + e2 * e2.transpose() / (self.b * self.b);
        let c = self.center();
        let mc = m * c;
        Matrix3::new(
            m[(0, 0)],
            m[(0, 1)],
            -mc.x,
            m[(1, 0)],
            m[(1, 1)],
            -mc.y,
            -mc.x,
            -mc.y,
            c.dot(&mc) - 1.0,
        )
    }

    /// Recovers the ellipse from a conic matrix; `None` for non-elliptic conics.
    pub fn from_conic(conic: &Matrix3<f64>) -> Option<Self> {
        let q = 0.5 * (conic + conic.transpose());
        let q = if q[(0, 0)] + q[(1, 1)] < 0.0 { -q } else { q };
        let m = Matrix2::new(q[(0, 0)], q[(0, 1)], q[(1, 0)], q[(1, 1)]);
        if m.determinant() <= f64::EPSILON * m.norm_squared() {
            return None;
        }
        let lin = Vector2::new(q[(0, 2)], q[(1, 2)]);
        let center = -m.try_inverse()? * lin;
        let k = center.dot(&(m * center)) - q[(2, 2)];
        if k <= 0.0 {
            return None;
        }
        let (l1, l2, major_dir) = sym2_eigen(&(m / k));
        // larger eigenvalue of M/k belongs to the minor axis
        let minor = major_dir;
        let angle = minor.y.atan2(minor.x) + 0.5 * PI;
        Some(Self::new(center.x, center.y, 1.0 / l2.sqrt(), 1.0 / l1.sqrt(), angle))
    }
}

/// Eigen-decomposition of a symmetric 2×2 matrix: `(λ_max, λ_min, v_max)`.
fn sym2_eigen(m: &Matrix2<f64>) -> (f64, f64, Vector2<f64>) {
    let (a, b, c) = (m[(0, 0)], 0.5 * (m[(0, 1)] + m[(1, 0)]), m[(1, 1)]);
    let mean = 0.5 * (a + c);
    let diff = 0.5 * (a - c);
    let r = diff.hypot(b);
    let theta = 0.5 * (2.0 * b).atan2(a - c);
    (mean + r, mean - r, Vector2::new(theta.cos(), theta.sin()))
}

/// Least-squares conic through a set of points (algebraic distance, with
/// isotropic normalization). Needs at least 5 points in general position.
pub fn fit_conic(points: &[Vector2<f64>]) -> Result<Matrix3<f64>> {
    if points.len() < 5 {
        return Err(Error::DegenerateConic(format!("{} points, need at least 5", points.len())));
    }
    let n = points.len() as f64;
    let mean = points.iter().fold(Vector2::zeros(), |acc, p| acc + p) / n;
    let spread = points.iter().map(|p| (p - mean).norm()).sum::<f64>() / n;
    if !(spread > 0.0) {
        return Err(Error::DegenerateConic("coincident points".into()));
    }
    let s = std::f64::consts::SQRT_2 / spread;
    let mut scatter = SMatrix::<f64, 6, 6>::zeros();
    for p in points {
        let x = (p.x - mean.x) * s;
        let y = (p.y - mean.y) * s;
        let row = SMatrix::<f64, 6, 1>::from_column_slice(&[x * x, x * y, y * y, x, y, 1.0]);
        scatter += row * row.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let (idx, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("six eigenvalues");
    let c = eig.eigenvectors.column(idx);
    let normalized = Matrix3::new(
        c[0],
        0.5 * c[1],
        0.5 * c[3],
        0.5 * c[1],
        c[2],
        0.5 * c[4],
        0.5 * c[3],
        0.5 * c[4],
        c[5],
    );
    // undo x' = T x
    let t = Matrix3::new(s, 0.0, -s * mean.x, 0.0, s, -s * mean.y, 0.0, 0.0, 1.0);
    let conic = t.transpose() * normalized * t;
    Ok(conic / conic.norm())
}

/// One of the two circle poses consistent with an image conic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSolution {
    /// Circle center in the camera frame (m).
    pub center: Vector3<f64>,
    /// Unit plane normal, oriented toward the camera (`normal · center < 0`).
    pub normal: Vector3<f64>,
}

/// The two-fold ambiguity of a circle's pose.
///
/// Solution A is the one whose normal makes the smaller angle with the
/// direction back toward the camera.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirclePoseCandidates {
    pub a: CircleSolution,
    pub b: CircleSolution,
    /// Cone axis: eigenvector of the negative eigenvalue, pointing forward.
    pub cone_axis: Vector3<f64>,
}

impl CirclePoseCandidates {
    /// Shared position estimate. Both centers lie at the same distance from
    /// the camera; this is their midpoint.
    pub fn position(&self) -> Vector3<f64> {
        0.5 * (self.a.center + self.b.center)
    }

    pub fn solutions(&self) -> [CircleSolution; 2] {
        [self.a, self.b]
    }
}

/// Two circle poses for a cone `xᵀ Q x = 0` in normalized camera coordinates.
///
/// With eigenvalues `λ1 ≥ λ2 > 0 > λ3` the cone splits as
/// `λ2·|x|² + (p·x)(m·x)`, `p, m = sqrt(λ1−λ2)·e1 ± sqrt(λ2−λ3)·e3`, so every
/// plane `p·x = d` cuts it in a circle; the two sign choices are the two poses.
pub fn circle_pose_from_conic(cone: &Matrix3<f64>, radius: f64) -> Result<CirclePoseCandidates> {
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter(format!("circle radius must be positive, got {radius}")));
    }
    let q = 0.5 * (cone + cone.transpose());
    let q = q / q.norm();
    let eig = SymmetricEigen::new(q);
    let positive = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
    let sign = match positive {
        2 => 1.0,
        1 => -1.0,
        _ => return Err(Error::DegenerateConic("conic is not a real elliptic cone".into())),
    };
    let mut pairs: Vec<(f64, Vector3<f64>)> = (0..3)
        .map(|i| (sign * eig.eigenvalues[i], eig.eigenvectors.column(i).into_owned()))
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let (l1, e1) = pairs[0];
    let (l2, _) = pairs[1];
    let (l3, mut e3) = pairs[2];
    if !(l2 > 0.0 && l3 < 0.0) {
        return Err(Error::DegenerateConic("eigenvalue signature is not (+, +, −)".into()));
    }
    if e3.z < 0.0 {
        e3 = -e3;
    }
    let ka = (l1 - l2).max(0.0).sqrt();
    let kb = (l2 - l3).sqrt();

    let solve = |s: f64| -> Result<CircleSolution> {
        let p = ka * e1 + s * kb * e3;
        let m = ka * e1 - s * kb * e3;
        // plane p·x = 1 meets sphere λ2|x|² + m·x = 0 in the circle
        let sphere_center = -m / (2.0 * l2);
        let t = (1.0 - p.dot(&sphere_center)) / p.norm_squared();
        let mut center = sphere_center + t * p;
        let rho2 = sphere_center.norm_squared() - t * t * p.norm_squared();
        if !(rho2 > 0.0) {
            return Err(Error::DegenerateConic("plane section does not meet the cone".into()));
        }
        center *= radius / rho2.sqrt();
        if center.z < 0.0 {
            center = -center;
        }
        let mut normal = p.normalize();
        if normal.dot(&center) > 0.0 {
            normal = -normal;
        }
        Ok(CircleSolution { center, normal })
    };
    let first = solve(1.0)?;
    let second = solve(-1.0)?;
    let facing = |sol: &CircleSolution| -sol.normal.dot(&sol.center.normalize());
    let (a, b) = if facing(&first) >= facing(&second) { (first, second) } else { (second, first) };
    Ok(CirclePoseCandidates { a, b, cone_axis: e3 })
}

/// Two circle poses for an image ellipse of a circle with the given diameter.
///
/// The ellipse boundary is sampled, undistorted, and refit as a conic in
/// normalized coordinates, so lens distortion is accounted for.
pub fn circle_pose_candidates(
    ellipse: &Ellipse,
    cam: &CameraIntrinsics,
    diameter: f64,
) -> Result<CirclePoseCandidates> {
    if !(diameter > 0.0) {
        return Err(Error::InvalidParameter(format!("diameter must be positive, got {diameter}")));
    }
    let ratio = ellipse.axis_ratio();
    if ratio < MIN_AXIS_RATIO || !ratio.is_finite() {
        return Err(Error::DegenerateEllipse { ratio, min: MIN_AXIS_RATIO });
    }
    let samples = 64;
    let boundary: Vec<Vector2<f64>> =
        (0..samples).map(|i| ellipse.point_at(2.0 * PI * i as f64 / samples as f64, 1.0)).collect();
    circle_pose_from_boundary(&boundary, cam, diameter)
}

/// Two circle poses from pixel samples of the circle's image outline.
pub fn circle_pose_from_boundary(
    boundary: &[Vector2<f64>],
    cam: &CameraIntrinsics,
    diameter: f64,
) -> Result<CirclePoseCandidates> {
    if !(diameter > 0.0) {
        return Err(Error::InvalidParameter(format!("diameter must be positive, got {diameter}")));
    }
    let points = boundary
        .iter()
        .map(|px| cam.undistort_pixel(px.x, px.y).map(|r| Vector2::new(r.x, r.y)))
        .collect::<Result<Vec<_>>>()?;
    let cone = fit_conic(&points)?;
    circle_pose_from_conic(&cone, 0.5 * diameter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Quaternion;

    /// Projects a 3D circle densely and fits the image ellipse from the samples.
    fn image_of_circle(
        cam: &CameraIntrinsics,
        center: Vector3<f64>,
        normal: Vector3<f64>,
        radius: f64,
    ) -> Vec<Vector2<f64>> {
        let helper = if normal.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let u = normal.cross(&helper).normalize();
        let v = normal.cross(&u);
        (0..360)
            .map(|i| {
                let t = (i as f64).to_radians();
                cam.project(&(center + radius * (t.cos() * u + t.sin() * v))).unwrap()
            })
            .collect()
    }

    fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
        a.normalize().dot(&b.normalize()).clamp(-1.0, 1.0).acos()
    }

    #[test]
    fn ellipse_normalization() {
        let e = Ellipse::new(1.0, 2.0, 3.0, 5.0, 0.2 + 2.0 * PI);
        assert_eq!((e.a, e.b), (5.0, 3.0));
        assert!((e.angle - (0.2 + 0.5 * PI)).abs() < 1e-12);
    }

    #[test]
    fn conic_round_trip() {
        let e = Ellipse::new(310.0, 222.0, 40.0, 25.0, 0.7);
        let back = Ellipse::from_conic(&(e.to_conic() * -3.5)).unwrap();
        assert!((back.u - e.u).abs() < 1e-9 && (back.v - e.v).abs() < 1e-9);
        assert!((back.a - e.a).abs() < 1e-9 && (back.b - e.b).abs() < 1e-9);
        assert!((back.angle - e.angle).abs() < 1e-9);
        for i in 0..16 {
            let p = e.point_at(i as f64 * 0.4, 1.0);
            let h = Vector3::new(p.x, p.y, 1.0);
            assert!((h.transpose() * e.to_conic() * h)[0].abs() < 1e-9);
        }
    }

    #[test]
    fn fit_conic_recovers_ellipse() {
        let e = Ellipse::new(100.0, -50.0, 12.0, 4.0, 2.5);
        let pts: Vec<_> = (0..40).map(|i| e.point_at(i as f64 * 0.157, 1.0)).collect();
        let fit = Ellipse::from_conic(&fit_conic(&pts).unwrap()).unwrap();
        assert!((fit.a - e.a).abs() < 1e-7 && (fit.b - e.b).abs() < 1e-7);
        assert!((fit.u - e.u).abs() < 1e-7 && (fit.angle - e.angle).abs() < 1e-7);
    }

    #[test]
    fn moments_of_filled_ellipse() {
        // uniform filled ellipse: covariance = diag(a², b²)/4 in the axis frame
        let (a, b, th) = (30.0_f64, 12.0_f64, 0.4_f64);
        let r = Matrix2::new(th.cos(), -th.sin(), th.sin(), th.cos());
        let cov = r * Matrix2::new(a * a / 4.0, 0.0, 0.0, b * b / 4.0) * r.transpose();
        let e = Ellipse::from_moments(Vector2::new(5.0, 6.0), &cov);
        assert!((e.a - a).abs() < 1e-9 && (e.b - b).abs() < 1e-9 && (e.angle - th).abs() < 1e-9);
    }

    #[test]
    fn frontal_circle() {
        let cam = CameraIntrinsics::webcam_480p();
        let pts = image_of_circle(&cam, Vector3::new(0.0, 0.0, 2.0), -Vector3::z(), 0.15);
        let e = Ellipse::from_conic(&fit_conic(&pts).unwrap()).unwrap();
        let c = circle_pose_candidates(&e, &cam, 0.3).unwrap();
        assert!((c.position() - Vector3::new(0.0, 0.0, 2.0)).norm() < 0.02);
        assert!(angle_between(&c.a.normal, &-Vector3::z()) < 1e-3);
        assert!(angle_between(&c.b.normal, &-Vector3::z()) < 1e-3);
    }

    #[test]
    fn tilted_circle_has_one_true_candidate() {
        let cam = CameraIntrinsics::webcam_480p().with_distortion(-0.28, 0.07, 0.001, -0.0005, 0.0);
        for &(tilt, dist, offset) in &[(30.0_f64, 2.0, 0.2), (45.0, 1.0, -0.15), (45.0, 3.0, 0.3)] {
            let q = Quaternion::from_axis_angle(&Vector3::new(0.6, 0.8, 0.0), tilt.to_radians());
            let normal = q.rotate(&-Vector3::z());
            let center = Vector3::new(offset, -0.5 * offset, dist);
            let pts = image_of_circle(&cam, center, normal, 0.15);
            let rays: Vec<_> = pts
                .iter()
                .map(|p| {
                    let r = cam.undistort_pixel(p.x, p.y).unwrap();
                    Vector2::new(r.x, r.y)
                })
                .collect();
            let c = circle_pose_from_conic(&fit_conic(&rays).unwrap(), 0.15).unwrap();
            let best = c
                .solutions()
                .iter()
                .map(|s| angle_between(&s.normal, &normal))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 1e-6, "tilt {tilt} dist {dist}: {best}");
            let hit = c.solutions().into_iter().find(|s| angle_between(&s.normal, &normal) < 1e-6).unwrap();
            assert!((hit.center - center).norm() < 1e-6);
            // equal range for both candidates
            assert!((c.a.center.norm() - c.b.center.norm()).abs() < 1e-9);
        }
    }

    #[test]
    fn candidate_bisector_is_cone_axis() {
        let cam = CameraIntrinsics::webcam_480p();
        let q = Quaternion::from_axis_angle(&Vector3::new(1.0, 0.3, 0.0), 0.6);
        let pts = image_of_circle(&cam, Vector3::new(-0.3, 0.2, 1.7), q.rotate(&-Vector3::z()), 0.15);
        let rays: Vec<_> = pts
            .iter()
            .map(|p| {
                let r = cam.undistort_pixel(p.x, p.y).unwrap();
                Vector2::new(r.x, r.y)
            })
            .collect();
        let c = circle_pose_from_conic(&fit_conic(&rays).unwrap(), 0.15).unwrap();
        let bisector = -(c.a.normal + c.b.normal).normalize();
        assert!((bisector - c.cone_axis).norm() < 1e-6);
    }

    #[test]
    fn degenerate_ellipse_rejected() {
        let cam = CameraIntrinsics::webcam_480p();
        let e = Ellipse::new(320.0, 240.0, 50.0, 2.0, 0.0);
        assert!(matches!(circle_pose_candidates(&e, &cam, 0.3), Err(Error::DegenerateEllipse { .. })));
        let e = Ellipse::new(320.0, 240.0, 50.0, 40.0, 0.0);
        assert!(circle_pose_candidates(&e, &cam, 0.0).is_err());
    }
}
