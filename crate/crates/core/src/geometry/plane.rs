use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Plane `normal · p = offset` with a unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Vector3<f64>,
    pub offset: f64,
}

impl Plane {
    /// Normalizes `normal` and rescales `offset` to match.
    pub fn new(normal: Vector3<f64>, offset: f64) -> Self {
        let n = normal.norm();
        Self { normal: normal / n, offset: offset / n }
    }

    pub fn signed_distance(&self, p: &Vector3<f64>) -> f64 {
        self.normal.dot(p) - self.offset
    }

    /// Sum of squared point-to-plane distances.
    pub fn residual(&self, points: &[Vector3<f64>]) -> f64 {
        points.iter().map(|p| self.signed_distance(p).powi(2)).sum()
    }
}

/// Total-least-squares plane through a point cloud.
///
/// The normal is the eigenvector of the smallest eigenvalue of the centered
/// scatter matrix, oriented toward the camera (`normal.z < 0`). Collinear or
/// coincident points are rejected: the middle eigenvalue must be a non-trivial
/// fraction of the largest.
pub fn fit_plane(points: &[Vector3<f64>]) -> Result<Plane> {
    if points.len() < 3 {
        return Err(Error::DegeneratePoints(format!("{} points, a plane needs at least 3", points.len())));
    }
    let n = points.len() as f64;
    let centroid = points.iter().fold(Vector3::zeros(), |acc, p| acc + p) / n;
    let scatter = points.iter().fold(Matrix3::zeros(), |acc, p| {
        let d = p - centroid;
        acc + d * d.transpose()
    });
    let eig = SymmetricEigen::new(scatter);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let (smallest, middle, largest) =
        (order[0], eig.eigenvalues[order[1]], eig.eigenvalues[order[2]]);
    if !(largest > 0.0) || middle <= 1e-10 * largest {
        return Err(Error::DegeneratePoints("points are collinear or coincident".into()));
    }
    let mut normal = eig.eigenvectors.column(smallest).into_owned().normalize();
    if normal.z > 0.0 {
        normal = -normal;
    }
    Ok(Plane { normal, offset: normal.dot(&centroid) })
}
