use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Pose, Quaternion};
use crate::marker::MarkerSpec;

/// A marker mounted in the world.
///
/// World frame: markers lie on the plane `z = 0` facing `+z`; `x` is east
/// and `y` north on that plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacedMarker {
    pub spec: MarkerSpec,
    /// Marker frame to world frame.
    pub pose: Pose,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub markers: Vec<PlacedMarker>,
    /// Illumination in `[0, 1]`; scales all gray levels.
    #[serde(default = "full_light")]
    pub ambient: f64,
}

fn full_light() -> f64 {
    1.0
}

impl Scene {
    /// One marker at the world origin.
    pub fn single(spec: MarkerSpec) -> Self {
        Self {
            markers: vec![PlacedMarker { spec, pose: Pose::new(Vector3::zeros(), Quaternion::IDENTITY) }],
            ambient: 1.0,
        }
    }

    /// Coplanar markers with a shared orientation at the given plane offsets.
    pub fn coplanar(specs: Vec<MarkerSpec>, offsets: &[(f64, f64)]) -> Result<Self> {
        if specs.len() != offsets.len() {
            return Err(Error::InvalidParameter("one offset per marker is required".into()));
        }
        let markers = specs
            .into_iter()
            .zip(offsets)
            .map(|(spec, &(x, y))| PlacedMarker { spec, pose: Pose::new(Vector3::new(x, y, 0.0), Quaternion::IDENTITY) })
            .collect();
        let scene = Self { markers, ambient: 1.0 };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        if self.markers.is_empty() {
            return Err(Error::InvalidParameter("scene has no markers".into()));
        }
        if !(0.0..=1.0).contains(&self.ambient) {
            return Err(Error::InvalidParameter(format!("ambient light {} outside [0, 1]", self.ambient)));
        }
        for m in &self.markers {
            m.spec.validate()?;
        }
        for (i, a) in self.markers.iter().enumerate() {
            for b in &self.markers[i + 1..] {
                let na = a.pose.normal();
                let nb = b.pose.normal();
                let coplanar = na.dot(&nb) > 1.0 - 1e-9 && na.dot(&(b.pose.position - a.pose.position)).abs() < 1e-9;
                let gap = (b.pose.position - a.pose.position).norm() - a.spec.radius() - b.spec.radius();
                if coplanar && gap < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "markers {} and {} overlap by {:.4} m",
                        a.spec.id, b.spec.id, -gap
                    )));
                }
            }
        }
        Ok(())
    }

    /// Center of the marker layout, used as the default look-at point.
    pub fn centroid(&self) -> Vector3<f64> {
        self.markers.iter().map(|m| m.pose.position).sum::<Vector3<f64>>() / self.markers.len() as f64
    }
}
