use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marker::{INNER_RATIO, TEETH_OUTER_RATIO};

/// Detector configuration. Tolerances are percentages, as in WhyCon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DetectorParams {
    pub id_bits: u32,
    pub id_samples: usize,
    /// Smallest accepted segment, in pixels.
    pub min_size: usize,
    /// Outer marker diameter in meters.
    pub circle_diameter: f64,
    pub initial_circularity_tolerance: f64,
    pub final_circularity_tolerance: f64,
    pub area_ratio_tolerance: f64,
    pub center_distance_tolerance_ratio: f64,
    pub center_distance_tolerance_abs: f64,
    /// Localization-mode field size; kept for parity with WhyCon configs, unused.
    pub field_length: f64,
    pub field_width: f64,
    pub inner_ratio: f64,
    pub teeth_outer_ratio: f64,
    /// Radius of the Orig sampling circle as a fraction of the outer radius.
    pub teeth_sample_ratio: f64,
    /// Samples per radial line for the Ellipse strategy.
    pub edge_samples: usize,
    /// Marker IDs forming the coplanar bundle (Multi strategy).
    pub bundle_ids: Vec<u32>,
}

impl Default for DetectorParams {
    fn default() -> Self {
        Self {
            id_bits: 8,
            id_samples: 360,
            min_size: 30,
            circle_diameter: 0.3,
            initial_circularity_tolerance: 100.0,
            final_circularity_tolerance: 2.0,
            area_ratio_tolerance: 40.0,
            center_distance_tolerance_ratio: 10.0,
            center_distance_tolerance_abs: 5.0,
            field_length: 1.0,
            field_width: 1.0,
            inner_ratio: INNER_RATIO,
            teeth_outer_ratio: TEETH_OUTER_RATIO,
            teeth_sample_ratio: 0.5 * (INNER_RATIO + TEETH_OUTER_RATIO),
            edge_samples: 16,
            bundle_ids: Vec::new(),
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("circle_diameter", self.circle_diameter),
            ("initial_circularity_tolerance", self.initial_circularity_tolerance),
            ("final_circularity_tolerance", self.final_circularity_tolerance),
            ("area_ratio_tolerance", self.area_ratio_tolerance),
            ("center_distance_tolerance_ratio", self.center_distance_tolerance_ratio),
            ("center_distance_tolerance_abs", self.center_distance_tolerance_abs),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(1..=16).contains(&self.id_bits) {
            return Err(Error::InvalidParameter(format!("id_bits must be in 1..=16, got {}", self.id_bits)));
        }
        if self.id_samples < 4 * self.id_bits as usize {
            return Err(Error::InvalidParameter(format!(
                "id_samples ({}) must be at least four per bit",
                self.id_samples
            )));
        }
        if self.edge_samples < 3 {
            return Err(Error::InvalidParameter("edge_samples must be at least 3".into()));
        }
        if !(0.0 < self.inner_ratio && self.inner_ratio < self.teeth_outer_ratio && self.teeth_outer_ratio < 1.0) {
            return Err(Error::InvalidParameter("band ratios must satisfy 0 < inner < teeth outer < 1".into()));
        }
        if !(self.inner_ratio < self.teeth_sample_ratio && self.teeth_sample_ratio < self.teeth_outer_ratio) {
            return Err(Error::InvalidParameter("teeth_sample_ratio must lie inside the tooth band".into()));
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.circle_diameter
    }

    /// White share of the marker interior (inner disc plus white teeth) over
    /// the black share, for the area-ratio test.
    pub fn expected_area_ratio(&self) -> f64 {
        let band = self.teeth_outer_ratio.powi(2) - self.inner_ratio.powi(2);
        let white = self.inner_ratio.powi(2) + 0.5 * band;
        white / (1.0 - white)
    }
}
