use std::f64::consts::TAU;

use image::{GrayImage, Luma};
use serde::{Deserialize, Serialize};

use super::codec::{encode_id, ToothPattern};
use crate::error::{Error, Result};

/// Default white-disc radius as a fraction of the outer radius.
pub const INNER_RATIO: f64 = 0.42;
/// Default outer edge of the tooth band as a fraction of the outer radius.
pub const TEETH_OUTER_RATIO: f64 = 0.75;

/// Physical layout of one circular marker.
///
/// From the center outwards: a white disc, the tooth band carrying the
/// Manchester ring, and a solid black ring out to the outer diameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerSpec {
    pub id: u32,
    #[serde(default = "default_bits")]
    pub id_bits: u32,
    /// Outer diameter in meters.
    pub diameter: f64,
    #[serde(default = "default_inner")]
    pub inner_ratio: f64,
    #[serde(default = "default_teeth_outer")]
    pub teeth_outer_ratio: f64,
}

fn default_bits() -> u32 {
    8
}
fn default_inner() -> f64 {
    INNER_RATIO
}
fn default_teeth_outer() -> f64 {
    TEETH_OUTER_RATIO
}

impl MarkerSpec {
    pub fn new(id: u32, id_bits: u32, diameter: f64) -> Result<Self> {
        let spec = Self { id, id_bits, diameter, inner_ratio: INNER_RATIO, teeth_outer_ratio: TEETH_OUTER_RATIO };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diameter > 0.0) {
            return Err(Error::InvalidParameter(format!("marker diameter must be positive, got {}", self.diameter)));
        }
        if !(0.0 < self.inner_ratio && self.inner_ratio < self.teeth_outer_ratio && self.teeth_outer_ratio < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "band ratios must satisfy 0 < inner ({}) < teeth outer ({}) < 1",
                self.inner_ratio, self.teeth_outer_ratio
            )));
        }
        encode_id(self.id, self.id_bits).map(|_| ())
    }

    pub fn radius(&self) -> f64 {
        0.5 * self.diameter
    }

    /// Midline of the tooth band, as a fraction of the outer radius.
    pub fn teeth_mid_ratio(&self) -> f64 {
        0.5 * (self.inner_ratio + self.teeth_outer_ratio)
    }

    pub fn pattern(&self) -> ToothPattern {
        encode_id(self.id, self.id_bits).expect("validated at construction")
    }

    pub fn texture(&self) -> MarkerTexture {
        MarkerTexture {
            pattern: self.pattern(),
            radius: self.radius(),
            inner_ratio: self.inner_ratio,
            teeth_outer_ratio: self.teeth_outer_ratio,
        }
    }

    /// Expected white/black area ratio of the printed marker (white disc plus
    /// white teeth over black ring plus black teeth).
    pub fn white_black_area_ratio(&self) -> f64 {
        let band = self.teeth_outer_ratio.powi(2) - self.inner_ratio.powi(2);
        let white = self.inner_ratio.powi(2) + 0.5 * band;
        white / (1.0 - white)
    }
}

/// Shade lookup on the marker plane.
#[derive(Debug, Clone)]
pub struct MarkerTexture {
    pattern: ToothPattern,
    radius: f64,
    inner_ratio: f64,
    teeth_outer_ratio: f64,
}

impl MarkerTexture {
    /// `Some(true)` for white, `Some(false)` for black, `None` outside the marker.
    /// Coordinates are meters in the marker frame (x east, y north).
    pub fn shade(&self, x: f64, y: f64) -> Option<bool> {
        let r = x.hypot(y) / self.radius;
        if r > 1.0 {
            None
        } else if r < self.inner_ratio {
            Some(true)
        } else if r < self.teeth_outer_ratio {
            Some(self.pattern.cell_at(y.atan2(x).rem_euclid(TAU)).white)
        } else {
            Some(false)
        }
    }
}

/// Antialiased 8-bit bitmap of a marker on a white background.
///
/// The marker's outer diameter spans 90% of the image; north points up.
pub fn render_marker_bitmap(spec: &MarkerSpec, size: u32) -> Result<GrayImage> {
    if size < 64 {
        return Err(Error::InvalidParameter(format!("bitmap size must be at least 64 px, got {size}")));
    }
    spec.validate()?;
    let texture = spec.texture();
    let half = 0.5 * size as f64;
    let meters_per_px = spec.diameter / (0.9 * size as f64);
    const SUB: usize = 4;
    let img = GrayImage::from_fn(size, size, |px, py| {
        let mut white = 0usize;
        for sy in 0..SUB {
            for sx in 0..SUB {
                let u = px as f64 + (sx as f64 + 0.5) / SUB as f64;
                let v = py as f64 + (sy as f64 + 0.5) / SUB as f64;
                let x = (u - half) * meters_per_px;
                let y = (half - v) * meters_per_px;
                if texture.shade(x, y).unwrap_or(true) {
                    white += 1;
                }
            }
        }
        Luma([((255 * white) as f64 / (SUB * SUB) as f64).round() as u8])
    });
    Ok(img)
}
