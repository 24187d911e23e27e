//! Marker detection: segmentation, ellipse extraction, ID decoding,
//! candidate poses and the three disambiguation strategies.

pub mod bundle;
pub mod detect;
pub mod disambiguate;
pub mod params;
pub mod segment;
pub mod target;

use image::GrayImage;
use log::debug;

pub use bundle::bundle_multi;
pub use detect::{detect_markers, MarkerDetection, Solution};
pub use disambiguate::{disambiguate_ellipse, disambiguate_orig, Disambiguation, Variant};
pub use params::DetectorParams;
pub use segment::{segment_image, Segment, SegmentPair};
pub use target::{normalized_pixel, position_target};

use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;

/// Immutable detection pipeline for one camera, parameter set and strategy.
#[derive(Debug, Clone)]
pub struct Detector {
    cam: CameraIntrinsics,
    params: DetectorParams,
    variant: Variant,
}

impl Detector {
    pub fn new(cam: CameraIntrinsics, params: DetectorParams, variant: Variant) -> Result<Self> {
        cam.validate()?;
        params.validate()?;
        if variant == Variant::Multi && params.bundle_ids.len() < 3 {
            return Err(Error::InvalidParameter(format!(
                "the multi variant needs at least 3 bundle ids, got {}",
                params.bundle_ids.len()
            )));
        }
        Ok(Self { cam, params, variant })
    }

    pub fn camera(&self) -> &CameraIntrinsics {
        &self.cam
    }

    pub fn params(&self) -> &DetectorParams {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Detections with a decoded ID and a chosen candidate, ordered by ID.
    /// The multi strategy returns at most one bundle detection.
    pub fn process(&self, img: &GrayImage, frame: usize, timestamp: f64) -> Vec<MarkerDetection> {
        let mut dets: Vec<MarkerDetection> = detect_markers(img, &self.cam, &self.params, frame, timestamp)
            .into_iter()
            .filter(|d| d.id.is_some())
            .collect();
        for det in &mut dets {
            let choice = match self.variant {
                Variant::Ellipse => disambiguate_ellipse(det, img, &self.cam, &self.params),
                Variant::Orig | Variant::Multi => disambiguate_orig(det, img, &self.cam, &self.params),
            };
            choice.expect("ID checked above").apply(det);
        }
        dets.sort_by(|a, b| a.id.cmp(&b.id).then(a.center_px.x.total_cmp(&b.center_px.x)));
        if self.variant != Variant::Multi {
            return dets;
        }
        let members: Vec<MarkerDetection> =
            dets.into_iter().filter(|d| d.id.is_some_and(|id| self.params.bundle_ids.contains(&id))).collect();
        match bundle_multi(&members, &self.cam) {
            Ok(b) => vec![b],
            Err(e) => {
                debug!("frame {frame}: no bundle: {e}");
                Vec::new()
            }
        }
    }
}
