//! fidmark: circular fiducial markers with Manchester-coded necklace IDs.
//!
//! The crate covers the whole loop needed to study orientation ambiguity of
//! circular markers:
//!
//! 1. [`geometry`]: quaternions, the pinhole/plumb-bob camera, conics and the
//!    two-fold circle pose, total-least-squares planes.
//! 2. [`marker`]: necklace codebook, Manchester tooth ring, marker bitmaps.
//! 3. [`synth`]: ground-truth image sequences rendered along camera trajectories.
//! 4. [`detector`]: segmentation, ellipse extraction, ID decoding and the three
//!    disambiguation strategies (tooth-count variance, radial edge variance,
//!    coplanar bundle).
//! 5. [`eval`]: discontinuity classification, discontinuity and detection rates,
//!    benchmarking and report emission.
//!
//! [`io`] holds the on-disk formats shared by the command-line tool.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with non-positives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod detector;
pub mod error;
pub mod eval;
pub mod geometry;
pub mod io;
pub mod marker;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{CameraIntrinsics, Ellipse, Plane, Pose, Quaternion};
