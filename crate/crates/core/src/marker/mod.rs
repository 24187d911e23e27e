//! Marker definition: necklace codebook, Manchester tooth ring, bitmaps, and
//! square-tag family statistics.

pub mod april;
pub mod codec;
pub mod spec;

pub use april::{AprilFamilyStats, TAG_CUSTOM_24H10, TAG_CUSTOM_48H12};
pub use codec::{
    bit_string, canonicalize_necklace, codebook, decode_ring, encode_id, is_canonical, RingCode, ToothCell,
    ToothPattern,
};
pub use spec::{render_marker_bitmap, MarkerSpec, MarkerTexture, INNER_RATIO, TEETH_OUTER_RATIO};
