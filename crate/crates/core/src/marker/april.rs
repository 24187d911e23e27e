//! Reference statistics for the two square-tag families used as baselines.
//! Only the numbers are kept; there is no square-tag detector here.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AprilFamilyStats {
    pub name: &'static str,
    /// Squares with a defined color (border plus data).
    pub defined_squares: u32,
    pub data_bits: u32,
    /// Valid codes loaded into the detector's lookup table.
    pub codebook_size: u32,
    pub memory_class: &'static str,
}

/// 48h12: 20 white-border, 28 black-border and 48 data squares around a
/// 4-square undefined center.
pub const TAG_CUSTOM_48H12: AprilFamilyStats = AprilFamilyStats {
    name: "tagCustom48h12",
    defined_squares: 96,
    data_bits: 48,
    codebook_size: 42_211,
    memory_class: "large (lookup table can exceed 1 GB)",
};

/// 24h10: 8 white-border, 16 black-border and 24 data squares around a
/// 1-square undefined center.
pub const TAG_CUSTOM_24H10: AprilFamilyStats = AprilFamilyStats {
    name: "tagCustom24h10",
    defined_squares: 48,
    data_bits: 24,
    codebook_size: 18,
    memory_class: "small",
};

pub const FAMILIES: [AprilFamilyStats; 2] = [TAG_CUSTOM_48H12, TAG_CUSTOM_24H10];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recorded_constants() {
        assert_eq!(TAG_CUSTOM_48H12.codebook_size, 42_211);
        assert_eq!(TAG_CUSTOM_24H10.codebook_size, 18);
        assert_eq!(TAG_CUSTOM_48H12.defined_squares, 20 + 28 + 48);
        assert_eq!(TAG_CUSTOM_24H10.defined_squares, 8 + 16 + 24);
    }
}
