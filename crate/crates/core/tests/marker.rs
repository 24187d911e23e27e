use fidmark_core::detector::{detect_markers, DetectorParams};
use fidmark_core::marker::{codebook, render_marker_bitmap, MarkerSpec};
use fidmark_core::CameraIntrinsics;
use image::{imageops, GrayImage, Luma};

/// Detects the ID printed on a flat bitmap viewed head-on: the bitmap is
/// pasted on a white page and imaged with a camera whose focal length puts
/// the marker at 1 m.
fn decode_bitmap(bitmap: &GrayImage, diameter: f64, bits: u32) -> Vec<Option<u32>> {
    let size = bitmap.width();
    let side = size + size / 2;
    let mut page = GrayImage::from_pixel(side, side, Luma([255]));
    imageops::overlay(&mut page, bitmap, (size / 4) as i64, (size / 4) as i64);
    let c = side as f64 / 2.0;
    let f = size as f64 / diameter;
    let cam = CameraIntrinsics::new(f, f, c, c, side, side).unwrap();
    let params = DetectorParams { circle_diameter: diameter, id_bits: bits, ..Default::default() };
    detect_markers(&page, &cam, &params, 0, 0.0).iter().map(|d| d.id).collect()
}

#[test]
fn bitmaps_decode_at_every_size() {
    let book = codebook(8);
    for size in [256, 512, 1024] {
        for &id in &book {
            let spec = MarkerSpec::new(id, 8, 0.3).unwrap();
            let found = decode_bitmap(&render_marker_bitmap(&spec, size).unwrap(), 0.3, 8);
            // all-ones shares its ring with all-zeros and reads back as 0
            let expected = if id == 0xFF { 0 } else { id };
            assert_eq!(found, vec![Some(expected)], "id {id} at {size} px");
        }
    }
}

#[test]
fn other_bit_widths_round_trip() {
    for bits in [6, 10] {
        for &id in codebook(bits).iter().filter(|&&id| id != (1 << bits) - 1) {
            let spec = MarkerSpec::new(id, bits, 0.2).unwrap();
            let found = decode_bitmap(&render_marker_bitmap(&spec, 512).unwrap(), 0.2, bits);
            assert_eq!(found, vec![Some(id)], "{bits}-bit id {id}");
        }
    }
}
