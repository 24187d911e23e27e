//! Flood-fill segmentation of concentric black-ring / white-disc pairs.

use std::cell::RefCell;

use image::GrayImage;
use nalgebra::{Matrix2, Vector2};

use super::params::DetectorParams;
use crate::geometry::Ellipse;

/// Smallest gray-level spread treated as containing any marker at all.
const MIN_CONTRAST: f64 = 20.0;

/// Connected region of pixels on one side of a threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub size: usize,
    /// `(min_x, min_y, max_x, max_y)`, inclusive.
    pub bbox: (u32, u32, u32, u32),
    pub centroid: Vector2<f64>,
    /// Second central moments (covariance of pixel positions).
    pub moments: Matrix2<f64>,
    pub mean_gray: f64,
    /// `true` for the dark outer ring, `false` for the white inner region.
    pub outer: bool,
    raw: RawMoments,
}

impl Segment {
    pub fn ellipse(&self) -> Ellipse {
        Ellipse::from_moments(self.centroid, &self.moments)
    }

    fn touches_border(&self, w: u32, h: u32) -> bool {
        let (x0, y0, x1, y1) = self.bbox;
        x0 == 0 || y0 == 0 || x1 + 1 >= w || y1 + 1 >= h
    }
}

/// Outer black segment with the white segment it encloses.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentPair {
    pub outer: Segment,
    pub inner: Segment,
    /// Local threshold used for both fills.
    pub threshold: f64,
    /// Ellipse of the union of both segments (the full marker disc).
    pub ellipse: Ellipse,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
struct RawMoments {
    n: f64,
    sx: f64,
    sy: f64,
    sxx: f64,
    sxy: f64,
    syy: f64,
    gray: f64,
}

impl RawMoments {
    fn add(&mut self, x: f64, y: f64, g: f64) {
        self.n += 1.0;
        self.sx += x;
        self.sy += y;
        self.sxx += x * x;
        self.sxy += x * y;
        self.syy += y * y;
        self.gray += g;
    }

    fn merged(&self, o: &RawMoments) -> RawMoments {
        RawMoments {
            n: self.n + o.n,
            sx: self.sx + o.sx,
            sy: self.sy + o.sy,
            sxx: self.sxx + o.sxx,
            sxy: self.sxy + o.sxy,
            syy: self.syy + o.syy,
            gray: self.gray + o.gray,
        }
    }

    fn centroid(&self) -> Vector2<f64> {
        Vector2::new(self.sx / self.n, self.sy / self.n)
    }

    fn central(&self) -> Matrix2<f64> {
        let c = self.centroid();
        let xx = self.sxx / self.n - c.x * c.x;
        let xy = self.sxy / self.n - c.x * c.y;
        let yy = self.syy / self.n - c.y * c.y;
        // a pixel is a unit square, not a point
        Matrix2::new(xx + 1.0 / 12.0, xy, xy, yy + 1.0 / 12.0)
    }

    fn ellipse(&self) -> Ellipse {
        Ellipse::from_moments(self.centroid(), &self.central())
    }
}

/// Per-thread buffers kept between frames, so a frame costs no large
/// allocations. Stamps stay valid across frames because the generation only
/// grows.
#[derive(Default)]
struct Scratch {
    stamp: Vec<u32>,
    generation: u32,
    stack: Vec<usize>,
    consumed: Vec<bool>,
}

thread_local! {
    static SCRATCH: RefCell<Scratch> = RefCell::new(Scratch::default());
}

/// Flood fill over one image: generation-stamped visit marks and a stack.
struct Filler<'a> {
    data: &'a [u8],
    w: usize,
    h: usize,
    stamp: Vec<u32>,
    generation: u32,
    stack: Vec<usize>,
}

impl<'a> Filler<'a> {
    fn new(img: &'a GrayImage, scratch: &mut Scratch) -> Self {
        let (w, h) = (img.width() as usize, img.height() as usize);
        let mut stamp = std::mem::take(&mut scratch.stamp);
        let mut generation = scratch.generation;
        // each frame uses a few generations per segment; restart well before wrapping
        if stamp.len() != w * h || generation > u32::MAX / 2 {
            stamp.clear();
            stamp.resize(w * h, 0);
            generation = 0;
        }
        Self { data: img.as_raw(), w, h, stamp, generation, stack: std::mem::take(&mut scratch.stack) }
    }

    fn release(self, scratch: &mut Scratch) {
        scratch.stamp = self.stamp;
        scratch.generation = self.generation;
        scratch.stack = self.stack;
    }

    /// Fills the 4-connected region of `seed` on the `dark` side of
    /// `threshold`. Gives up (returning `None`) past `limit` pixels.
    fn fill(&mut self, seed: usize, dark: bool, threshold: f64, limit: usize, mut visit: impl FnMut(usize)) -> Option<Segment> {
        let inside = |g: u8| (g as f64) < threshold;
        if inside(self.data[seed]) != dark {
            return None;
        }
        self.generation += 1;
        let gen = self.generation;
        let mut m = RawMoments::default();
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        self.stack.clear();
        self.stack.push(seed);
        self.stamp[seed] = gen;
        while let Some(i) = self.stack.pop() {
            let (x, y) = (i % self.w, i / self.w);
            m.add(x as f64, y as f64, self.data[i] as f64);
            visit(i);
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
            if m.n as usize > limit {
                return None;
            }
            let push = |j: usize, stamp: &mut Vec<u32>, stack: &mut Vec<usize>| {
                if stamp[j] != gen && inside(self.data[j]) == dark {
                    stamp[j] = gen;
                    stack.push(j);
                }
            };
            if x > 0 {
                push(i - 1, &mut self.stamp, &mut self.stack);
            }
            if x + 1 < self.w {
                push(i + 1, &mut self.stamp, &mut self.stack);
            }
            if y > 0 {
                push(i - self.w, &mut self.stamp, &mut self.stack);
            }
            if y + 1 < self.h {
                push(i + self.w, &mut self.stamp, &mut self.stack);
            }
        }
        Some(Segment {
            size: m.n as usize,
            bbox: (x0 as u32, y0 as u32, x1 as u32, y1 as u32),
            centroid: m.centroid(),
            moments: m.central(),
            mean_gray: m.gray / m.n,
            outer: dark,
            raw: m,
        })
    }

    /// Threshold halfway between the darkest and brightest pixel of a window.
    fn window_threshold(&self, bbox: (u32, u32, u32, u32)) -> f64 {
        let (x0, y0, x1, y1) = bbox;
        let (bw, bh) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
        let xa = (x0 as usize).saturating_sub(bw / 2);
        let ya = (y0 as usize).saturating_sub(bh / 2);
        let xb = (x1 as usize + bw / 2).min(self.w - 1);
        let yb = (y1 as usize + bh / 2).min(self.h - 1);
        let (mut lo, mut hi) = (u8::MAX, u8::MIN);
        for y in ya..=yb {
            for &g in &self.data[y * self.w + xa..=y * self.w + xb] {
                lo = lo.min(g);
                hi = hi.max(g);
            }
        }
        0.5 * (lo as f64 + hi as f64)
    }
}

fn global_threshold(data: &[u8]) -> Option<f64> {
    let lo = *data.iter().min()?;
    let hi = *data.iter().max()?;
    if ((hi - lo) as f64) < MIN_CONTRAST {
        return None;
    }
    Some(0.5 * (lo as f64 + hi as f64))
}

/// Finds every black ring that encloses a white region and passes the
/// circularity, area-ratio and concentricity tests.
pub fn segment_image(img: &GrayImage, params: &DetectorParams) -> Vec<SegmentPair> {
    let (w, h) = (img.width(), img.height());
    let Some(global) = global_threshold(img.as_raw()) else {
        return Vec::new();
    };
    let mut scratch = SCRATCH.with(|s| std::mem::take(&mut *s.borrow_mut()));
    let mut filler = Filler::new(img, &mut scratch);
    let mut consumed = std::mem::take(&mut scratch.consumed);
    consumed.clear();
    consumed.resize((w * h) as usize, false);
    let mut pairs = Vec::new();
    let total = (w * h) as usize;
    for seed in 0..total {
        if consumed[seed] || (img.as_raw()[seed] as f64) >= global {
            continue;
        }
        let data = img.as_raw();
        let mut darkest = seed;
        let Some(coarse) = filler.fill(seed, true, global, total, |i| {
            consumed[i] = true;
            if data[i] < data[darkest] {
                darkest = i;
            }
        }) else {
            continue;
        };
        if coarse.size < params.min_size || coarse.touches_border(w, h) {
            continue;
        }
        let threshold = filler.window_threshold(coarse.bbox);
        // the scan seed is an edge pixel and may sit above the local threshold
        let Some(outer) = filler.fill(darkest, true, threshold, total, |i| consumed[i] = true) else {
            continue;
        };
        if let Some(pair) = pair_with_inner(&mut filler, outer, threshold, params, w, h) {
            pairs.push(pair);
        }
    }
    filler.release(&mut scratch);
    scratch.consumed = consumed;
    SCRATCH.with(|s| *s.borrow_mut() = scratch);
    pairs
}

fn pair_with_inner(
    filler: &mut Filler,
    outer: Segment,
    threshold: f64,
    params: &DetectorParams,
    w: u32,
    h: u32,
) -> Option<SegmentPair> {
    if outer.size < params.min_size || outer.touches_border(w, h) {
        return None;
    }
    let (x0, y0, x1, y1) = outer.bbox;
    let bbox_area = 0.25 * std::f64::consts::PI * (x1 - x0 + 1) as f64 * (y1 - y0 + 1) as f64;
    if (outer.size as f64 / bbox_area - 1.0).abs() * 100.0 > params.initial_circularity_tolerance {
        return None;
    }
    let cx = outer.centroid.x.round() as usize;
    let cy = outer.centroid.y.round() as usize;
    if cx >= w as usize || cy >= h as usize {
        return None;
    }
    let seed = cy * w as usize + cx;
    // an enclosed hole can never be larger than the ring's bounding box
    let limit = ((x1 - x0 + 1) * (y1 - y0 + 1)) as usize;
    let inner = filler.fill(seed, false, threshold, limit, |_| {})?;
    if inner.size < params.min_size || inner.touches_border(w, h) || inner.mean_gray <= outer.mean_gray {
        return None;
    }
    let ratio = inner.size as f64 / outer.size as f64;
    let expected = params.expected_area_ratio();
    if (ratio / expected - 1.0).abs() * 100.0 > params.area_ratio_tolerance {
        return None;
    }
    let union = outer.raw.merged(&inner.raw);
    let ellipse = union.ellipse();
    let fill = union.n / ellipse.area();
    if (fill - 1.0).abs() * 100.0 > params.final_circularity_tolerance {
        return None;
    }
    let offset = (inner.centroid - outer.centroid).norm();
    let allowed = params.center_distance_tolerance_abs + 0.01 * params.center_distance_tolerance_ratio * ellipse.a;
    if offset > allowed {
        return None;
    }
    Some(SegmentPair { outer, inner, threshold, ellipse })
}
