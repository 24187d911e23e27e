//! Necklace IDs and the Manchester-coded tooth ring.
//!
//! An ID is a bit string read counter-clockwise around the ring, first bit
//! first. Every bit occupies two adjacent cells of opposite color: a one is
//! white then black, a zero black then white. Because the marker is round,
//! IDs are only defined up to cyclic rotation; the canonical representative
//! is the numerically smallest rotation.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn mask(bits: u32) -> u64 {
    (1u64 << bits) - 1
}

fn rotate_right(value: u32, k: u32, bits: u32) -> u32 {
    let v = value as u64 & mask(bits);
    let k = k % bits;
    if k == 0 {
        return v as u32;
    }
    (((v >> k) | (v << (bits - k))) & mask(bits)) as u32
}

/// Smallest cyclic rotation of a `bits`-wide string and the right-rotation
/// that produces it (the smallest such count for periodic strings).
pub fn canonicalize_necklace(value: u32, bits: u32) -> (u32, u32) {
    assert!((1..=32).contains(&bits), "id_bits must be in 1..=32");
    (0..bits)
        .map(|k| (rotate_right(value, k, bits), k))
        .min_by_key(|&(v, k)| (v, k))
        .expect("at least one rotation")
}

pub fn is_canonical(value: u32, bits: u32) -> bool {
    canonicalize_necklace(value, bits).0 == value
}

/// All canonical IDs for the given width, ascending.
pub fn codebook(bits: u32) -> Vec<u32> {
    assert!(bits <= 24, "codebook enumeration is exhaustive; keep bits small");
    (0..(1u32 << bits)).filter(|&v| is_canonical(v, bits)).collect()
}

/// `bits`-wide binary string, first (most significant) bit first.
pub fn bit_string(value: u32, bits: u32) -> String {
    (0..bits).rev().map(|i| if value >> i & 1 == 1 { '1' } else { '0' }).collect()
}

/// One arc cell of the tooth ring, angles in radians counter-clockwise from
/// the marker's east axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToothCell {
    pub white: bool,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToothPattern {
    pub id_bits: u32,
    pub cells: Vec<ToothCell>,
}

impl ToothPattern {
    pub fn cell_width(&self) -> f64 {
        TAU / self.cells.len() as f64
    }

    /// Cell covering a marker-frame angle.
    pub fn cell_at(&self, angle: f64) -> &ToothCell {
        let idx = (angle.rem_euclid(TAU) / self.cell_width()) as usize;
        &self.cells[idx.min(self.cells.len() - 1)]
    }

    /// Samples the ring at `n` uniform angles, the whole pattern rotated by `phase`.
    pub fn sample(&self, n: usize, phase: f64) -> Vec<bool> {
        (0..n).map(|j| self.cell_at(TAU * j as f64 / n as f64 - phase).white).collect()
    }
}

/// Manchester tooth pattern of a canonical ID.
pub fn encode_id(id: u32, id_bits: u32) -> Result<ToothPattern> {
    if !(1..=32).contains(&id_bits) {
        return Err(Error::InvalidParameter(format!("id_bits must be in 1..=32, got {id_bits}")));
    }
    if id as u64 > mask(id_bits) {
        return Err(Error::IdOutOfRange { id, bits: id_bits });
    }
    let (canonical, _) = canonicalize_necklace(id, id_bits);
    if canonical != id {
        return Err(Error::NonCanonicalId { id, bits: id_bits, canonical });
    }
    let count = 2 * id_bits as usize;
    let width = TAU / count as f64;
    let cells = (0..count)
        .map(|c| {
            let bit = id >> (id_bits - 1 - (c / 2) as u32) & 1 == 1;
            ToothCell { white: bit ^ (c % 2 == 1), start: c as f64 * width, end: (c + 1) as f64 * width }
        })
        .collect();
    Ok(ToothPattern { id_bits, cells })
}

/// Decoded ring: canonical ID and the ring angle where its first bit starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RingCode {
    pub id: u32,
    /// Angle of the leading edge of the first canonical bit, in the angular
    /// frame of the samples (sample `j` at `2πj/N`), wrapped to `[0, 2π)`.
    pub phase: f64,
}

#[derive(Debug, Clone, Copy)]
struct Run {
    start: usize,
    len: usize,
    white: bool,
}

fn cyclic_runs(samples: &[bool]) -> Vec<Run> {
    let n = samples.len();
    let Some(first) = (0..n).find(|&i| samples[i] != samples[(i + n - 1) % n]) else {
        return Vec::new();
    };
    let mut runs = Vec::new();
    let mut start = first;
    let mut len = 0;
    for k in 0..n {
        let i = (first + k) % n;
        if k > 0 && samples[i] != samples[(i + n - 1) % n] {
            runs.push(Run { start, len, white: samples[start] });
            start = i;
            len = 0;
        }
        len += 1;
    }
    runs.push(Run { start, len, white: samples[start] });
    runs
}

/// Absorbs isolated flipped samples: runs shorter than `min_len` are merged
/// into their neighbours, shortest first.
fn despeckle(samples: &mut [bool], min_len: f64) {
    let n = samples.len();
    loop {
        let runs = cyclic_runs(samples);
        if runs.len() <= 2 {
            return;
        }
        let shortest = runs.iter().min_by_key(|r| r.len).expect("non-empty");
        if shortest.len as f64 >= min_len {
            return;
        }
        for k in 0..shortest.len {
            let i = (shortest.start + k) % n;
            samples[i] = !samples[i];
        }
    }
}

/// Cell colors and per-run boundary positions recovered by run-length analysis.
pub(crate) struct CellSequence {
    pub colors: Vec<bool>,
    /// Sample position of cell 0's leading edge (fractional, cyclic).
    pub origin: f64,
    /// Run lengths in samples, with the number of cells each run spans.
    pub runs: Vec<(usize, usize)>,
}

pub(crate) fn read_cells(samples: &[bool], id_bits: u32) -> Option<CellSequence> {
    let n = samples.len();
    let count = 2 * id_bits as usize;
    if id_bits == 0 || n < 2 * count {
        return None;
    }
    let cell_len = n as f64 / count as f64;
    let mut s = samples.to_vec();
    despeckle(&mut s, 0.35 * cell_len);
    let runs = cyclic_runs(&s);
    if runs.is_empty() {
        return None;
    }
    let mut colors = Vec::with_capacity(count);
    let mut spans = Vec::with_capacity(runs.len());
    let (mut sum_sin, mut sum_cos) = (0.0, 0.0);
    for run in &runs {
        let cells = (run.len as f64 / cell_len).round() as usize;
        if !(1..=2).contains(&cells) {
            return None;
        }
        // leading edge sits half a sample before the first sample of the run
        let offset = run.start as f64 - 0.5 - colors.len() as f64 * cell_len;
        let a = TAU * offset / n as f64;
        sum_sin += a.sin();
        sum_cos += a.cos();
        colors.extend(std::iter::repeat_n(run.white, cells));
        spans.push((run.len, cells));
    }
    if colors.len() != count {
        return None;
    }
    let origin = (sum_sin.atan2(sum_cos) / TAU * n as f64).rem_euclid(n as f64);
    Some(CellSequence { colors, origin, runs: spans })
}

/// Decodes a ring sampled at uniform angles (`true` = white).
///
/// Returns `None` when the cells violate the Manchester property. The two
/// constant-bit words (all zeros, all ones) produce the same cell ring up to a
/// one-cell rotation; that ring decodes to the smaller of the two.
pub fn decode_ring(samples: &[bool], id_bits: u32) -> Option<RingCode> {
    let cells = read_cells(samples, id_bits)?;
    let count = cells.colors.len();
    let cell_len = samples.len() as f64 / count as f64;
    let mut best: Option<(u32, usize)> = None;
    for align in 0..2 {
        let manchester = (0..id_bits as usize)
            .all(|i| cells.colors[(align + 2 * i) % count] != cells.colors[(align + 2 * i + 1) % count]);
        if !manchester {
            continue;
        }
        let value = (0..id_bits as usize)
            .fold(0u32, |acc, i| (acc << 1) | cells.colors[(align + 2 * i) % count] as u32);
        let (canonical, rot) = canonicalize_necklace(value, id_bits);
        let lead_bit = ((id_bits - rot) % id_bits) as usize;
        let start_cell = (align + 2 * lead_bit) % count;
        if best.is_none_or(|(id, _)| canonical < id) {
            best = Some((canonical, start_cell));
        }
    }
    let (id, start_cell) = best?;
    let position = cells.origin + start_cell as f64 * cell_len;
    Some(RingCode { id, phase: (TAU * position / samples.len() as f64).rem_euclid(TAU) })
}
