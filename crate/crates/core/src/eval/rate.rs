//! Detection rate and the timing harness.

use std::time::{Duration, Instant};

use image::GrayImage;
use serde::{Deserialize, Serialize};

use crate::detector::Detector;
use crate::error::{Error, Result};

/// `n / t` in Hz.
pub fn detection_rate(n: usize, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("detection rate needs a positive duration, got {t}")));
    }
    Ok(n as f64 / t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchmarkMode {
    /// Frames arrive at the sequence frame rate; late frames are dropped.
    Paced,
    /// Frames are processed back to back.
    Throughput,
}

impl std::str::FromStr for BenchmarkMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paced" => Ok(BenchmarkMode::Paced),
            "throughput" => Ok(BenchmarkMode::Throughput),
            other => Err(Error::InvalidParameter(format!("unknown mode {other:?} (paced, throughput)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyStats {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl LatencyStats {
    /// Nearest-rank percentiles over per-frame latencies in seconds.
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut s = samples.to_vec();
        s.sort_by(f64::total_cmp);
        let rank = |p: f64| s[((p * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        Some(Self { mean: s.iter().sum::<f64>() / s.len() as f64, median: rank(0.5), p95: rank(0.95) })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub mode: BenchmarkMode,
    pub frames: usize,
    pub processed: usize,
    pub dropped: usize,
    /// Detections with a decoded ID.
    pub n: usize,
    /// Wall time in seconds.
    pub t: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub latency: LatencyStats,
}

/// Runs the detector over preloaded frames and reports the detection rate.
pub fn run_benchmark(
    frames: &[GrayImage],
    frame_rate: f64,
    detector: &Detector,
    mode: BenchmarkMode,
) -> Result<BenchmarkReport> {
    if frames.is_empty() {
        return Err(Error::InvalidParameter("benchmark needs at least one frame".into()));
    }
    if mode == BenchmarkMode::Paced && !(frame_rate > 0.0) {
        return Err(Error::InvalidParameter(format!("paced mode needs a positive frame rate, got {frame_rate}")));
    }
    let mut latencies = Vec::with_capacity(frames.len());
    let (mut n, mut dropped) = (0usize, 0usize);
    let start = Instant::now();
    let mut detect = |i: usize, latencies: &mut Vec<f64>| {
        let t0 = Instant::now();
        n += detector.process(&frames[i], i, i as f64 / frame_rate.max(f64::MIN_POSITIVE)).len();
        latencies.push(t0.elapsed().as_secs_f64());
    };
    match mode {
        BenchmarkMode::Throughput => {
            for i in 0..frames.len() {
                detect(i, &mut latencies);
            }
        }
        BenchmarkMode::Paced => {
            let period = 1.0 / frame_rate;
            let mut next = 0;
            while next < frames.len() {
                let due = start + Duration::from_secs_f64(next as f64 * period);
                if let Some(wait) = due.checked_duration_since(Instant::now()) {
                    std::thread::sleep(wait);
                }
                // a live camera only offers its newest frame
                let newest = ((start.elapsed().as_secs_f64() / period) as usize).min(frames.len() - 1);
                if newest > next {
                    dropped += newest - next;
                    next = newest;
                }
                detect(next, &mut latencies);
                next += 1;
            }
            let end = start + Duration::from_secs_f64(frames.len() as f64 * period);
            if let Some(wait) = end.checked_duration_since(Instant::now()) {
                std::thread::sleep(wait);
            }
        }
    }
    let t = start.elapsed().as_secs_f64();
    Ok(BenchmarkReport {
        mode,
        frames: frames.len(),
        processed: latencies.len(),
        dropped,
        n,
        t,
        f: detection_rate(n, t)?,
        latency: LatencyStats::from_samples(&latencies).expect("at least one frame processed"),
    })
}
