//! On-disk formats: numbered PNG frames with a JSON manifest, JSON Lines
//! traces and ground truth.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use image::GrayImage;
use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CameraIntrinsics;
use crate::marker::MarkerSpec;
use crate::synth::{GroundTruthRecord, RenderedSequence};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub index: usize,
    pub t: f64,
    pub file: String,
}

/// Sidecar describing a rendered (or captured) frame sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceManifest {
    pub camera: CameraIntrinsics,
    pub frame_rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub blur_radius: f64,
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub representative: bool,
    #[serde(default)]
    pub markers: Vec<MarkerSpec>,
    pub frames: Vec<FrameEntry>,
}

impl SequenceManifest {
    /// Nominal length of the sequence in seconds.
    pub fn duration(&self) -> f64 {
        self.frames.len() as f64 / self.frame_rate
    }
}

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:05}.png")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::parse(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for item in items {
        let line = serde_json::to_string(item).map_err(|e| Error::parse(path, e))?;
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(path, format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

/// Writes frames, ground truth and the manifest into `dir`.
pub fn write_sequence(dir: &Path, seq: &RenderedSequence, mut manifest: SequenceManifest) -> Result<SequenceManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    manifest.frames = Vec::with_capacity(seq.frames.len());
    for (i, img) in seq.frames.iter().enumerate() {
        let name = frame_file_name(i);
        let path = dir.join(&name);
        img.save(&path).map_err(|source| Error::Image { path: path.clone(), source })?;
        manifest.frames.push(FrameEntry { index: i, t: i as f64 / manifest.frame_rate, file: name });
    }
    write_jsonl(&dir.join(GROUND_TRUTH_FILE), &seq.ground_truth)?;
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn read_manifest(dir: &Path) -> Result<SequenceManifest> {
    let manifest: SequenceManifest = read_json(&dir.join(MANIFEST_FILE))?;
    manifest.camera.validate()?;
    Ok(manifest)
}

pub fn read_ground_truth(dir: &Path) -> Result<Vec<GroundTruthRecord>> {
    read_jsonl(&dir.join(GROUND_TRUTH_FILE))
}

/// Loads every frame of a manifest. All files are checked for existence
/// before any is decoded.
pub fn load_frames(dir: &Path, manifest: &SequenceManifest) -> Result<Vec<GrayImage>> {
    let paths: Vec<PathBuf> = manifest.frames.iter().map(|f| dir.join(&f.file)).collect();
    if let Some(missing) = paths.iter().find(|p| !p.is_file()) {
        return Err(Error::MissingFrame(missing.clone()));
    }
    paths
        .iter()
        .map(|p| {
            image::open(p).map(|img| img.into_luma8()).map_err(|source| Error::Image { path: p.clone(), source })
        })
        .collect()
}
