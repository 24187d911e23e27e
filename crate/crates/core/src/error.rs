use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point is not in front of the camera (z = {z})")]
    BehindCamera { z: f64 },

    #[error("undistortion did not converge after {iterations} iterations at pixel ({u:.3}, {v:.3}); distortion too strong")]
    UndistortDiverged { u: f64, v: f64, iterations: usize },

    #[error("invalid camera intrinsics: {0}")]
    InvalidCamera(String),

    #[error("degenerate point set: {0}")]
    DegeneratePoints(String),

    #[error("degenerate ellipse: axis ratio {ratio:.4} is below {min}")]
    DegenerateEllipse { ratio: f64, min: f64 },

    #[error("degenerate conic: {0}")]
    DegenerateConic(String),

    #[error("id {id} does not fit in {bits} bits")]
    IdOutOfRange { id: u32, bits: u32 },

    #[error("id {id} is not canonical for {bits} bits; canonical representative is {canonical}")]
    NonCanonicalId { id: u32, bits: u32, canonical: u32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("marker {marker_id} leaves the image at frame {frame}")]
    MarkerOutOfFrame { frame: usize, marker_id: u32 },

    #[error("detection has no decoded id")]
    MissingId,

    #[error("bundle needs at least 3 constituents, got {0}")]
    TooFewConstituents(usize),

    #[error("trace is empty")]
    EmptyTrace,

    #[error("unknown preset '{name}'; available: {available}")]
    UnknownPreset { name: String, available: String },

    #[error("missing frame {}", .0.display())]
    MissingFrame(PathBuf),

    #[error("I/O error at {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image error at {}", path.display())]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse { path: path.into(), message: message.to_string() }
    }
}
