use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the simulation and evaluation pipeline.
#[derive(Debug, Error)]
pub enum ScsError {
    #[error("degenerate position: zero-length vector has no geodetic coordinate")]
    DegeneratePosition,

    #[error("degenerate look-at: target coincides with the satellite position")]
    DegenerateLookAt,

    #[error("target engulfs camera: distance {distance_km} km <= bounding radius {radius_km} km")]
    TargetEngulfsCamera { distance_km: f64, radius_km: f64 },

    #[error("no visible targets in observation {0}")]
    NoVisibleTargets(String),

    #[error("cluster {0} has no observer")]
    NoObserver(String),

    #[error("unsatisfiable cluster config: {attempts} resample attempts exhausted for cluster {cluster_id}")]
    UnsatisfiableClusterConfig { cluster_id: String, attempts: u32 },

    #[error("viewpoint index {index} out of range 1..={k}")]
    ViewpointOutOfRange { index: usize, k: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("central inside exclusion regime not modeled: r = {r_km} km >= D = {d_km} km")]
    CapRadiusTooLarge { r_km: f64, d_km: f64 },

    #[error("{path}:{line}: malformed detection line: {reason}")]
    MalformedDetection {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("missing detection sets for images: {0:?}")]
    MissingDetections(Vec<String>),

    #[error("dataset version mismatch: found {found:?}, expected {expected:?}")]
    VersionMismatch { found: String, expected: String },

    #[error("validation failed in {path}: {reason}")]
    Validation { path: PathBuf, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl ScsError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        ScsError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        ScsError::Json {
            path: path.into(),
            source,
        }
    }

    pub fn validation(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        ScsError::Validation {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, ScsError>;
