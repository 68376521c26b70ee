use serde::{Deserialize, Serialize};

use crate::cluster::DatasetConfig;
use crate::detect::DetectorModel;
use crate::fusion::FusionConfig;
use crate::select::SELECTION_MESSAGE_BYTES;

/// Link and payload sizes for communication-cost accounting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommConfig {
    pub link_gbps: f64,
    /// Full image payload for early fusion; 640×640×3 bytes by default.
    pub image_bytes: u64,
    pub message_bytes: u64,
}

impl Default for CommConfig {
    fn default() -> Self {
        CommConfig {
            link_gbps: 1.0,
            image_bytes: 640 * 640 * 3,
            message_bytes: SELECTION_MESSAGE_BYTES as u64,
        }
    }
}

/// The single JSON config document the CLI consumes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct SimConfig {
    pub dataset: DatasetConfig,
    pub detector: DetectorModel,
    pub fusion: FusionConfig,
    pub comm: CommConfig,
}
