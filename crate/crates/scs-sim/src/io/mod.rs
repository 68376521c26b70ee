//! Dataset persistence: manifest/metadata JSON, YOLO-style label files, map
//! CSV export, and the top-level simulation config.
//!
//! All JSON is written with struct-declared field order and serde_json's
//! shortest-exact float formatting, so identical datasets export to byte-
//! identical files and export → import → export is byte-stable. Label and
//! detection text files use the same shortest-exact formatting.

mod config;
mod export;
mod import;
mod map;

pub use config::{CommConfig, SimConfig};
pub use export::{export_dataset, DatasetManifest, ImageIndexEntry, SelectionRecord};
pub use import::import_dataset;
pub use map::{export_map_points, map_points_csv, MapPoint};

pub const MANIFEST_VERSION: &str = "1";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Hex SHA-256 of a serializable value's canonical JSON.
pub fn config_digest<T: serde::Serialize>(value: &T) -> String {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_string(value).expect("config serializes");
    let mut hasher = Sha256::new();
    hasher.update(json.as_bytes());
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}
