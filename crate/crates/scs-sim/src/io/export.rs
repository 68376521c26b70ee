use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::camera::{CameraPose, GroundTruthBox, Observation};
use crate::cluster::{ClusterScene, Dataset, DatasetConfig, RadiusClass};
use crate::error::{Result, ScsError};
use crate::geom::Vec3;
use crate::orbital::EciPosition;
use crate::select::{self, SelectionResult};

use super::{config_digest, MANIFEST_FILE, MANIFEST_VERSION};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageIndexEntry {
    pub image_id: String,
    pub cluster_id: String,
    pub viewpoint_index: usize,
    pub class: RadiusClass,
    pub labels_path: String,
    pub meta_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    #[serde(flatten)]
    pub result: SelectionResult,
    pub protocol_bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: String,
    pub master_seed: u64,
    pub config_digest: String,
    pub config: DatasetConfig,
    pub images: Vec<ImageIndexEntry>,
    pub selection: Vec<SelectionRecord>,
}

/// Satellite metadata block: the recorded geodetic and orbital fields plus
/// the exact inertial position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(super) struct SatelliteMeta {
    pub sat_id: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub phase_deg: f64,
    pub position_eci_km: EciPosition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(super) struct CameraMeta {
    pub forward: Vec3,
    pub up: Vec3,
    pub fov_deg: f64,
    pub width_px: u32,
    pub height_px: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(super) struct ObjectMeta {
    pub object_id: String,
    pub screen_position_px: [f64; 2],
    #[serde(rename = "box")]
    pub gt_box: GroundTruthBox,
    pub distance_km: f64,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub phase_deg: f64,
    pub position_eci_km: EciPosition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(super) struct ImageMeta {
    pub image_id: String,
    pub cluster_id: String,
    pub viewpoint_index: usize,
    pub class: RadiusClass,
    pub satellite: SatelliteMeta,
    pub camera: CameraMeta,
    pub objects: Vec<ObjectMeta>,
}

pub(super) fn image_rel_paths(scene: &ClusterScene, viewpoint: usize) -> (String, String) {
    let dir = format!("{}/{}", scene.class.label(), scene.cluster.cluster_id);
    (
        format!("{dir}/v{viewpoint}.labels.txt"),
        format!("{dir}/v{viewpoint}.meta.json"),
    )
}

fn labels_text(obs: &Observation) -> String {
    let mut out = String::new();
    for e in &obs.entries {
        let b = &e.gt_box;
        out.push_str(&format!("{} {} {} {} {}\n", b.class_id, b.cx, b.cy, b.w, b.h));
    }
    out
}

fn image_meta(scene: &ClusterScene, obs: &Observation) -> ImageMeta {
    let sat = scene
        .cluster
        .satellites()
        .find(|s| s.sat_id == obs.sat_id)
        .expect("observation satellite exists");
    let objects = obs
        .entries
        .iter()
        .map(|e| {
            let t = scene
                .cluster
                .targets
                .iter()
                .find(|t| t.object_id == e.object_id)
                .expect("entry object exists");
            ObjectMeta {
                object_id: t.object_id.clone(),
                screen_position_px: [e.screen_x_px, e.screen_y_px],
                gt_box: e.gt_box,
                distance_km: e.distance_km,
                latitude_deg: t.geodetic.lat_deg,
                longitude_deg: t.geodetic.lon_deg,
                altitude_km: t.geodetic.alt_km,
                inclination_deg: t.elements.inclination_deg,
                raan_deg: t.elements.raan_deg,
                phase_deg: t.elements.phase_deg,
                position_eci_km: t.position,
            }
        })
        .collect();
    ImageMeta {
        image_id: obs.image_id.clone(),
        cluster_id: obs.cluster_id.clone(),
        viewpoint_index: obs.viewpoint_index,
        class: scene.class,
        satellite: SatelliteMeta {
            sat_id: sat.sat_id.clone(),
            latitude_deg: sat.geodetic.lat_deg,
            longitude_deg: sat.geodetic.lon_deg,
            altitude_km: sat.geodetic.alt_km,
            inclination_deg: sat.elements.inclination_deg,
            raan_deg: sat.elements.raan_deg,
            phase_deg: sat.elements.phase_deg,
            position_eci_km: sat.position,
        },
        camera: camera_meta(&obs.pose),
        objects,
    }
}

fn camera_meta(pose: &CameraPose) -> CameraMeta {
    CameraMeta {
        forward: pose.forward,
        up: pose.up,
        fov_deg: pose.fov_deg,
        width_px: pose.width_px,
        height_px: pose.height_px,
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| ScsError::json(path, e))?;
    fs::write(path, text + "\n").map_err(|e| ScsError::io(path, e))
}

/// Export a dataset as `<class>/<cluster_id>/v<j>.{labels.txt,meta.json}`
/// plus a top-level manifest. The manifest is written last as the commit
/// point: readers see either no manifest or a complete dataset.
pub fn export_dataset(dataset: &Dataset, dir: &Path) -> Result<DatasetManifest> {
    fs::create_dir_all(dir).map_err(|e| ScsError::io(dir, e))?;
    let mut images = Vec::new();
    let mut selection = Vec::new();

    for scene in &dataset.scenes {
        let cluster_dir: PathBuf = [
            dir,
            Path::new(scene.class.label()),
            Path::new(&scene.cluster.cluster_id),
        ]
        .iter()
        .collect();
        fs::create_dir_all(&cluster_dir).map_err(|e| ScsError::io(&cluster_dir, e))?;

        for obs in &scene.observations {
            let (labels_rel, meta_rel) = image_rel_paths(scene, obs.viewpoint_index);
            let labels_path = dir.join(&labels_rel);
            fs::write(&labels_path, labels_text(obs)).map_err(|e| ScsError::io(&labels_path, e))?;
            write_json(&dir.join(&meta_rel), &image_meta(scene, obs))?;
            images.push(ImageIndexEntry {
                image_id: obs.image_id.clone(),
                cluster_id: obs.cluster_id.clone(),
                viewpoint_index: obs.viewpoint_index,
                class: scene.class,
                labels_path: labels_rel,
                meta_path: meta_rel,
            });
        }

        let (_, _, protocol_bytes) =
            select::protocol_round(&scene.cluster.cluster_id, &scene.observations)?;
        selection.push(SelectionRecord {
            result: scene.selection.clone(),
            protocol_bytes,
        });
    }

    let manifest = DatasetManifest {
        version: MANIFEST_VERSION.to_string(),
        master_seed: dataset.config.master_seed,
        config_digest: config_digest(&dataset.config),
        config: dataset.config.clone(),
        images,
        selection,
    };
    write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
