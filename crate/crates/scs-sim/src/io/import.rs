use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::camera::{CameraPose, GroundTruthBox, Observation, ObservationEntry};
use crate::cluster::{
    Cluster, ClusterScene, Dataset, RadiusClass, SatelliteState, TargetObject,
};
use crate::error::{Result, ScsError};
use crate::orbital::{GeodeticCoord, OrbitalElements, EARTH_RADIUS_KM};

use super::export::{DatasetManifest, ImageMeta, ObjectMeta, SatelliteMeta};
use super::{MANIFEST_FILE, MANIFEST_VERSION};

const GEOM_SLACK_KM: f64 = 1e-6;

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| ScsError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| ScsError::json(path, e))
}

fn satellite_from_meta(meta: &SatelliteMeta, path: &Path) -> Result<SatelliteState> {
    let position = meta.position_eci_km;
    let elements = OrbitalElements {
        altitude_km: meta.altitude_km,
        inclination_deg: meta.inclination_deg,
        raan_deg: meta.raan_deg,
        phase_deg: meta.phase_deg,
    };
    let expected = EARTH_RADIUS_KM + meta.altitude_km;
    if (position.norm_km() - expected).abs() / expected > 1e-6 {
        return Err(ScsError::validation(
            path,
            format!(
                "satellite {}: |position| = {} km inconsistent with altitude {} km",
                meta.sat_id,
                position.norm_km(),
                meta.altitude_km
            ),
        ));
    }
    Ok(SatelliteState {
        sat_id: meta.sat_id.clone(),
        position,
        elements,
        geodetic: GeodeticCoord {
            lat_deg: meta.latitude_deg,
            lon_deg: meta.longitude_deg,
            alt_km: meta.altitude_km,
        },
    })
}

fn target_from_meta(obj: &ObjectMeta, bounding_radius_m: f64) -> TargetObject {
    TargetObject {
        object_id: obj.object_id.clone(),
        position: obj.position_eci_km,
        bounding_radius_m,
        geodetic: GeodeticCoord {
            lat_deg: obj.latitude_deg,
            lon_deg: obj.longitude_deg,
            alt_km: obj.altitude_km,
        },
        elements: OrbitalElements {
            altitude_km: obj.altitude_km,
            inclination_deg: obj.inclination_deg,
            raan_deg: obj.raan_deg,
            phase_deg: obj.phase_deg,
        },
    }
}

fn parse_labels(path: &Path) -> Result<Vec<GroundTruthBox>> {
    let text = fs::read_to_string(path).map_err(|e| ScsError::io(path, e))?;
    let mut boxes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(ScsError::validation(
                path,
                format!("line {}: expected 5 label fields", lineno + 1),
            ));
        }
        let f = |i: usize| -> Result<f64> {
            fields[i].parse().map_err(|_| {
                ScsError::validation(path, format!("line {}: bad float {:?}", lineno + 1, fields[i]))
            })
        };
        boxes.push(GroundTruthBox {
            class_id: fields[0].parse().map_err(|_| {
                ScsError::validation(path, format!("line {}: bad class id", lineno + 1))
            })?,
            cx: f(1)?,
            cy: f(2)?,
            w: f(3)?,
            h: f(4)?,
        });
    }
    Ok(boxes)
}

fn validate_cluster(cluster: &Cluster, manifest: &DatasetManifest, dir: &Path) -> Result<()> {
    let radius = manifest.config.radius_km(cluster.radius_class);
    for sec in &cluster.secondaries {
        let d = cluster.central.position.distance_km(&sec.position);
        if d > radius + GEOM_SLACK_KM {
            return Err(ScsError::validation(
                dir,
                format!(
                    "cluster {}: secondary {} at {d} km exceeds radius {radius} km",
                    cluster.cluster_id, sec.sat_id
                ),
            ));
        }
    }
    let nearest = cluster
        .targets
        .iter()
        .map(|t| t.position.distance_km(&cluster.central.position))
        .fold(f64::INFINITY, f64::min);
    let (lo, hi) = manifest.config.nearest_target_range_km;
    if nearest < lo - GEOM_SLACK_KM || nearest > hi + GEOM_SLACK_KM {
        return Err(ScsError::validation(
            dir,
            format!(
                "cluster {}: nearest target at {nearest} km outside [{lo}, {hi}] km",
                cluster.cluster_id
            ),
        ));
    }
    Ok(())
}

/// Scan the dataset tree for label/meta files not referenced by the manifest.
fn check_orphans(dir: &Path, manifest: &DatasetManifest) -> Result<()> {
    let referenced: std::collections::BTreeSet<String> = manifest
        .images
        .iter()
        .flat_map(|i| [i.labels_path.clone(), i.meta_path.clone()])
        .collect();
    for class in RadiusClass::ALL {
        let class_dir = dir.join(class.label());
        if !class_dir.is_dir() {
            continue;
        }
        for cluster_entry in fs::read_dir(&class_dir).map_err(|e| ScsError::io(&class_dir, e))? {
            let cluster_dir = cluster_entry.map_err(|e| ScsError::io(&class_dir, e))?.path();
            if !cluster_dir.is_dir() {
                continue;
            }
            for file in fs::read_dir(&cluster_dir).map_err(|e| ScsError::io(&cluster_dir, e))? {
                let path = file.map_err(|e| ScsError::io(&cluster_dir, e))?.path();
                let name = path.file_name().unwrap_or_default().to_string_lossy();
                // Only label/meta files are manifest-tracked; stub images and
                // detection outputs may sit alongside them.
                if !(name.ends_with(".labels.txt") || name.ends_with(".meta.json")) {
                    continue;
                }
                let rel = path
                    .strip_prefix(dir)
                    .expect("path under dataset dir")
                    .to_string_lossy()
                    .replace('\\', "/");
                if !referenced.contains(&rel) {
                    return Err(ScsError::validation(
                        &path,
                        "file not referenced by manifest".to_string(),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Load an exported dataset, validating the manifest version, file presence,
/// label/meta agreement, and the cluster geometry invariants.
pub fn import_dataset(dir: &Path) -> Result<Dataset> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let manifest: DatasetManifest = read_json(&manifest_path)?;
    if manifest.version != MANIFEST_VERSION {
        return Err(ScsError::VersionMismatch {
            found: manifest.version,
            expected: MANIFEST_VERSION.to_string(),
        });
    }
    check_orphans(dir, &manifest)?;

    let selection_by_cluster: BTreeMap<&str, &super::SelectionRecord> = manifest
        .selection
        .iter()
        .map(|r| (r.result.cluster_id.as_str(), r))
        .collect();

    // Group image index entries per cluster, preserving manifest order.
    let mut cluster_order: Vec<String> = Vec::new();
    let mut by_cluster: BTreeMap<String, Vec<&super::ImageIndexEntry>> = BTreeMap::new();
    for entry in &manifest.images {
        if !by_cluster.contains_key(&entry.cluster_id) {
            cluster_order.push(entry.cluster_id.clone());
        }
        by_cluster.entry(entry.cluster_id.clone()).or_default().push(entry);
    }

    let mut scenes = Vec::new();
    for cluster_id in &cluster_order {
        let mut entries = by_cluster[cluster_id].clone();
        entries.sort_by_key(|e| e.viewpoint_index);

        let mut satellites: Vec<SatelliteState> = Vec::new();
        let mut targets: BTreeMap<String, TargetObject> = BTreeMap::new();
        let mut observations: Vec<Observation> = Vec::new();
        let class = entries[0].class;

        for index_entry in &entries {
            let meta_path = dir.join(&index_entry.meta_path);
            let meta: ImageMeta = read_json(&meta_path)?;
            if meta.image_id != index_entry.image_id {
                return Err(ScsError::validation(
                    &meta_path,
                    format!(
                        "image id {:?} does not match manifest entry {:?}",
                        meta.image_id, index_entry.image_id
                    ),
                ));
            }
            let labels_path = dir.join(&index_entry.labels_path);
            let label_boxes = parse_labels(&labels_path)?;
            let meta_boxes: Vec<GroundTruthBox> = meta.objects.iter().map(|o| o.gt_box).collect();
            if label_boxes != meta_boxes {
                return Err(ScsError::validation(
                    &labels_path,
                    "label boxes disagree with meta.json".to_string(),
                ));
            }

            let sat = satellite_from_meta(&meta.satellite, &meta_path)?;
            for obj in &meta.objects {
                targets
                    .entry(obj.object_id.clone())
                    .or_insert_with(|| target_from_meta(obj, manifest.config.bounding_radius_m));
            }
            observations.push(Observation {
                image_id: meta.image_id.clone(),
                sat_id: sat.sat_id.clone(),
                cluster_id: meta.cluster_id.clone(),
                viewpoint_index: meta.viewpoint_index,
                pose: CameraPose {
                    position: sat.position,
                    forward: meta.camera.forward,
                    up: meta.camera.up,
                    fov_deg: meta.camera.fov_deg,
                    width_px: meta.camera.width_px,
                    height_px: meta.camera.height_px,
                },
                entries: meta
                    .objects
                    .iter()
                    .map(|o| ObservationEntry {
                        object_id: o.object_id.clone(),
                        gt_box: o.gt_box,
                        distance_km: o.distance_km,
                        screen_x_px: o.screen_position_px[0],
                        screen_y_px: o.screen_position_px[1],
                    })
                    .collect(),
            });
            satellites.push(sat);
        }

        let cluster = Cluster {
            cluster_id: cluster_id.clone(),
            radius_class: class,
            radius_km: manifest.config.radius_km(class),
            central: satellites[0].clone(),
            secondaries: satellites[1..].to_vec(),
            targets: targets.into_values().collect(),
        };
        validate_cluster(&cluster, &manifest, dir)?;

        let selection = selection_by_cluster
            .get(cluster_id.as_str())
            .ok_or_else(|| {
                ScsError::validation(
                    &manifest_path,
                    format!("missing selection record for cluster {cluster_id}"),
                )
            })?
            .result
            .clone();

        scenes.push(ClusterScene {
            class,
            cluster,
            observations,
            selection,
        });
    }

    Ok(Dataset {
        config: manifest.config,
        scenes,
    })
}
