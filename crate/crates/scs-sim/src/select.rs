//! Distance-based viewpoint selection and the ISL message round behind it.
//!
//! Per cluster, each satellite reports the mean distance to its visible
//! targets; the viewpoint with the smallest mean wins (ties break to the
//! lowest index). The aggregated winners form the V_d partition.

use serde::{Deserialize, Serialize};

use crate::camera::Observation;
use crate::cluster::Dataset;
use crate::error::{Result, ScsError};
use crate::rng::hash_label;

/// Fixed wire size of one selection message.
pub const SELECTION_MESSAGE_BYTES: usize = 32;

/// One short ISL message: "here is my mean distance and visible count".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionMessage {
    pub sat_id: String,
    pub cluster_id: String,
    pub viewpoint_index: usize,
    pub mean_distance_km: f64,
    pub visible_count: u32,
    pub payload_bytes: usize,
}

impl SelectionMessage {
    /// Fixed 32-byte little-endian record: sat id hash, cluster id hash,
    /// mean distance, visible count, viewpoint index.
    pub fn encode(&self) -> [u8; SELECTION_MESSAGE_BYTES] {
        let mut buf = [0u8; SELECTION_MESSAGE_BYTES];
        buf[0..8].copy_from_slice(&hash_label(&self.sat_id).to_le_bytes());
        buf[8..16].copy_from_slice(&hash_label(&self.cluster_id).to_le_bytes());
        buf[16..24].copy_from_slice(&self.mean_distance_km.to_le_bytes());
        buf[24..28].copy_from_slice(&self.visible_count.to_le_bytes());
        buf[28..32].copy_from_slice(&(self.viewpoint_index as u32).to_le_bytes());
        buf
    }
}

/// Outcome of per-cluster selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub cluster_id: String,
    /// 1-based viewpoint index of the winner.
    pub chosen_index: usize,
    pub chosen_sat_id: String,
    /// (viewpoint index, sat id, mean distance) for every participating
    /// satellite, in viewpoint order. Satellites with empty views are absent.
    pub per_satellite: Vec<(usize, String, f64)>,
}

impl SelectionResult {
    pub fn chosen_mean_km(&self) -> f64 {
        self.per_satellite
            .iter()
            .find(|(j, _, _)| *j == self.chosen_index)
            .map(|(_, _, m)| *m)
            .expect("chosen index always present")
    }
}

/// Arithmetic mean of entry distances; the argmin objective.
pub fn mean_visible_distance(obs: &Observation) -> Result<f64> {
    if obs.entries.is_empty() {
        return Err(ScsError::NoVisibleTargets(obs.image_id.clone()));
    }
    let sum: f64 = obs.entries.iter().map(|e| e.distance_km).sum();
    Ok(sum / obs.entries.len() as f64)
}

/// Argmin of mean visible distance over a cluster's observations.
/// Satellites with empty views are excluded rather than scored infinite.
pub fn select_viewpoint(cluster_id: &str, cluster_obs: &[Observation]) -> Result<SelectionResult> {
    let mut per_satellite = Vec::new();
    for obs in cluster_obs {
        if obs.entries.is_empty() {
            continue;
        }
        per_satellite.push((
            obs.viewpoint_index,
            obs.sat_id.clone(),
            mean_visible_distance(obs)?,
        ));
    }
    per_satellite.sort_by_key(|(j, _, _)| *j);
    let (chosen_index, chosen_sat_id) = per_satellite
        .iter()
        .fold(None::<(usize, &str, f64)>, |best, (j, id, m)| match best {
            Some((_, _, bm)) if bm <= *m => best,
            _ => Some((*j, id, *m)),
        })
        .map(|(j, id, _)| (j, id.to_string()))
        .ok_or_else(|| ScsError::NoObserver(cluster_id.to_string()))?;
    Ok(SelectionResult {
        cluster_id: cluster_id.to_string(),
        chosen_index,
        chosen_sat_id,
        per_satellite,
    })
}

/// The fixed-viewpoint partition V(j): the j-th image of every cluster.
pub fn fixed_viewpoint(dataset: &Dataset, j: usize) -> Result<Vec<&Observation>> {
    let k = dataset.config.k;
    if j < 1 || j > k {
        return Err(ScsError::ViewpointOutOfRange { index: j, k });
    }
    Ok(dataset
        .scenes
        .iter()
        .map(|scene| &scene.observations[j - 1])
        .collect())
}

/// The V_d partition: the selected image of every cluster.
pub fn distance_selected<'a>(dataset: &'a Dataset) -> Vec<&'a Observation> {
    dataset
        .scenes
        .iter()
        .map(|scene| &scene.observations[scene.selection.chosen_index - 1])
        .collect()
}

/// One synchronous gather round: every participating satellite broadcasts a
/// fixed-size message, then everyone applies the same argmin.
pub fn protocol_round(
    cluster_id: &str,
    cluster_obs: &[Observation],
) -> Result<(Vec<SelectionMessage>, SelectionResult, usize)> {
    let result = select_viewpoint(cluster_id, cluster_obs)?;
    let mut messages = Vec::new();
    for obs in cluster_obs {
        if obs.entries.is_empty() {
            continue;
        }
        messages.push(SelectionMessage {
            sat_id: obs.sat_id.clone(),
            cluster_id: cluster_id.to_string(),
            viewpoint_index: obs.viewpoint_index,
            mean_distance_km: mean_visible_distance(obs)?,
            visible_count: obs.entries.len() as u32,
            payload_bytes: SELECTION_MESSAGE_BYTES,
        });
    }
    let total_bytes = messages.iter().map(|m| m.payload_bytes).sum();
    Ok((messages, result, total_bytes))
}
