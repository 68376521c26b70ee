//! Multi-view fusion baselines and communication-cost accounting.
//!
//! Fusion is deliberately naive: boxes from different views are combined in
//! each view's own image plane with identity registration. Parallax between
//! viewpoints is exactly what makes this fail, which is the point being
//! reproduced. Early fusion is modeled for communication cost only.

use serde::{Deserialize, Serialize};

use crate::detect::{DetectionBox, DetectionSet, DetectionSource};
use crate::eval::iou;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeRule {
    ConfidenceWeightedAverage,
    HighestConfidence,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub iou_group_threshold: f64,
    pub min_votes: usize,
    pub merge_rule: MergeRule,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            iou_group_threshold: 0.5,
            min_votes: 2,
            merge_rule: MergeRule::ConfidenceWeightedAverage,
        }
    }
}

/// Group boxes across views greedily by IoU, descending confidence. Each
/// group becomes one output box.
fn group_boxes(sets: &[&DetectionSet], threshold: f64) -> Vec<Vec<(usize, DetectionBox)>> {
    let mut all: Vec<(usize, DetectionBox)> = sets
        .iter()
        .enumerate()
        .flat_map(|(view, set)| set.boxes.iter().map(move |b| (view, *b)))
        .collect();
    all.sort_by(|a, b| b.1.confidence.total_cmp(&a.1.confidence));

    let mut grouped = vec![false; all.len()];
    let mut groups = Vec::new();
    for i in 0..all.len() {
        if grouped[i] {
            continue;
        }
        grouped[i] = true;
        let seed = all[i];
        let mut group = vec![seed];
        for j in (i + 1)..all.len() {
            if grouped[j] || all[j].1.class_id != seed.1.class_id {
                continue;
            }
            let a = &seed.1;
            let b = &all[j].1;
            if iou((a.cx, a.cy, a.w, a.h), (b.cx, b.cy, b.w, b.h)) >= threshold {
                grouped[j] = true;
                group.push(all[j]);
            }
        }
        groups.push(group);
    }
    groups
}

fn emit_group(group: &[(usize, DetectionBox)], rule: MergeRule) -> DetectionBox {
    let conf_mean =
        group.iter().map(|(_, b)| b.confidence).sum::<f64>() / group.len() as f64;
    match rule {
        MergeRule::HighestConfidence => DetectionBox {
            confidence: conf_mean,
            ..group[0].1
        },
        MergeRule::ConfidenceWeightedAverage => {
            let wsum: f64 = group.iter().map(|(_, b)| b.confidence).sum();
            let avg = |f: fn(&DetectionBox) -> f64| {
                if wsum > 0.0 {
                    group.iter().map(|(_, b)| f(b) * b.confidence).sum::<f64>() / wsum
                } else {
                    group.iter().map(|(_, b)| f(b)).sum::<f64>() / group.len() as f64
                }
            };
            DetectionBox {
                class_id: group[0].1.class_id,
                cx: avg(|b| b.cx),
                cy: avg(|b| b.cy),
                w: avg(|b| b.w),
                h: avg(|b| b.h),
                confidence: conf_mean,
            }
        }
    }
}

/// Merge per-view detection sets of one scene into a single set.
pub fn fuse_merge(sets: &[&DetectionSet], cfg: &FusionConfig, image_id: &str) -> DetectionSet {
    let boxes = group_boxes(sets, cfg.iou_group_threshold)
        .iter()
        .map(|g| emit_group(g, cfg.merge_rule))
        .collect();
    DetectionSet {
        image_id: image_id.to_string(),
        boxes,
        source: DetectionSource::Synthetic,
        model_tag: "fuse_merge".to_string(),
    }
}

/// Like [`fuse_merge`], but groups seen from fewer than `min_votes` distinct
/// views are dropped.
pub fn fuse_vote(sets: &[&DetectionSet], cfg: &FusionConfig, image_id: &str) -> DetectionSet {
    let boxes = group_boxes(sets, cfg.iou_group_threshold)
        .iter()
        .filter(|g| {
            let mut views: Vec<usize> = g.iter().map(|(v, _)| *v).collect();
            views.sort_unstable();
            views.dedup();
            views.len() >= cfg.min_votes
        })
        .map(|g| emit_group(g, cfg.merge_rule))
        .collect();
    DetectionSet {
        image_id: image_id.to_string(),
        boxes,
        source: DetectionSource::Synthetic,
        model_tag: "fuse_vote".to_string(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommStrategy {
    Selection,
    EarlyFusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommCostReport {
    pub strategy: CommStrategy,
    pub bytes_per_cluster: u64,
    pub link_gbps: f64,
    pub transfer_ms: f64,
    pub budget_ms: f64,
    pub within_budget: bool,
}

/// Reaction-time budget: time for an object at `distance_km` closing at
/// `speed_km_s` to arrive, in milliseconds.
pub fn reaction_budget(distance_km: f64, speed_km_s: f64) -> f64 {
    distance_km / speed_km_s * 1000.0
}

/// Default budget: nearest allowed object (0.5 km) at the mean LEO closing
/// speed (7.8 km/s).
pub fn default_budget_ms() -> f64 {
    reaction_budget(0.5, 7.8)
}

/// Per-cluster communication cost. Selection sends one short message per
/// satellite; early fusion ships full images from the k−1 other satellites.
pub fn comm_cost(
    strategy: CommStrategy,
    k: usize,
    image_bytes: u64,
    message_bytes: u64,
    link_gbps: f64,
) -> CommCostReport {
    let bytes_per_cluster = match strategy {
        CommStrategy::Selection => k as u64 * message_bytes,
        CommStrategy::EarlyFusion => (k as u64 - 1) * image_bytes,
    };
    let transfer_ms = bytes_per_cluster as f64 * 8.0 / (link_gbps * 1e9) * 1e3;
    let budget_ms = default_budget_ms();
    CommCostReport {
        strategy,
        bytes_per_cluster,
        link_gbps,
        transfer_ms,
        budget_ms,
        within_budget: transfer_ms <= budget_ms,
    }
}
