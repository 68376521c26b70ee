//! Detection scoring: IoU, greedy matching, 101-point interpolated AP, and
//! the mAP50 / mAP50:95 report partitioned by viewpoint and cluster class.
//!
//! Detections are pooled per (viewpoint, class) cell into a single PR curve,
//! matching how YOLO-family tooling reports mAP. Single class throughout.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::camera::{GroundTruthBox, Observation};
use crate::cluster::{Dataset, RadiusClass};
use crate::detect::{DetectionBox, DetectionSet};
use crate::error::{Result, ScsError};
use crate::par;
use crate::select;

/// IoU thresholds for mAP50:95: 0.50, 0.55, …, 0.95.
pub fn map5095_thresholds() -> Vec<f64> {
    (0..10).map(|i| 0.5 + 0.05 * i as f64).collect()
}

fn corners(cx: f64, cy: f64, w: f64, h: f64) -> (f64, f64, f64, f64) {
    (cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
}

/// Intersection over union of two center-format boxes. Zero-area inputs
/// score 0 by convention.
pub fn iou(a: (f64, f64, f64, f64), b: (f64, f64, f64, f64)) -> f64 {
    let (ax0, ay0, ax1, ay1) = corners(a.0, a.1, a.2, a.3);
    let (bx0, by0, bx1, by1) = corners(b.0, b.1, b.2, b.3);
    let ix = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let iy = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = ix * iy;
    let union = (ax1 - ax0) * (ay1 - ay0) + (bx1 - bx0) * (by1 - by0) - inter;
    if union <= 0.0 {
        0.0
    } else {
        inter / union
    }
}

pub fn iou_boxes(a: &DetectionBox, g: &GroundTruthBox) -> f64 {
    iou((a.cx, a.cy, a.w, a.h), (g.cx, g.cy, g.w, g.h))
}

/// Greedy matching outcome for one image at one IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// (confidence, is_true_positive) per detection, in processing order
    /// (descending confidence, input order on ties).
    pub detections: Vec<(f64, bool)>,
    pub gt_matched: Vec<bool>,
}

/// Process detections in descending confidence; each takes the highest-IoU
/// unmatched ground truth at or above the threshold, otherwise counts as FP.
pub fn match_greedy(
    gt: &[GroundTruthBox],
    det: &[DetectionBox],
    iou_threshold: f64,
) -> MatchResult {
    let mut order: Vec<usize> = (0..det.len()).collect();
    order.sort_by(|&a, &b| det[b].confidence.total_cmp(&det[a].confidence).then(a.cmp(&b)));

    let mut gt_matched = vec![false; gt.len()];
    let mut detections = Vec::with_capacity(det.len());
    for &di in &order {
        let mut best: Option<(usize, f64)> = None;
        for (gi, g) in gt.iter().enumerate() {
            if gt_matched[gi] || g.class_id != det[di].class_id {
                continue;
            }
            let v = iou_boxes(&det[di], g);
            if v >= iou_threshold && best.map_or(true, |(_, bv)| v > bv) {
                best = Some((gi, v));
            }
        }
        let tp = if let Some((gi, _)) = best {
            gt_matched[gi] = true;
            true
        } else {
            false
        };
        detections.push((det[di].confidence, tp));
    }
    MatchResult {
        detections,
        gt_matched,
    }
}

/// 101-point interpolated AP from pooled (confidence, tp) pairs.
///
/// Returns `None` when there is nothing to score (no ground truth and no
/// detections); zero ground truth with detections scores 0.
pub fn average_precision(mut pooled: Vec<(f64, bool)>, gt_count: usize) -> Option<f64> {
    if gt_count == 0 {
        return if pooled.is_empty() { None } else { Some(0.0) };
    }
    if pooled.is_empty() {
        return Some(0.0);
    }
    pooled.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut precisions = Vec::with_capacity(pooled.len());
    let mut recalls = Vec::with_capacity(pooled.len());
    let mut tp = 0usize;
    for (i, (_, is_tp)) in pooled.iter().enumerate() {
        if *is_tp {
            tp += 1;
        }
        precisions.push(tp as f64 / (i + 1) as f64);
        recalls.push(tp as f64 / gt_count as f64);
    }

    // Precision envelope: max precision over all points with recall >= r.
    let mut ap = 0.0;
    for i in 0..=100 {
        let r = i as f64 / 100.0;
        let p = precisions
            .iter()
            .zip(recalls.iter())
            .filter(|(_, &rec)| rec >= r - 1e-12)
            .map(|(&p, _)| p)
            .fold(0.0f64, f64::max);
        ap += p;
    }
    Some(ap / 101.0)
}

/// AP for a pooled set of images at one threshold: per-image greedy matching,
/// dataset-level PR curve.
pub fn pooled_ap(images: &[(&[GroundTruthBox], &[DetectionBox])], iou_threshold: f64) -> Option<f64> {
    let mut pooled = Vec::new();
    let mut gt_total = 0usize;
    for (gt, det) in images {
        gt_total += gt.len();
        pooled.extend(match_greedy(gt, det, iou_threshold).detections);
    }
    average_precision(pooled, gt_total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellScore {
    pub map50: f64,
    pub map50_95: f64,
    pub image_count: usize,
}

/// Grid of scores: rows are viewpoint partitions, columns the cluster
/// classes plus Overall (image-count-weighted mean of the class cells).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model_tag: String,
    pub config_digest: String,
    /// Row labels in order: V(1)..V(k), Vd.
    pub viewpoints: Vec<String>,
    /// `cells[row]` maps class label (close/mid/far/overall) to scores.
    pub cells: Vec<BTreeMap<String, CellScore>>,
}

impl EvalReport {
    pub fn cell(&self, viewpoint: &str, class: &str) -> Option<&CellScore> {
        let row = self.viewpoints.iter().position(|v| v == viewpoint)?;
        self.cells[row].get(class)
    }

    /// Aligned text table in the layout of the performance tables.
    pub fn render_text(&self) -> String {
        let classes = ["close", "mid", "far", "overall"];
        let mut out = String::new();
        out.push_str(&format!("model: {}\n", self.model_tag));
        out.push_str(&format!(
            "{:<10}{:>22}{:>22}{:>22}{:>22}\n",
            "Viewpoint", "Close Cluster", "Mid Cluster", "Far Cluster", "Overall"
        ));
        out.push_str(&format!(
            "{:<10}{}\n",
            "",
            "   mAP50  mAP50:95".repeat(4).trim_end()
        ));
        for (row, label) in self.viewpoints.iter().enumerate() {
            out.push_str(&format!("{label:<10}"));
            for class in classes {
                match self.cells[row].get(class) {
                    Some(c) => out.push_str(&format!("{:>12.3}{:>10.3}", c.map50, c.map50_95)),
                    None => out.push_str(&format!("{:>12}{:>10}", "-", "-")),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Score a detection run against the dataset across the V(1)..V(k) and Vd
/// partitions. Every partition image must have a detection set.
pub fn evaluate(
    dataset: &Dataset,
    detections: &BTreeMap<String, DetectionSet>,
    model_tag: &str,
    config_digest: &str,
) -> Result<EvalReport> {
    let k = dataset.config.k;

    let mut partitions: Vec<(String, Vec<&Observation>)> = Vec::new();
    for j in 1..=k {
        partitions.push((format!("V({j})"), select::fixed_viewpoint(dataset, j)?));
    }
    partitions.push(("Vd".to_string(), select::distance_selected(dataset)));

    let missing: Vec<String> = partitions
        .iter()
        .flat_map(|(_, obs)| obs.iter())
        .filter(|o| !detections.contains_key(&o.image_id))
        .map(|o| o.image_id.clone())
        .collect();
    if !missing.is_empty() {
        let mut missing = missing;
        missing.sort();
        missing.dedup();
        return Err(ScsError::MissingDetections(missing));
    }

    let class_of: BTreeMap<&str, RadiusClass> = dataset
        .scenes
        .iter()
        .flat_map(|s| s.observations.iter().map(move |o| (o.image_id.as_str(), s.class)))
        .collect();

    let thresholds = map5095_thresholds();
    let cells = par::map_indexed(partitions.len(), |row| {
        let (_, observations) = &partitions[row];
        let mut by_class: BTreeMap<String, CellScore> = BTreeMap::new();
        let mut class_cells: Vec<CellScore> = Vec::new();
        for class in RadiusClass::ALL {
            let images: Vec<(Vec<GroundTruthBox>, Vec<DetectionBox>)> = observations
                .iter()
                .filter(|o| class_of[o.image_id.as_str()] == class)
                .map(|o| {
                    (
                        o.entries.iter().map(|e| e.gt_box).collect(),
                        detections[&o.image_id].boxes.clone(),
                    )
                })
                .collect();
            if let Some(score) = score_cell(&images, &thresholds) {
                by_class.insert(class.label().to_string(), score);
                class_cells.push(score);
            }
        }
        if !class_cells.is_empty() {
            let total: usize = class_cells.iter().map(|c| c.image_count).sum();
            let weighted = |f: fn(&CellScore) -> f64| {
                class_cells
                    .iter()
                    .map(|c| f(c) * c.image_count as f64)
                    .sum::<f64>()
                    / total as f64
            };
            by_class.insert(
                "overall".to_string(),
                CellScore {
                    map50: weighted(|c| c.map50),
                    map50_95: weighted(|c| c.map50_95),
                    image_count: total,
                },
            );
        }
        by_class
    });

    Ok(EvalReport {
        model_tag: model_tag.to_string(),
        config_digest: config_digest.to_string(),
        viewpoints: partitions.into_iter().map(|(label, _)| label).collect(),
        cells,
    })
}

/// Score one image list (e.g. a fused per-cluster output) by class, with an
/// image-count-weighted overall cell. Every image must have a detection set.
pub fn evaluate_images(
    dataset: &Dataset,
    detections: &BTreeMap<String, DetectionSet>,
    observations: &[&Observation],
) -> Result<BTreeMap<String, CellScore>> {
    let missing: Vec<String> = observations
        .iter()
        .filter(|o| !detections.contains_key(&o.image_id))
        .map(|o| o.image_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(ScsError::MissingDetections(missing));
    }
    let class_of: BTreeMap<&str, RadiusClass> = dataset
        .scenes
        .iter()
        .flat_map(|s| s.observations.iter().map(move |o| (o.image_id.as_str(), s.class)))
        .collect();
    let thresholds = map5095_thresholds();
    let mut by_class = BTreeMap::new();
    let mut class_cells = Vec::new();
    for class in RadiusClass::ALL {
        let images: Vec<(Vec<GroundTruthBox>, Vec<DetectionBox>)> = observations
            .iter()
            .filter(|o| class_of[o.image_id.as_str()] == class)
            .map(|o| {
                (
                    o.entries.iter().map(|e| e.gt_box).collect(),
                    detections[&o.image_id].boxes.clone(),
                )
            })
            .collect();
        if let Some(score) = score_cell(&images, &thresholds) {
            by_class.insert(class.label().to_string(), score);
            class_cells.push(score);
        }
    }
    if !class_cells.is_empty() {
        let total: usize = class_cells.iter().map(|c| c.image_count).sum();
        by_class.insert(
            "overall".to_string(),
            CellScore {
                map50: class_cells.iter().map(|c| c.map50 * c.image_count as f64).sum::<f64>()
                    / total as f64,
                map50_95: class_cells
                    .iter()
                    .map(|c| c.map50_95 * c.image_count as f64)
                    .sum::<f64>()
                    / total as f64,
                image_count: total,
            },
        );
    }
    Ok(by_class)
}

/// Score one cell: pooled PR per threshold. `None` when the cell has no
/// images or nothing to score at the base threshold.
fn score_cell(
    images: &[(Vec<GroundTruthBox>, Vec<DetectionBox>)],
    thresholds: &[f64],
) -> Option<CellScore> {
    if images.is_empty() {
        return None;
    }
    let refs: Vec<(&[GroundTruthBox], &[DetectionBox])> = images
        .iter()
        .map(|(g, d)| (g.as_slice(), d.as_slice()))
        .collect();
    let map50 = pooled_ap(&refs, 0.5)?;
    let aps: Vec<f64> = thresholds
        .iter()
        .filter_map(|&t| pooled_ap(&refs, t))
        .collect();
    Some(CellScore {
        map50,
        map50_95: aps.iter().sum::<f64>() / aps.len() as f64,
        image_count: images.len(),
    })
}
