//! End-to-end acceptance gate. Each test covers one numbered criterion and
//! prints a single pass/fail line; shared large datasets are generated once.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scs_sim::camera::{CameraConfig, CameraPose, GroundTruthBox};
use scs_sim::cluster::{
    check_vd_dominance, distance_stats, generate_dataset, Dataset, DatasetConfig, DistanceRow,
    DistanceTable, RadiusClass,
};
use scs_sim::detect::{synth_detect_all, DetectionBox, DetectionSet, DetectorModel};
use scs_sim::eval::{evaluate, evaluate_images, pooled_ap};
use scs_sim::fusion::{comm_cost, fuse_merge, reaction_budget, CommStrategy, FusionConfig};
use scs_sim::geom::Vec3;
use scs_sim::io::export_dataset;
use scs_sim::orbital::EciPosition;
use scs_sim::select::distance_selected;
use scs_sim::stats::cap_asymmetry;
use scs_sim::{camera, cluster, stats};

fn report(criterion: u32, name: &str, ok: bool) {
    println!(
        "acceptance {criterion:2} [{name}]: {}",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// 1000 scenes per class, default seed; shared by criteria 1 and 2.
fn large_dataset() -> &'static (Dataset, std::time::Duration) {
    static DATA: OnceLock<(Dataset, std::time::Duration)> = OnceLock::new();
    DATA.get_or_init(|| {
        let start = Instant::now();
        let dataset = generate_dataset(&DatasetConfig {
            scenes_per_class: 1000,
            ..DatasetConfig::default()
        })
        .unwrap();
        (dataset, start.elapsed())
    })
}

/// 200 scenes per class plus default-detector detections; criteria 7 and 8.
fn trend_run() -> &'static (Dataset, BTreeMap<String, DetectionSet>, std::time::Duration) {
    static DATA: OnceLock<(Dataset, BTreeMap<String, DetectionSet>, std::time::Duration)> =
        OnceLock::new();
    DATA.get_or_init(|| {
        let start = Instant::now();
        let dataset = generate_dataset(&DatasetConfig {
            scenes_per_class: 200,
            ..DatasetConfig::default()
        })
        .unwrap();
        let detections = synth_detect_all(&DetectorModel::default(), &dataset);
        (dataset, detections, start.elapsed())
    })
}

#[test]
fn criterion_1_distance_dominance() {
    let (dataset, gen_elapsed) = large_dataset();
    let start = Instant::now();

    // Definitional per-cluster check: the selected viewpoint's mean distance
    // equals the minimum over the cluster's candidates.
    let per_cluster_ok = dataset.scenes.iter().all(|scene| {
        let min = scene
            .selection
            .per_satellite
            .iter()
            .map(|(_, _, m)| *m)
            .fold(f64::INFINITY, f64::min);
        (scene.selection.chosen_mean_km() - min).abs() < 1e-12
    });

    let table = distance_stats(dataset).unwrap();
    let aggregated_ok = check_vd_dominance(&table);

    // Published distance-table values verbatim.
    let row = |class, fixed: [f64; 3], vd| DistanceRow {
        class,
        fixed_km: fixed.to_vec(),
        vd_km: vd,
    };
    let published = DistanceTable {
        k: 3,
        rows: vec![
            row(Some(RadiusClass::Close), [2.98, 2.917, 2.86], 2.80),
            row(Some(RadiusClass::Mid), [2.57, 2.89, 2.63], 2.37),
            row(Some(RadiusClass::Far), [2.16, 2.60, 2.70], 2.03),
            row(None, [2.57, 2.80, 2.73], 2.40),
        ],
    };
    let published_ok = check_vd_dominance(&published);

    let within_time = (*gen_elapsed + start.elapsed()).as_secs_f64() < 30.0;
    let ok = per_cluster_ok && aggregated_ok && published_ok && within_time;
    report(1, "distance dominance", ok);
    assert!(per_cluster_ok, "a cluster's Vd mean is not the minimum");
    assert!(aggregated_ok, "aggregated table fails dominance");
    assert!(published_ok, "published table fails dominance");
    assert!(within_time, "runtime {:?} exceeds 30 s", *gen_elapsed + start.elapsed());
}

#[test]
fn criterion_2_geometric_hard_bounds() {
    let (dataset, _) = large_dataset();
    let mut ok = true;
    for scene in &dataset.scenes {
        let c = &scene.cluster;
        let r = dataset.config.radius_km(scene.class);
        ok &= c.central.position.distance_km(&c.secondaries[0].position) <= r + 1e-9;
        ok &= c.central.position.distance_km(&c.secondaries[1].position) <= r + 1e-9;
        ok &= c.secondaries[0]
            .position
            .distance_km(&c.secondaries[1].position)
            <= 2.0 * r + 1e-9;
        let nearest = c
            .targets
            .iter()
            .map(|t| t.position.distance_km(&c.central.position))
            .fold(f64::INFINITY, f64::min);
        ok &= (0.5..=2.0).contains(&nearest);
    }
    report(2, "geometric hard bounds", ok);
    assert!(ok);
}

#[test]
fn criterion_3_spherical_cap_asymmetry() {
    let start = Instant::now();
    let result = cap_asymmetry(2.0, 0.5, 1_000_000, 42).unwrap();
    let elapsed = start.elapsed();
    let ok = result.empirical_fraction < 0.5
        && (result.empirical_fraction - result.analytic_fraction).abs() < 0.002
        && elapsed.as_secs_f64() < 10.0;
    report(3, "spherical-cap asymmetry", ok);
    assert!(
        ok,
        "analytic {} empirical {} elapsed {elapsed:?}",
        result.analytic_fraction, result.empirical_fraction
    );
}

// Minimal self-contained mAP reference for criterion 4 (independent from the
// library implementation; see tests/eval.rs for the expanded version).
fn reference_ap(images: &[(Vec<GroundTruthBox>, Vec<DetectionBox>)], threshold: f64) -> Option<f64> {
    let mut pooled: Vec<(f64, bool)> = Vec::new();
    let mut gt_count = 0usize;
    for (gts, dets) in images {
        gt_count += gts.len();
        let mut idx: Vec<usize> = (0..dets.len()).collect();
        idx.sort_by(|&a, &b| {
            dets[b]
                .confidence
                .partial_cmp(&dets[a].confidence)
                .unwrap()
                .then(a.cmp(&b))
        });
        let mut taken = vec![false; gts.len()];
        for di in idx {
            let d = &dets[di];
            let mut best = None;
            for (gi, g) in gts.iter().enumerate() {
                if taken[gi] || g.class_id != d.class_id {
                    continue;
                }
                let ix = (d.cx + d.w / 2.0).min(g.cx + g.w / 2.0)
                    - (d.cx - d.w / 2.0).max(g.cx - g.w / 2.0);
                let iy = (d.cy + d.h / 2.0).min(g.cy + g.h / 2.0)
                    - (d.cy - d.h / 2.0).max(g.cy - g.h / 2.0);
                let inter = if ix > 0.0 && iy > 0.0 { ix * iy } else { 0.0 };
                let union = d.w * d.h + g.w * g.h - inter;
                let v = if union > 0.0 { inter / union } else { 0.0 };
                if v >= threshold && best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((gi, v));
                }
            }
            if let Some((gi, _)) = best {
                taken[gi] = true;
                pooled.push((d.confidence, true));
            } else {
                pooled.push((d.confidence, false));
            }
        }
    }
    if gt_count == 0 {
        return if pooled.is_empty() { None } else { Some(0.0) };
    }
    if pooled.is_empty() {
        return Some(0.0);
    }
    pooled.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let mut precision = Vec::new();
    let mut recall = Vec::new();
    let mut tp = 0usize;
    for (i, &(_, hit)) in pooled.iter().enumerate() {
        tp += hit as usize;
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / gt_count as f64);
    }
    let mut envelope = precision.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut total = 0.0;
    for s in 0..=100 {
        let r = s as f64 / 100.0;
        total += recall
            .iter()
            .position(|&rec| rec >= r - 1e-12)
            .map_or(0.0, |i| envelope[i]);
    }
    Some(total / 101.0)
}

#[test]
fn criterion_4_map_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    let mut max_err = 0.0f64;
    let mut ok = true;
    for _ in 0..1000 {
        let n_gt = rng.gen_range(0..=5);
        let gts: Vec<GroundTruthBox> = (0..n_gt)
            .map(|_| GroundTruthBox {
                class_id: 0,
                cx: rng.gen_range(0.1..0.9),
                cy: rng.gen_range(0.1..0.9),
                w: rng.gen_range(0.02..0.3),
                h: rng.gen_range(0.02..0.3),
            })
            .collect();
        let n_det = rng.gen_range(0..=8);
        let dets: Vec<DetectionBox> = (0..n_det)
            .map(|_| {
                if !gts.is_empty() && rng.gen_bool(0.6) {
                    let g = gts[rng.gen_range(0..gts.len())];
                    DetectionBox {
                        class_id: 0,
                        cx: g.cx + rng.gen_range(-0.05..0.05),
                        cy: g.cy + rng.gen_range(-0.05..0.05),
                        w: (g.w * rng.gen_range(0.7..1.3)).max(0.01),
                        h: (g.h * rng.gen_range(0.7..1.3)).max(0.01),
                        confidence: rng.gen_range(0.05..1.0),
                    }
                } else {
                    DetectionBox {
                        class_id: 0,
                        cx: rng.gen_range(0.1..0.9),
                        cy: rng.gen_range(0.1..0.9),
                        w: rng.gen_range(0.02..0.3),
                        h: rng.gen_range(0.02..0.3),
                        confidence: rng.gen_range(0.05..1.0),
                    }
                }
            })
            .collect();
        let images = vec![(gts, dets)];
        let refs: Vec<(&[GroundTruthBox], &[DetectionBox])> = images
            .iter()
            .map(|(g, d)| (g.as_slice(), d.as_slice()))
            .collect();
        for threshold in [0.5, 0.75] {
            match (pooled_ap(&refs, threshold), reference_ap(&images, threshold)) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    max_err = max_err.max((a - b).abs());
                    ok &= (a - b).abs() < 1e-9;
                }
                _ => ok = false,
            }
        }
    }

    // Hand fixtures.
    let g = GroundTruthBox {
        class_id: 0,
        cx: 0.5,
        cy: 0.5,
        w: 0.1,
        h: 0.1,
    };
    let tp = DetectionBox {
        class_id: 0,
        cx: 0.5,
        cy: 0.5,
        w: 0.1,
        h: 0.1,
        confidence: 0.9,
    };
    let fp = DetectionBox {
        class_id: 0,
        cx: 0.9,
        cy: 0.9,
        w: 0.05,
        h: 0.05,
        confidence: 0.95,
    };
    let perfect: Vec<(&[GroundTruthBox], &[DetectionBox])> =
        vec![(std::slice::from_ref(&g), std::slice::from_ref(&tp))];
    ok &= pooled_ap(&perfect, 0.5) == Some(1.0);
    let both = [fp, tp];
    let fp_above: Vec<(&[GroundTruthBox], &[DetectionBox])> =
        vec![(std::slice::from_ref(&g), &both)];
    ok &= pooled_ap(&fp_above, 0.5) == Some(0.5);

    report(4, "mAP oracle equivalence", ok);
    assert!(ok, "max |ours - reference| = {max_err}");
}

#[test]
fn criterion_5_projection_scaling() {
    let pose = CameraPose {
        position: EciPosition::new(0.0, 0.0, 0.0),
        forward: Vec3::X,
        up: Vec3::Z,
        fov_deg: 45.0,
        width_px: 640,
        height_px: 640,
    };
    let cfg = CameraConfig::default();
    let target = |d: f64| cluster::TargetObject {
        object_id: "t".to_string(),
        position: EciPosition::new(d, 0.0, 0.0),
        bounding_radius_m: 5.0,
        geodetic: scs_sim::orbital::GeodeticCoord {
            lat_deg: 0.0,
            lon_deg: 0.0,
            alt_km: 0.0,
        },
        elements: scs_sim::orbital::OrbitalElements::new(550.0, 0.0, 0.0, 0.0),
    };
    let width = |d: f64| {
        camera::project_target(&pose, &target(d), &cfg)
            .unwrap()
            .unwrap()
            .0
            .w
            * 640.0
    };
    let w1 = width(1.0);
    let w2 = width(2.0);
    let scaling_ok = (w2 / w1 - 0.5).abs() / 0.5 < 0.001;
    let absolute_ok = (w1 - 7.73).abs() / 7.73 < 0.02;
    let ok = scaling_ok && absolute_ok;
    report(5, "projection scaling", ok);
    assert!(ok, "w1 {w1} px, w2/w1 {}", w2 / w1);
}

#[test]
fn criterion_6_noiseless_identity() {
    let dataset = generate_dataset(&DatasetConfig::default()).unwrap();
    let model = DetectorModel {
        p_max: 1.0,
        center_jitter_frac: 0.0,
        size_jitter_frac: 0.0,
        fp_rate_per_image: 0.0,
        conf_noise_sigma: 0.0,
        ..DetectorModel::default()
    };
    let sets = synth_detect_all(&model, &dataset);
    let report_grid = evaluate(&dataset, &sets, "noiseless", "digest").unwrap();
    let ok = report_grid
        .cells
        .iter()
        .all(|row| row.values().all(|c| c.map50 == 1.0 && c.map50_95 == 1.0));
    report(6, "noiseless end-to-end identity", ok);
    assert!(ok);
}

#[test]
fn criterion_7_trend_reproduction() {
    let (dataset, detections, gen_elapsed) = trend_run();
    let start = Instant::now();
    let grid = evaluate(dataset, detections, "default", "digest").unwrap();

    let map50 = |viewpoint: &str, class: &str| grid.cell(viewpoint, class).unwrap().map50;
    let fixed = ["V(1)", "V(2)", "V(3)"];

    let far_max = fixed
        .iter()
        .map(|v| map50(v, "far"))
        .fold(f64::NEG_INFINITY, f64::max);
    let far_ok = map50("Vd", "far") >= far_max;

    let mut min_ok = true;
    for class in ["close", "mid", "far"] {
        let min = fixed
            .iter()
            .map(|v| map50(v, class))
            .fold(f64::INFINITY, f64::min);
        min_ok &= map50("Vd", class) >= min;
    }

    let elapsed = *gen_elapsed + start.elapsed();
    let within_time = elapsed.as_secs_f64() < 120.0;
    let ok = far_ok && min_ok && within_time;
    report(7, "trend reproduction", ok);
    assert!(
        ok,
        "far: Vd {} vs max fixed {far_max}; min_ok {min_ok}; elapsed {elapsed:?}",
        map50("Vd", "far")
    );
}

#[test]
fn criterion_8_fusion_degradation() {
    let (dataset, detections, _) = trend_run();
    let grid = evaluate(dataset, detections, "default", "digest").unwrap();
    let vd_far = grid.cell("Vd", "far").unwrap().map50;

    let cfg = FusionConfig::default();
    let fused: BTreeMap<String, DetectionSet> = dataset
        .scenes
        .iter()
        .map(|scene| {
            let views: Vec<&DetectionSet> = scene
                .observations
                .iter()
                .map(|o| &detections[&o.image_id])
                .collect();
            let target = &scene.observations[scene.selection.chosen_index - 1].image_id;
            (target.clone(), fuse_merge(&views, &cfg, target))
        })
        .collect();
    let vd = distance_selected(dataset);
    let fused_scores = evaluate_images(dataset, &fused, &vd).unwrap();
    let fused_far = fused_scores["far"].map50;

    let ok = fused_far < vd_far;
    report(8, "fusion degradation", ok);
    assert!(ok, "fused far {fused_far} vs Vd far {vd_far}");
}

#[test]
fn criterion_9_comm_latency_budget() {
    let budget = reaction_budget(0.5, 7.8);
    let budget_ok = (budget - 64.1).abs() < 0.05;

    let sel = comm_cost(CommStrategy::Selection, 3, 640 * 640 * 3, 32, 1.0);
    let early = comm_cost(CommStrategy::EarlyFusion, 3, 640 * 640 * 3, 32, 1.0);
    let sel_ok = sel.bytes_per_cluster <= 100;
    let early_ok = early.bytes_per_cluster >= 2_400_000
        && (early.transfer_ms - 19.6608).abs() < 0.05;

    let ok = budget_ok && sel_ok && early_ok;
    report(9, "communication/latency budget", ok);
    assert!(
        ok,
        "budget {budget}, selection {} B, early {} B / {} ms",
        sel.bytes_per_cluster, early.bytes_per_cluster, early.transfer_ms
    );
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().to_string();
                out.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

#[test]
fn criterion_10_determinism_and_persistence() {
    let dataset_a = generate_dataset(&DatasetConfig::default()).unwrap();
    let dataset_b = generate_dataset(&DatasetConfig::default()).unwrap();
    let count_ok = dataset_a.observations().count() == 180;

    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    export_dataset(&dataset_a, dir_a.path()).unwrap();
    export_dataset(&dataset_b, dir_b.path()).unwrap();
    let identical_ok = tree_bytes(dir_a.path()) == tree_bytes(dir_b.path());

    let imported = scs_sim::io::import_dataset(dir_a.path()).unwrap();
    let dir_c = tempfile::tempdir().unwrap();
    export_dataset(&imported, dir_c.path()).unwrap();
    let stable_ok = tree_bytes(dir_a.path()) == tree_bytes(dir_c.path());

    // Monte Carlo and distance stats are part of determinism too.
    let stats_ok = stats::pairwise_stats(&dataset_a).unwrap()
        == stats::pairwise_stats(&dataset_b).unwrap();

    let ok = count_ok && identical_ok && stable_ok && stats_ok;
    report(10, "determinism and persistence", ok);
    assert!(count_ok, "default dataset is not 180 images");
    assert!(identical_ok, "same-seed exports differ");
    assert!(stable_ok, "export -> import -> export not byte-stable");
    assert!(stats_ok);
}
