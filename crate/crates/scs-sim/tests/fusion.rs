use scs_sim::detect::{DetectionBox, DetectionSet, DetectionSource};
use scs_sim::fusion::{
    comm_cost, default_budget_ms, fuse_merge, fuse_vote, reaction_budget, CommStrategy,
    FusionConfig,
};

fn dbox(cx: f64, cy: f64, w: f64, h: f64, conf: f64) -> DetectionBox {
    DetectionBox {
        class_id: 0,
        cx,
        cy,
        w,
        h,
        confidence: conf,
    }
}

fn set(image_id: &str, boxes: Vec<DetectionBox>) -> DetectionSet {
    DetectionSet {
        image_id: image_id.to_string(),
        boxes,
        source: DetectionSource::Synthetic,
        model_tag: "test".to_string(),
    }
}

#[test]
fn merge_identical_boxes_is_idempotent() {
    let b = dbox(0.5, 0.5, 0.1, 0.1, 0.9);
    let views = [
        set("v1", vec![b]),
        set("v2", vec![b]),
        set("v3", vec![b]),
    ];
    let refs: Vec<&DetectionSet> = views.iter().collect();
    let fused = fuse_merge(&refs, &FusionConfig::default(), "out");
    assert_eq!(fused.boxes.len(), 1);
    assert_eq!(fused.boxes[0], b);
}

#[test]
fn merge_keeps_disjoint_boxes_separate() {
    let views = [
        set("v1", vec![dbox(0.1, 0.1, 0.05, 0.05, 0.9)]),
        set("v2", vec![dbox(0.5, 0.5, 0.05, 0.05, 0.8)]),
        set("v3", vec![dbox(0.9, 0.9, 0.05, 0.05, 0.7)]),
    ];
    let refs: Vec<&DetectionSet> = views.iter().collect();
    let fused = fuse_merge(&refs, &FusionConfig::default(), "out");
    assert_eq!(fused.boxes.len(), 3);
}

#[test]
fn iou_one_third_is_below_default_threshold() {
    // Two equal squares offset by half a width: intersection w/2 * w, union
    // 3/2 * w^2, IoU exactly 1/3 < 0.5 -> not grouped.
    let views = [
        set("v1", vec![dbox(0.30, 0.5, 0.2, 0.2, 0.9)]),
        set("v2", vec![dbox(0.40, 0.5, 0.2, 0.2, 0.8)]),
    ];
    let refs: Vec<&DetectionSet> = views.iter().collect();
    let fused = fuse_merge(&refs, &FusionConfig::default(), "out");
    assert_eq!(fused.boxes.len(), 2);
}

#[test]
fn merge_output_never_exceeds_input_count() {
    let views = [
        set(
            "v1",
            vec![dbox(0.5, 0.5, 0.1, 0.1, 0.9), dbox(0.2, 0.2, 0.05, 0.05, 0.6)],
        ),
        set(
            "v2",
            vec![dbox(0.51, 0.5, 0.1, 0.1, 0.85), dbox(0.8, 0.8, 0.05, 0.05, 0.4)],
        ),
    ];
    let refs: Vec<&DetectionSet> = views.iter().collect();
    let fused = fuse_merge(&refs, &FusionConfig::default(), "out");
    assert!(fused.boxes.len() <= 4);
}

#[test]
fn merge_single_view_is_identity_up_to_order() {
    let boxes = vec![
        dbox(0.5, 0.5, 0.1, 0.1, 0.7),
        dbox(0.2, 0.2, 0.05, 0.05, 0.9),
    ];
    let v = set("v1", boxes.clone());
    let fused = fuse_merge(&[&v], &FusionConfig::default(), "out");
    let mut got = fused.boxes.clone();
    got.sort_by(|a, b| a.confidence.total_cmp(&b.confidence));
    let mut want = boxes;
    want.sort_by(|a, b| a.confidence.total_cmp(&b.confidence));
    assert_eq!(got.len(), want.len());
    // Weighted averaging of a singleton group computes (x * c) / c, which is
    // identity only up to rounding.
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g.class_id, w.class_id);
        for (a, b) in [(g.cx, w.cx), (g.cy, w.cy), (g.w, w.w), (g.h, w.h), (g.confidence, w.confidence)] {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}

#[test]
fn vote_keeps_multi_view_groups_and_drops_singletons() {
    let shared = dbox(0.5, 0.5, 0.1, 0.1, 0.9);
    let lone = dbox(0.1, 0.1, 0.05, 0.05, 0.8);
    let views = [
        set("v1", vec![shared, lone]),
        set("v2", vec![shared]),
        set("v3", vec![shared]),
    ];
    let refs: Vec<&DetectionSet> = views.iter().collect();
    let voted = fuse_vote(&refs, &FusionConfig::default(), "out");
    assert_eq!(voted.boxes.len(), 1);
    assert_eq!(voted.boxes[0], shared);
}

#[test]
fn vote_with_min_votes_one_equals_merge() {
    let cfg = FusionConfig {
        min_votes: 1,
        ..FusionConfig::default()
    };
    let views = [
        set("v1", vec![dbox(0.5, 0.5, 0.1, 0.1, 0.9), dbox(0.2, 0.2, 0.05, 0.05, 0.6)]),
        set("v2", vec![dbox(0.52, 0.5, 0.1, 0.1, 0.7)]),
    ];
    let refs: Vec<&DetectionSet> = views.iter().collect();
    assert_eq!(
        fuse_vote(&refs, &cfg, "out").boxes,
        fuse_merge(&refs, &cfg, "out").boxes
    );
}

#[test]
fn reaction_budget_values() {
    let b = reaction_budget(0.5, 7.8);
    assert!((b - 64.1).abs() < 0.05, "budget {b}");
    assert_eq!(default_budget_ms(), b);
    assert!((reaction_budget(2.0, 7.8) - 256.4).abs() < 0.2);
    // Doubling speed halves the budget.
    assert!((reaction_budget(0.5, 15.6) - b / 2.0).abs() < 1e-9);
}

#[test]
fn comm_cost_selection_vs_early_fusion() {
    let sel = comm_cost(CommStrategy::Selection, 3, 640 * 640 * 3, 32, 1.0);
    assert_eq!(sel.bytes_per_cluster, 96);
    assert!((sel.transfer_ms - 0.000768).abs() < 1e-6);
    assert!(sel.within_budget);

    let early = comm_cost(CommStrategy::EarlyFusion, 3, 640 * 640 * 3, 32, 1.0);
    assert_eq!(early.bytes_per_cluster, 2_457_600);
    assert!((early.transfer_ms - 19.6608).abs() < 1e-6);
    assert!(early.within_budget); // 19.7 ms < 64.1 ms

    assert!(sel.bytes_per_cluster < early.bytes_per_cluster);
}

#[test]
fn full_hd_early_fusion_blows_the_budget() {
    let early = comm_cost(CommStrategy::EarlyFusion, 3, 1920 * 1080 * 3, 32, 1.0);
    assert!((early.transfer_ms - 99.5328).abs() < 0.05);
    assert!(!early.within_budget);
}
