use scs_sim::camera::{CameraPose, GroundTruthBox, Observation, ObservationEntry};
use scs_sim::cluster::{generate_dataset, DatasetConfig};
use scs_sim::geom::Vec3;
use scs_sim::orbital::EciPosition;
use scs_sim::select::{
    distance_selected, fixed_viewpoint, mean_visible_distance, protocol_round, select_viewpoint,
    SELECTION_MESSAGE_BYTES,
};
use scs_sim::ScsError;

fn dummy_pose() -> CameraPose {
    CameraPose {
        position: EciPosition::new(0.0, 0.0, 0.0),
        forward: Vec3::X,
        up: Vec3::Z,
        fov_deg: 45.0,
        width_px: 640,
        height_px: 640,
    }
}

fn obs(viewpoint: usize, distances: &[f64]) -> Observation {
    Observation {
        image_id: format!("c_v{viewpoint}"),
        sat_id: format!("c_sat{viewpoint}"),
        cluster_id: "c".to_string(),
        viewpoint_index: viewpoint,
        pose: dummy_pose(),
        entries: distances
            .iter()
            .enumerate()
            .map(|(i, &d)| ObservationEntry {
                object_id: format!("o{i}"),
                gt_box: GroundTruthBox {
                    class_id: 0,
                    cx: 0.5,
                    cy: 0.5,
                    w: 0.01,
                    h: 0.01,
                },
                distance_km: d,
                screen_x_px: 320.0,
                screen_y_px: 320.0,
            })
            .collect(),
    }
}

#[test]
fn mean_distance_examples() {
    assert_eq!(mean_visible_distance(&obs(1, &[1.0])).unwrap(), 1.0);
    assert_eq!(mean_visible_distance(&obs(1, &[1.0, 3.0])).unwrap(), 2.0);
    assert!(matches!(
        mean_visible_distance(&obs(1, &[])),
        Err(ScsError::NoVisibleTargets(_))
    ));
}

#[test]
fn mean_distance_matches_brute_force() {
    let dataset = generate_dataset(&DatasetConfig {
        scenes_per_class: 5,
        ..DatasetConfig::default()
    })
    .unwrap();
    for o in dataset.observations() {
        let expected: f64 =
            o.entries.iter().map(|e| e.distance_km).sum::<f64>() / o.entries.len() as f64;
        assert!((mean_visible_distance(o).unwrap() - expected).abs() < 1e-12);
    }
}

#[test]
fn argmin_and_tie_break() {
    let cluster = [obs(1, &[2.5]), obs(2, &[2.2]), obs(3, &[2.9])];
    let result = select_viewpoint("c", &cluster).unwrap();
    assert_eq!(result.chosen_index, 2);
    assert_eq!(result.chosen_sat_id, "c_sat2");

    let tied = [obs(1, &[2.0]), obs(2, &[2.0]), obs(3, &[3.0])];
    assert_eq!(select_viewpoint("c", &tied).unwrap().chosen_index, 1);
}

#[test]
fn empty_observers_are_excluded_or_fatal() {
    let partial = [obs(1, &[]), obs(2, &[1.5]), obs(3, &[])];
    let result = select_viewpoint("c", &partial).unwrap();
    assert_eq!(result.chosen_index, 2);
    assert_eq!(result.per_satellite.len(), 1);

    let empty = [obs(1, &[]), obs(2, &[])];
    assert!(matches!(
        select_viewpoint("c", &empty),
        Err(ScsError::NoObserver(_))
    ));
}

#[test]
fn selection_matches_brute_force_argmin_on_generated_clusters() {
    let dataset = generate_dataset(&DatasetConfig {
        scenes_per_class: 25,
        ..DatasetConfig::default()
    })
    .unwrap();
    for scene in &dataset.scenes {
        let means: Vec<f64> = scene
            .observations
            .iter()
            .map(|o| mean_visible_distance(o).unwrap())
            .collect();
        let best = (0..means.len())
            .min_by(|&a, &b| means[a].total_cmp(&means[b]))
            .unwrap();
        assert_eq!(scene.selection.chosen_index, best + 1);
        assert!((scene.selection.chosen_mean_km() - means[best]).abs() < 1e-12);
    }
}

#[test]
fn argmin_invariant_under_increasing_transform() {
    let cluster = [obs(1, &[2.5, 4.0]), obs(2, &[2.2]), obs(3, &[2.9, 3.0])];
    let before = select_viewpoint("c", &cluster).unwrap().chosen_index;
    // Apply x -> 3x + 1 to every distance.
    let transformed: Vec<Observation> = cluster
        .iter()
        .map(|o| {
            let mut o = o.clone();
            for e in &mut o.entries {
                e.distance_km = 3.0 * e.distance_km + 1.0;
            }
            o
        })
        .collect();
    assert_eq!(select_viewpoint("c", &transformed).unwrap().chosen_index, before);
}

#[test]
fn permuting_observations_keeps_chosen_satellite() {
    let cluster = [obs(1, &[2.5]), obs(2, &[2.2]), obs(3, &[2.9])];
    let chosen = select_viewpoint("c", &cluster).unwrap().chosen_sat_id;
    let shuffled = [cluster[2].clone(), cluster[0].clone(), cluster[1].clone()];
    assert_eq!(select_viewpoint("c", &shuffled).unwrap().chosen_sat_id, chosen);
}

#[test]
fn fixed_viewpoint_partitions() {
    let dataset = generate_dataset(&DatasetConfig {
        scenes_per_class: 4,
        ..DatasetConfig::default()
    })
    .unwrap();
    let n_clusters = dataset.scenes.len();
    let mut seen = std::collections::BTreeSet::new();
    for j in 1..=3 {
        let part = fixed_viewpoint(&dataset, j).unwrap();
        assert_eq!(part.len(), n_clusters);
        assert!(part.iter().all(|o| o.viewpoint_index == j));
        for o in part {
            assert!(seen.insert(o.image_id.clone()), "partitions overlap");
        }
    }
    assert_eq!(seen.len(), dataset.observations().count());

    assert!(matches!(
        fixed_viewpoint(&dataset, 0),
        Err(ScsError::ViewpointOutOfRange { .. })
    ));
    assert!(matches!(
        fixed_viewpoint(&dataset, 4),
        Err(ScsError::ViewpointOutOfRange { .. })
    ));

    let vd = distance_selected(&dataset);
    assert_eq!(vd.len(), n_clusters);
    let mut clusters = std::collections::BTreeSet::new();
    for o in vd {
        assert!(clusters.insert(o.cluster_id.clone()), "two Vd images in one cluster");
    }
}

#[test]
fn protocol_round_bytes_and_equivalence() {
    let cluster = [obs(1, &[2.5]), obs(2, &[2.2]), obs(3, &[2.9])];
    let (messages, result, total_bytes) = protocol_round("c", &cluster).unwrap();
    assert_eq!(messages.len(), 3);
    assert_eq!(total_bytes, 96);
    assert_eq!(result, select_viewpoint("c", &cluster).unwrap());
    for m in &messages {
        assert_eq!(m.payload_bytes, SELECTION_MESSAGE_BYTES);
        assert_eq!(m.encode().len(), 32);
        assert!(m.visible_count >= 1);
    }
}

#[test]
fn protocol_bytes_bounded_for_small_clusters() {
    for k in 1..=16 {
        let cluster: Vec<Observation> = (1..=k).map(|j| obs(j, &[1.0 + j as f64])).collect();
        let (_, _, total_bytes) = protocol_round("c", &cluster).unwrap();
        assert_eq!(total_bytes, k * SELECTION_MESSAGE_BYTES);
        assert!(total_bytes < 1000);
    }
}
