//! Pinhole camera: look-at orientation, frustum culling, and projection of
//! target bounding spheres to normalized ground-truth boxes.
//!
//! The camera is a square-pixel, zero-distortion pinhole with the same FOV on
//! both axes. Visibility is purely geometric: in front of the camera, within
//! range, apparent diameter of at least one pixel, and a nonzero box after
//! clamping to the image.

use serde::{Deserialize, Serialize};

use crate::cluster::{SatelliteState, TargetObject};
use crate::error::{Result, ScsError};
use crate::geom::Vec3;
use crate::orbital::EciPosition;

/// Camera intrinsics and culling settings shared by every image.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    pub fov_deg: f64,
    pub width_px: u32,
    pub height_px: u32,
    pub max_range_km: f64,
    /// Minimum apparent diameter for a target to count as visible.
    pub min_apparent_px: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        CameraConfig {
            fov_deg: 45.0,
            width_px: 640,
            height_px: 640,
            max_range_km: 20.0,
            min_apparent_px: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    pub position: EciPosition,
    pub forward: Vec3,
    pub up: Vec3,
    pub fov_deg: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl CameraPose {
    /// Right-handed basis: right = forward × up.
    pub fn right(&self) -> Vec3 {
        self.forward.cross(self.up)
    }
}

/// Normalized ground-truth box, YOLO layout (cx, cy, w, h in [0, 1]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthBox {
    pub class_id: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

/// One visible target in an image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationEntry {
    pub object_id: String,
    pub gt_box: GroundTruthBox,
    pub distance_km: f64,
    pub screen_x_px: f64,
    pub screen_y_px: f64,
}

/// One captured image: pose plus ground-truth entries sorted by distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub image_id: String,
    pub sat_id: String,
    pub cluster_id: String,
    /// 1-based index within the cluster; 1 is the central satellite.
    pub viewpoint_index: usize,
    pub pose: CameraPose,
    pub entries: Vec<ObservationEntry>,
}

/// Deterministic up-vector: project global +Z out of `forward`, falling back
/// to +X when forward is (anti)parallel to +Z. Camera roll is unspecified in
/// the capture procedure, so any fixed rule works as long as it is stable.
fn up_for_forward(forward: Vec3) -> Vec3 {
    let projected = Vec3::Z.sub(forward.scale(Vec3::Z.dot(forward)));
    match projected.normalized() {
        Some(up) => up,
        None => Vec3::X
            .sub(forward.scale(Vec3::X.dot(forward)))
            .normalized()
            .expect("X and Z cannot both be parallel to forward"),
    }
}

/// Point the camera at the nearest target; the nearest object is centrally
/// captured by construction.
pub fn orient_camera(
    sat: &SatelliteState,
    targets: &[TargetObject],
    cfg: &CameraConfig,
) -> Result<CameraPose> {
    let nearest = targets
        .iter()
        .min_by(|a, b| {
            let da = a.position.distance_km(&sat.position);
            let db = b.position.distance_km(&sat.position);
            da.total_cmp(&db)
        })
        .ok_or(ScsError::DegenerateLookAt)?;
    let forward = nearest
        .position
        .as_vec3()
        .sub(sat.position.as_vec3())
        .normalized()
        .ok_or(ScsError::DegenerateLookAt)?;
    Ok(CameraPose {
        position: sat.position,
        forward,
        up: up_for_forward(forward),
        fov_deg: cfg.fov_deg,
        width_px: cfg.width_px,
        height_px: cfg.height_px,
    })
}

/// The same orientation relocated to a secondary satellite ("identical
/// viewing angles": secondaries reuse the central camera's forward/up).
pub fn pose_at(position: EciPosition, reference: &CameraPose) -> CameraPose {
    CameraPose {
        position,
        ..*reference
    }
}

/// Project a target's bounding sphere into the image.
///
/// Returns `Ok(None)` when the target fails the visibility predicate:
/// behind the camera, beyond `max_range_km`, apparent diameter below the
/// pixel threshold, or fully outside the image after clamping.
pub fn project_target(
    pose: &CameraPose,
    target: &TargetObject,
    cfg: &CameraConfig,
) -> Result<Option<(GroundTruthBox, f64, (f64, f64))>> {
    let rel = target.position.as_vec3().sub(pose.position.as_vec3());
    let d_km = rel.norm();
    let rho_km = target.bounding_radius_m / 1000.0;
    if d_km <= rho_km {
        return Err(ScsError::TargetEngulfsCamera {
            distance_km: d_km,
            radius_km: rho_km,
        });
    }
    if d_km > cfg.max_range_km {
        return Ok(None);
    }

    let z = rel.dot(pose.forward);
    if z <= 0.0 {
        return Ok(None);
    }
    let x = rel.dot(pose.right());
    let y = rel.dot(pose.up);

    let tan_half = (pose.fov_deg.to_radians() / 2.0).tan();
    let half_w = pose.width_px as f64 / 2.0;
    let half_h = pose.height_px as f64 / 2.0;

    // Perspective division; image y grows downward.
    let px = half_w + (x / (z * tan_half)) * half_w;
    let py = half_h - (y / (z * tan_half)) * half_h;

    // Apparent angular radius of the bounding sphere.
    let half_extent_px = ((rho_km / d_km).asin().tan() / tan_half) * half_w;
    if 2.0 * half_extent_px < cfg.min_apparent_px {
        return Ok(None);
    }

    let x0 = (px - half_extent_px).clamp(0.0, pose.width_px as f64);
    let x1 = (px + half_extent_px).clamp(0.0, pose.width_px as f64);
    let y0 = (py - half_extent_px).clamp(0.0, pose.height_px as f64);
    let y1 = (py + half_extent_px).clamp(0.0, pose.height_px as f64);
    if x1 - x0 <= 0.0 || y1 - y0 <= 0.0 {
        return Ok(None);
    }

    let gt = GroundTruthBox {
        class_id: 0,
        cx: (x0 + x1) / 2.0 / pose.width_px as f64,
        cy: (y0 + y1) / 2.0 / pose.height_px as f64,
        w: (x1 - x0) / pose.width_px as f64,
        h: (y1 - y0) / pose.height_px as f64,
    };
    Ok(Some((gt, d_km, (px, py))))
}

/// Render one observation: project every cluster target through `pose` and
/// sort the surviving entries ascending by distance.
pub fn render_observation(
    image_id: String,
    sat: &SatelliteState,
    viewpoint_index: usize,
    cluster_id: &str,
    targets: &[TargetObject],
    pose: CameraPose,
    cfg: &CameraConfig,
) -> Result<Observation> {
    let mut entries = Vec::new();
    for target in targets {
        if let Some((gt_box, distance_km, (screen_x_px, screen_y_px))) =
            project_target(&pose, target, cfg)?
        {
            entries.push(ObservationEntry {
                object_id: target.object_id.clone(),
                gt_box,
                distance_km,
                screen_x_px,
                screen_y_px,
            });
        }
    }
    entries.sort_by(|a, b| {
        a.distance_km
            .total_cmp(&b.distance_km)
            .then_with(|| a.object_id.cmp(&b.object_id))
    });
    Ok(Observation {
        image_id,
        sat_id: sat.sat_id.clone(),
        cluster_id: cluster_id.to_string(),
        viewpoint_index,
        pose,
        entries,
    })
}
