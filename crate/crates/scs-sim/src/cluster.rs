//! Cluster and dataset generation.
//!
//! A cluster is a central satellite, k−1 secondaries sampled uniformly from a
//! solid ball around it, and a set of target objects whose nearest member
//! lies between 0.5 km and 2 km from the central satellite. Every satellite
//! must see at least one target; clusters violating that are resampled.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::camera::{self, CameraConfig, Observation};
use crate::error::{Result, ScsError};
use crate::geom::Vec3;
use crate::orbital::{
    eci_to_geodetic, elements_for_position, orbit_position, EciPosition, GeodeticCoord,
    OrbitalElements,
};
use crate::select::{self, SelectionResult};
use crate::{par, rng};

const RESAMPLE_CAP: u32 = 1000;

/// Cluster radius class: Close 0.5 km, Mid 1 km, Far 2 km.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RadiusClass {
    Close,
    Mid,
    Far,
}

impl RadiusClass {
    pub const ALL: [RadiusClass; 3] = [RadiusClass::Close, RadiusClass::Mid, RadiusClass::Far];

    pub fn label(&self) -> &'static str {
        match self {
            RadiusClass::Close => "close",
            RadiusClass::Mid => "mid",
            RadiusClass::Far => "far",
        }
    }

    pub fn default_radius_km(&self) -> f64 {
        match self {
            RadiusClass::Close => 0.5,
            RadiusClass::Mid => 1.0,
            RadiusClass::Far => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SatelliteState {
    pub sat_id: String,
    pub position: EciPosition,
    pub elements: OrbitalElements,
    pub geodetic: GeodeticCoord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetObject {
    pub object_id: String,
    pub position: EciPosition,
    pub bounding_radius_m: f64,
    pub geodetic: GeodeticCoord,
    pub elements: OrbitalElements,
}

/// Per-class generation settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub radius_km: f64,
    pub k: usize,
    pub nearest_target_range_km: (f64, f64),
    /// Inclusive range for the number of targets per scene.
    pub targets_per_scene: (u32, u32),
    pub altitude_range_km: (f64, f64),
    /// Non-nearest targets are placed between the nearest distance and this.
    pub max_target_range_km: f64,
    pub bounding_radius_m: f64,
    pub master_seed: u64,
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<()> {
        if self.radius_km <= 0.0 {
            return Err(ScsError::InvalidConfig("radius_km must be > 0".into()));
        }
        if self.k < 2 {
            return Err(ScsError::InvalidConfig("k must be >= 2".into()));
        }
        let (lo, hi) = self.nearest_target_range_km;
        if !(lo < hi) || lo <= 0.0 {
            return Err(ScsError::InvalidConfig(
                "nearest_target_range_km must satisfy 0 < min < max".into(),
            ));
        }
        if self.targets_per_scene.0 < 1 || self.targets_per_scene.0 > self.targets_per_scene.1 {
            return Err(ScsError::InvalidConfig(
                "targets_per_scene must be a nonempty range starting at >= 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub cluster_id: String,
    pub radius_class: RadiusClass,
    pub radius_km: f64,
    pub central: SatelliteState,
    pub secondaries: Vec<SatelliteState>,
    pub targets: Vec<TargetObject>,
}

impl Cluster {
    pub fn satellites(&self) -> impl Iterator<Item = &SatelliteState> {
        std::iter::once(&self.central).chain(self.secondaries.iter())
    }

    pub fn k(&self) -> usize {
        1 + self.secondaries.len()
    }
}

/// One generated scene: cluster geometry, its k observations, and the
/// distance-based selection outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterScene {
    pub class: RadiusClass,
    pub cluster: Cluster,
    pub observations: Vec<Observation>,
    pub selection: SelectionResult,
}

/// Full generation configuration for a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetConfig {
    pub master_seed: u64,
    pub scenes_per_class: usize,
    pub k: usize,
    pub nearest_target_range_km: (f64, f64),
    pub targets_per_scene: (u32, u32),
    pub altitude_range_km: (f64, f64),
    pub max_target_range_km: f64,
    pub bounding_radius_m: f64,
    pub radius_close_km: f64,
    pub radius_mid_km: f64,
    pub radius_far_km: f64,
    pub camera: CameraConfig,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            master_seed: 42,
            scenes_per_class: 20,
            k: 3,
            nearest_target_range_km: (0.5, 2.0),
            targets_per_scene: (1, 5),
            altitude_range_km: (500.0, 600.0),
            max_target_range_km: 10.0,
            bounding_radius_m: 5.0,
            radius_close_km: 0.5,
            radius_mid_km: 1.0,
            radius_far_km: 2.0,
            camera: CameraConfig::default(),
        }
    }
}

impl DatasetConfig {
    pub fn radius_km(&self, class: RadiusClass) -> f64 {
        match class {
            RadiusClass::Close => self.radius_close_km,
            RadiusClass::Mid => self.radius_mid_km,
            RadiusClass::Far => self.radius_far_km,
        }
    }

    pub fn cluster_config(&self, class: RadiusClass) -> ClusterConfig {
        ClusterConfig {
            radius_km: self.radius_km(class),
            k: self.k,
            nearest_target_range_km: self.nearest_target_range_km,
            targets_per_scene: self.targets_per_scene,
            altitude_range_km: self.altitude_range_km,
            max_target_range_km: self.max_target_range_km,
            bounding_radius_m: self.bounding_radius_m,
            master_seed: self.master_seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub config: DatasetConfig,
    pub scenes: Vec<ClusterScene>,
}

impl Dataset {
    pub fn observations(&self) -> impl Iterator<Item = &Observation> {
        self.scenes.iter().flat_map(|s| s.observations.iter())
    }

    pub fn observation(&self, image_id: &str) -> Option<&Observation> {
        self.observations().find(|o| o.image_id == image_id)
    }
}

/// Uniform direction on the unit sphere via normalized Gaussians.
pub fn sample_unit_direction<R: Rng>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.normalized() {
            return u;
        }
    }
}

/// Uniform sample from the solid ball: Gaussian direction scaled by
/// r · u^(1/3). A fixed draw count per sample keeps streams reproducible.
pub fn sample_uniform_ball<R: Rng>(center: &EciPosition, radius_km: f64, rng: &mut R) -> EciPosition {
    let dir = sample_unit_direction(rng);
    let radius = radius_km * rng.gen::<f64>().cbrt();
    EciPosition::from_vec3(center.as_vec3().add(dir.scale(radius)))
}

/// Uniform direction within a cone of `half_angle_rad` around `axis`.
fn sample_cone_direction<R: Rng>(axis: Vec3, half_angle_rad: f64, rng: &mut R) -> Vec3 {
    let cos_min = half_angle_rad.cos();
    let cos_theta = cos_min + (1.0 - cos_min) * rng.gen::<f64>();
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let phi = rng.gen::<f64>() * std::f64::consts::TAU;

    // Orthonormal frame around the axis.
    let ortho = if axis.dot(Vec3::Z).abs() < 0.9 {
        Vec3::Z
    } else {
        Vec3::X
    };
    let u = axis.cross(ortho).normalized().expect("axis frame");
    let v = axis.cross(u);
    axis.scale(cos_theta)
        .add(u.scale(sin_theta * phi.cos()))
        .add(v.scale(sin_theta * phi.sin()))
}

fn satellite_state(sat_id: String, elements: OrbitalElements) -> SatelliteState {
    let position = orbit_position(&elements);
    let geodetic = eci_to_geodetic(&position).expect("orbital position is never at the origin");
    SatelliteState {
        sat_id,
        position,
        elements,
        geodetic,
    }
}

fn satellite_state_at(sat_id: String, position: EciPosition) -> Result<SatelliteState> {
    let elements = elements_for_position(&position)?;
    let geodetic = eci_to_geodetic(&position)?;
    Ok(SatelliteState {
        sat_id,
        position,
        elements,
        geodetic,
    })
}

fn target_at(object_id: String, position: EciPosition, bounding_radius_m: f64) -> Result<TargetObject> {
    let elements = elements_for_position(&position)?;
    let geodetic = eci_to_geodetic(&position)?;
    Ok(TargetObject {
        object_id,
        position,
        bounding_radius_m,
        geodetic,
        elements,
    })
}

/// Generate one cluster scene. Resamples (up to a cap) until every satellite
/// sees at least one target.
pub fn generate_cluster<R: Rng>(
    cfg: &ClusterConfig,
    camera_cfg: &CameraConfig,
    class: RadiusClass,
    cluster_id: &str,
    rng: &mut R,
) -> Result<ClusterScene> {
    cfg.validate()?;
    for _ in 0..RESAMPLE_CAP {
        if let Some(scene) = try_generate_cluster(cfg, camera_cfg, class, cluster_id, rng)? {
            return Ok(scene);
        }
    }
    Err(ScsError::UnsatisfiableClusterConfig {
        cluster_id: cluster_id.to_string(),
        attempts: RESAMPLE_CAP,
    })
}

fn try_generate_cluster<R: Rng>(
    cfg: &ClusterConfig,
    camera_cfg: &CameraConfig,
    class: RadiusClass,
    cluster_id: &str,
    rng: &mut R,
) -> Result<Option<ClusterScene>> {
    let elements = OrbitalElements::new(
        rng.gen_range(cfg.altitude_range_km.0..cfg.altitude_range_km.1),
        rng.gen_range(0.0..180.0),
        rng.gen_range(0.0..360.0),
        rng.gen_range(0.0..360.0),
    );
    let central = satellite_state(format!("{cluster_id}_sat1"), elements);

    // Nearest target: uniform distance in range, along a random direction.
    let (lo, hi) = cfg.nearest_target_range_km;
    let nearest_dist = rng.gen_range(lo..hi);
    let nearest_dir = sample_unit_direction(rng);
    let mut targets = vec![target_at(
        format!("{cluster_id}_obj0"),
        EciPosition::from_vec3(central.position.as_vec3().add(nearest_dir.scale(nearest_dist))),
        cfg.bounding_radius_m,
    )?];

    // Remaining targets: farther than the nearest, inside the frustum cone of
    // the central camera so the extra objects plausibly share the scene.
    let n_targets = rng.gen_range(cfg.targets_per_scene.0..=cfg.targets_per_scene.1) as usize;
    let half_angle = camera_cfg.fov_deg.to_radians() / 2.0;
    for t in 1..n_targets {
        let dist = rng.gen_range(nearest_dist..cfg.max_target_range_km);
        let dir = sample_cone_direction(nearest_dir, half_angle, rng);
        targets.push(target_at(
            format!("{cluster_id}_obj{t}"),
            EciPosition::from_vec3(central.position.as_vec3().add(dir.scale(dist))),
            cfg.bounding_radius_m,
        )?);
    }

    let mut secondaries = Vec::with_capacity(cfg.k - 1);
    for j in 2..=cfg.k {
        let pos = sample_uniform_ball(&central.position, cfg.radius_km, rng);
        secondaries.push(satellite_state_at(format!("{cluster_id}_sat{j}"), pos)?);
    }

    let cluster = Cluster {
        cluster_id: cluster_id.to_string(),
        radius_class: class,
        radius_km: cfg.radius_km,
        central,
        secondaries,
        targets,
    };

    // Central camera looks at its nearest target; secondaries copy the
    // orientation ("identical viewing angles").
    let central_pose = camera::orient_camera(&cluster.central, &cluster.targets, camera_cfg)?;
    let mut observations = Vec::with_capacity(cluster.k());
    for (j, sat) in cluster.satellites().enumerate() {
        let viewpoint = j + 1;
        let pose = if viewpoint == 1 {
            central_pose
        } else {
            camera::pose_at(sat.position, &central_pose)
        };
        let obs = camera::render_observation(
            format!("{cluster_id}_v{viewpoint}"),
            sat,
            viewpoint,
            cluster_id,
            &cluster.targets,
            pose,
            camera_cfg,
        )?;
        if obs.entries.is_empty() {
            return Ok(None); // membership condition violated: resample
        }
        observations.push(obs);
    }

    let selection = select::select_viewpoint(&cluster.cluster_id, &observations)?;
    Ok(Some(ClusterScene {
        class,
        cluster,
        observations,
        selection,
    }))
}

/// Generate the full dataset: `scenes_per_class` clusters per radius class.
/// Cluster RNG streams are independent, so generation parallelizes without
/// changing the output.
pub fn generate_dataset(config: &DatasetConfig) -> Result<Dataset> {
    if config.scenes_per_class < 1 {
        return Err(ScsError::InvalidConfig("scenes_per_class must be >= 1".into()));
    }
    let jobs: Vec<(RadiusClass, usize)> = RadiusClass::ALL
        .iter()
        .flat_map(|&class| (0..config.scenes_per_class).map(move |s| (class, s)))
        .collect();
    let scenes: Vec<Result<ClusterScene>> = par::map_indexed(jobs.len(), |i| {
        let (class, scene_idx) = jobs[i];
        let cluster_id = format!("{}_s{:04}", class.label(), scene_idx);
        let mut stream = rng::stream(config.master_seed, &format!("cluster/{cluster_id}"));
        generate_cluster(
            &config.cluster_config(class),
            &config.camera,
            class,
            &cluster_id,
            &mut stream,
        )
    });
    let scenes = scenes.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        config: config.clone(),
        scenes,
    })
}

/// Per-(viewpoint, class) mean distances, Table-style.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    /// `None` marks the Overall row.
    pub class: Option<RadiusClass>,
    /// Mean distance (km) for fixed viewpoints V(1)..V(k).
    pub fixed_km: Vec<f64>,
    /// Mean distance (km) for the distance-selected viewpoint.
    pub vd_km: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    pub k: usize,
    pub rows: Vec<DistanceRow>,
}

impl DistanceTable {
    pub fn row(&self, class: Option<RadiusClass>) -> Option<&DistanceRow> {
        self.rows.iter().find(|r| r.class == class)
    }
}

/// Mean distance per image, averaged within each (viewpoint, class) cell.
/// The Vd column averages the per-cluster selected viewpoint's image.
pub fn distance_stats(dataset: &Dataset) -> Result<DistanceTable> {
    if dataset.scenes.is_empty() {
        return Err(ScsError::InvalidConfig("empty dataset".into()));
    }
    let k = dataset.config.k;
    let mut rows = Vec::new();
    for class in RadiusClass::ALL.iter().map(|c| Some(*c)).chain([None]) {
        let scenes: Vec<&ClusterScene> = dataset
            .scenes
            .iter()
            .filter(|s| class.is_none() || class == Some(s.class))
            .collect();
        let mut fixed_km = Vec::with_capacity(k);
        for j in 1..=k {
            let mut sum = 0.0;
            let mut n = 0usize;
            for scene in &scenes {
                let obs = &scene.observations[j - 1];
                if !obs.entries.is_empty() {
                    sum += select::mean_visible_distance(obs)?;
                    n += 1;
                }
            }
            fixed_km.push(sum / n as f64);
        }
        let mut vd_sum = 0.0;
        for scene in &scenes {
            vd_sum += scene.selection.chosen_mean_km();
        }
        rows.push(DistanceRow {
            class,
            fixed_km,
            vd_km: vd_sum / scenes.len() as f64,
        });
    }
    Ok(DistanceTable { k, rows })
}

/// True iff every row has Vd ≤ min over the fixed viewpoints.
pub fn check_vd_dominance(table: &DistanceTable) -> bool {
    table.rows.iter().all(|row| {
        row.fixed_km
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v))
            >= row.vd_km
    })
}
