use serde::{Deserialize, Serialize};

use crate::cluster::Dataset;

/// One cluster on the world map: central satellite's geodetic position and
/// the maximum pairwise angular spread of its satellites in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub cluster_id: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub spread_deg: f64,
}

/// One map point per cluster.
pub fn export_map_points(dataset: &Dataset) -> Vec<MapPoint> {
    dataset
        .scenes
        .iter()
        .map(|scene| {
            let sats: Vec<_> = scene.cluster.satellites().collect();
            let mut spread_deg: f64 = 0.0;
            for i in 0..sats.len() {
                for j in (i + 1)..sats.len() {
                    let a = sats[i].position.as_vec3();
                    let b = sats[j].position.as_vec3();
                    let cos = (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0);
                    spread_deg = spread_deg.max(cos.acos().to_degrees());
                }
            }
            MapPoint {
                cluster_id: scene.cluster.cluster_id.clone(),
                lat_deg: scene.cluster.central.geodetic.lat_deg,
                lon_deg: scene.cluster.central.geodetic.lon_deg,
                spread_deg,
            }
        })
        .collect()
}

/// CSV rendering with the fixed header `cluster_id,lat_deg,lon_deg,spread_deg`.
pub fn map_points_csv(points: &[MapPoint]) -> String {
    let mut out = String::from("cluster_id,lat_deg,lon_deg,spread_deg\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.cluster_id, p.lat_deg, p.lon_deg, p.spread_deg
        ));
    }
    out
}
