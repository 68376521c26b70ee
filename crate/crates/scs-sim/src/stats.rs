//! Statistical verification of the geometric claims behind the cluster
//! design: spherical-cap asymmetry and pairwise-distance distributions.

use serde::{Deserialize, Serialize};

use crate::cluster::{sample_uniform_ball, Dataset, RadiusClass};
use crate::error::{Result, ScsError};
use crate::orbital::EciPosition;
use crate::{par, rng};

const MC_BATCH: u64 = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapAsymmetryResult {
    pub d_km: f64,
    pub r_km: f64,
    pub analytic_fraction: f64,
    pub empirical_fraction: f64,
    pub samples: u64,
}

/// Analytic probability that a point uniform in a ball of radius `r`
/// centered at distance `D` from an object is closer to the object than the
/// ball's center.
///
/// This is the lens-volume fraction of the ball cut off by the sphere of
/// radius `D` about the object; for two spheres of radii r and D with
/// centers D apart it reduces to 1/2 − 3r/(16D), strictly below one half
/// for every 0 < r < D.
pub fn cap_closer_fraction(d_km: f64, r_km: f64) -> Result<f64> {
    if !(r_km > 0.0 && r_km < d_km) {
        return Err(ScsError::CapRadiusTooLarge {
            r_km,
            d_km,
        });
    }
    Ok(0.5 - 3.0 * r_km / (16.0 * d_km))
}

/// Monte Carlo check of [`cap_closer_fraction`] using the same ball sampler
/// the cluster generator uses. Batched with per-batch streams, so the result
/// is identical under parallel and sequential execution.
pub fn cap_asymmetry(d_km: f64, r_km: f64, samples: u64, seed: u64) -> Result<CapAsymmetryResult> {
    let analytic_fraction = cap_closer_fraction(d_km, r_km)?;
    let center = EciPosition::new(0.0, 0.0, 0.0);
    let object = EciPosition::new(d_km, 0.0, 0.0);

    let n_batches = samples.div_ceil(MC_BATCH);
    let counts = par::map_indexed(n_batches as usize, |b| {
        let mut stream = rng::indexed_stream(seed, "cap_asymmetry", b as u64);
        let batch = MC_BATCH.min(samples - b as u64 * MC_BATCH);
        let mut closer = 0u64;
        for _ in 0..batch {
            let p = sample_uniform_ball(&center, r_km, &mut stream);
            if p.distance_km(&object) < d_km {
                closer += 1;
            }
        }
        closer
    });
    let closer: u64 = counts.iter().sum();
    Ok(CapAsymmetryResult {
        d_km,
        r_km,
        analytic_fraction,
        empirical_fraction: closer as f64 / samples as f64,
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct DistanceSummary {
    pub min_km: f64,
    pub mean_km: f64,
    pub max_km: f64,
}

fn summarize(values: &[f64]) -> DistanceSummary {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
        sum += v;
    }
    DistanceSummary {
        min_km: min,
        mean_km: sum / values.len() as f64,
        max_km: max,
    }
}

/// Pairwise satellite distance summaries for one cluster class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPairwise {
    pub class: RadiusClass,
    pub radius_km: f64,
    pub s1_s2: DistanceSummary,
    pub s1_s3: DistanceSummary,
    pub s2_s3: DistanceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseStats {
    pub per_class: Vec<ClassPairwise>,
}

/// Distributions of ||s1−s2||, ||s1−s3||, ||s2−s3|| per class. Requires
/// k ≥ 3 (the pairings are defined over the first three satellites).
pub fn pairwise_stats(dataset: &Dataset) -> Result<PairwiseStats> {
    if dataset.config.k < 3 {
        return Err(ScsError::InvalidConfig(
            "pairwise stats require k >= 3".into(),
        ));
    }
    let mut per_class = Vec::new();
    for class in RadiusClass::ALL {
        let mut d12 = Vec::new();
        let mut d13 = Vec::new();
        let mut d23 = Vec::new();
        for scene in dataset.scenes.iter().filter(|s| s.class == class) {
            let c = &scene.cluster;
            d12.push(c.central.position.distance_km(&c.secondaries[0].position));
            d13.push(c.central.position.distance_km(&c.secondaries[1].position));
            d23.push(
                c.secondaries[0]
                    .position
                    .distance_km(&c.secondaries[1].position),
            );
        }
        if d12.is_empty() {
            continue;
        }
        per_class.push(ClassPairwise {
            class,
            radius_km: dataset.config.radius_km(class),
            s1_s2: summarize(&d12),
            s1_s3: summarize(&d13),
            s2_s3: summarize(&d23),
        });
    }
    Ok(PairwiseStats { per_class })
}
