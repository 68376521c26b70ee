//! Synthetic detector and ingestion of external detection files.
//!
//! The synthetic detector stands in for a trained model: each ground-truth
//! box is detected with a probability that grows with its apparent pixel
//! area, so the 1/d² geometry drives detectability exactly as it would for a
//! real small-object detector. Externally produced detections can be
//! ingested from YOLO-style text files for re-scoring.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::camera::Observation;
use crate::cluster::Dataset;
use crate::error::{Result, ScsError};
use crate::{par, rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionBox {
    pub class_id: u32,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub confidence: f64,
}

/// Parametric detector model. Defaults are calibration knobs chosen so
/// dataset-scale mAP50 lands in a plausible band for small-object detection;
/// they are not measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Peak recall for arbitrarily large targets.
    pub p_max: f64,
    /// Apparent area (px²) at which detection probability halves.
    pub area_half_px2: f64,
    /// Logistic steepness in px².
    pub area_slope: f64,
    /// Gaussian center jitter, relative to box size.
    pub center_jitter_frac: f64,
    /// Gaussian size jitter, relative to box size.
    pub size_jitter_frac: f64,
    /// Poisson mean of false positives per image.
    pub fp_rate_per_image: f64,
    pub conf_noise_sigma: f64,
    pub seed: u64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        DetectorModel {
            p_max: 0.95,
            area_half_px2: 6.0,
            area_slope: 2.5,
            center_jitter_frac: 0.08,
            size_jitter_frac: 0.12,
            fp_rate_per_image: 0.05,
            conf_noise_sigma: 0.04,
            seed: 7,
        }
    }
}

impl DetectorModel {
    /// Detection probability for an apparent area in px²; monotone
    /// non-decreasing in area.
    pub fn detect_probability(&self, area_px2: f64) -> f64 {
        let s = 1.0 / (1.0 + (-(area_px2 - self.area_half_px2) / self.area_slope).exp());
        self.p_max * s
    }

    /// The noiseless limit copies ground truth exactly.
    pub fn is_noiseless(&self) -> bool {
        self.p_max >= 1.0
            && self.center_jitter_frac == 0.0
            && self.size_jitter_frac == 0.0
            && self.fp_rate_per_image == 0.0
            && self.conf_noise_sigma == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionSource {
    Synthetic,
    Ingested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionSet {
    pub image_id: String,
    pub boxes: Vec<DetectionBox>,
    pub source: DetectionSource,
    pub model_tag: String,
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Run the synthetic detector on one observation. Deterministic per
/// (model seed, image id), independent of evaluation order.
pub fn synth_detect(model: &DetectorModel, obs: &Observation) -> DetectionSet {
    // Noiseless limit: every ground-truth box reproduced exactly, confidence
    // 1, no RNG involved.
    if model.is_noiseless() {
        return DetectionSet {
            image_id: obs.image_id.clone(),
            boxes: obs
                .entries
                .iter()
                .map(|e| DetectionBox {
                    class_id: e.gt_box.class_id,
                    cx: e.gt_box.cx,
                    cy: e.gt_box.cy,
                    w: e.gt_box.w,
                    h: e.gt_box.h,
                    confidence: 1.0,
                })
                .collect(),
            source: DetectionSource::Synthetic,
            model_tag: "synthetic".to_string(),
        };
    }
    let mut stream = rng::stream(model.seed, &format!("detect/{}", obs.image_id));
    let mut boxes = Vec::new();
    let width = obs.pose.width_px as f64;
    let height = obs.pose.height_px as f64;

    for entry in &obs.entries {
        let gt = &entry.gt_box;
        let area_px2 = gt.w * width * gt.h * height;
        let p = model.detect_probability(area_px2);
        // Fixed draw count per entry keeps the stream aligned regardless of
        // which entries are detected.
        let roll: f64 = stream.gen();
        let jx: f64 = sample_normal(&mut stream);
        let jy: f64 = sample_normal(&mut stream);
        let jw: f64 = sample_normal(&mut stream);
        let jh: f64 = sample_normal(&mut stream);
        let jc: f64 = sample_normal(&mut stream);
        if roll >= p {
            continue;
        }
        let w = (gt.w * (1.0 + model.size_jitter_frac * jw)).max(1e-6);
        let h = (gt.h * (1.0 + model.size_jitter_frac * jh)).max(1e-6);
        boxes.push(DetectionBox {
            class_id: gt.class_id,
            cx: clamp01(gt.cx + model.center_jitter_frac * gt.w * jx),
            cy: clamp01(gt.cy + model.center_jitter_frac * gt.h * jy),
            w: w.min(1.0),
            h: h.min(1.0),
            confidence: clamp01(p + model.conf_noise_sigma * jc),
        });
    }

    if model.fp_rate_per_image > 0.0 {
        let poisson = Poisson::new(model.fp_rate_per_image).expect("positive rate");
        let n_fp = poisson.sample(&mut stream) as usize;
        for _ in 0..n_fp {
            // Small spurious boxes anywhere in the image, low-to-mid confidence.
            boxes.push(DetectionBox {
                class_id: 0,
                cx: stream.gen(),
                cy: stream.gen(),
                w: stream.gen_range(0.005..0.05),
                h: stream.gen_range(0.005..0.05),
                confidence: stream.gen_range(0.05..0.6),
            });
        }
    }

    DetectionSet {
        image_id: obs.image_id.clone(),
        boxes,
        source: DetectionSource::Synthetic,
        model_tag: "synthetic".to_string(),
    }
}

fn sample_normal<R: Rng>(rng: &mut R) -> f64 {
    Normal::new(0.0, 1.0).expect("unit normal").sample(rng)
}

/// Detect over the whole dataset; parallel per image with independent
/// streams, keyed by image id.
pub fn synth_detect_all(model: &DetectorModel, dataset: &Dataset) -> BTreeMap<String, DetectionSet> {
    let observations: Vec<&Observation> = dataset.observations().collect();
    let sets = par::map_indexed(observations.len(), |i| synth_detect(model, observations[i]));
    sets.into_iter().map(|s| (s.image_id.clone(), s)).collect()
}

/// Parse one detection file in the `class cx cy w h confidence` format.
pub fn parse_detection_file(path: &Path, image_id: &str) -> Result<DetectionSet> {
    let text = fs::read_to_string(path).map_err(|e| ScsError::io(path, e))?;
    let mut boxes = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 6 {
            return Err(ScsError::MalformedDetection {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("expected 6 fields, found {}", fields.len()),
            });
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            s.parse().map_err(|_| ScsError::MalformedDetection {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("invalid {what}: {s:?}"),
            })
        };
        let class_id: u32 = fields[0].parse().map_err(|_| ScsError::MalformedDetection {
            path: path.to_path_buf(),
            line: lineno + 1,
            reason: format!("invalid class id: {:?}", fields[0]),
        })?;
        let confidence = parse(fields[5], "confidence")?;
        if !(0.0..=1.0).contains(&confidence) {
            return Err(ScsError::MalformedDetection {
                path: path.to_path_buf(),
                line: lineno + 1,
                reason: format!("confidence {confidence} outside [0, 1]"),
            });
        }
        boxes.push(DetectionBox {
            class_id,
            cx: parse(fields[1], "cx")?,
            cy: parse(fields[2], "cy")?,
            w: parse(fields[3], "w")?,
            h: parse(fields[4], "h")?,
            confidence,
        });
    }
    Ok(DetectionSet {
        image_id: image_id.to_string(),
        boxes,
        source: DetectionSource::Ingested,
        model_tag: "ingested".to_string(),
    })
}

/// Ingest a directory of `<image_id>.txt` detection files. Returns the sets
/// keyed by image id plus any ids not present in `known_images`.
pub fn ingest_detections(
    dir: &Path,
    known_images: &[String],
) -> Result<(BTreeMap<String, DetectionSet>, Vec<String>)> {
    let mut sets = BTreeMap::new();
    let mut unknown = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| ScsError::io(dir, e))?;
    let mut paths: Vec<_> = entries
        .collect::<std::io::Result<Vec<_>>>()
        .map_err(|e| ScsError::io(dir, e))?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    paths.sort();
    for path in paths {
        let image_id = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or_default()
            .to_string();
        let set = parse_detection_file(&path, &image_id)?;
        if !known_images.iter().any(|id| *id == image_id) {
            unknown.push(image_id.clone());
        }
        sets.insert(image_id, set);
    }
    Ok((sets, unknown))
}

/// Write detection sets in the same format `ingest_detections` reads.
/// Floats use the shortest exact representation, so write→ingest is identity.
pub fn write_detection_sets<'a>(
    dir: &Path,
    sets: impl Iterator<Item = &'a DetectionSet>,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| ScsError::io(dir, e))?;
    for set in sets {
        let path = dir.join(format!("{}.txt", set.image_id));
        let mut out = String::new();
        for b in &set.boxes {
            out.push_str(&format!(
                "{} {} {} {} {} {}\n",
                b.class_id, b.cx, b.cy, b.w, b.h, b.confidence
            ));
        }
        fs::write(&path, out).map_err(|e| ScsError::io(&path, e))?;
    }
    Ok(())
}
