//! `scs` — generate, select, detect, fuse, evaluate, and report on
//! clustered-satellite object detection scenarios.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use scs_sim::cluster::{self, Dataset};
use scs_sim::detect::{self, DetectionSet};
use scs_sim::fusion::{self, CommStrategy};
use scs_sim::io::{self, SimConfig};
use scs_sim::{eval, select, stats};

#[derive(Parser)]
#[command(name = "scs", about = "Collaborative satellite object detection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and export it to a directory.
    Gen {
        /// JSON config file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write solid-black placeholder PNGs for tooling that expects
        /// image files.
        #[arg(long)]
        stub_images: bool,
    },
    /// Re-run viewpoint selection on an exported dataset and write
    /// selection.json (results plus protocol byte counts).
    Select {
        #[arg(long)]
        data: PathBuf,
    },
    /// Run the synthetic detector over a dataset and write one detection
    /// file per image.
    Detect {
        #[arg(long)]
        data: PathBuf,
        /// Detector model JSON file, or "default".
        #[arg(long, default_value = "default")]
        model: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score detections against the dataset; writes <out>.txt and <out>.json.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
        #[arg(long, default_value = "ingested")]
        model_tag: String,
    },
    /// Fuse per-view detections per cluster and write the fused sets.
    Fuse {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, value_enum)]
        mode: FuseMode,
        /// Output directory; defaults to <detections>-fused-<mode>.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance table, map CSV, comm-cost and geometry statistics.
    Report {
        #[arg(long)]
        data: PathBuf,
        /// Directory for report files; defaults to the dataset directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FuseMode {
    Merge,
    Vote,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    match path {
        None => Ok(SimConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))
        }
    }
}

fn load_dataset(dir: &Path) -> Result<Dataset> {
    io::import_dataset(dir).with_context(|| format!("importing dataset from {}", dir.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn load_detections(
    dir: &Path,
    dataset: &Dataset,
) -> Result<BTreeMap<String, DetectionSet>> {
    let known: Vec<String> = dataset.observations().map(|o| o.image_id.clone()).collect();
    let (sets, unknown) = detect::ingest_detections(dir, &known)?;
    if !unknown.is_empty() {
        eprintln!("warning: detections for unknown images: {unknown:?}");
    }
    Ok(sets)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            config,
            out,
            stub_images,
        } => {
            let config = load_config(config.as_deref())?;
            let dataset = cluster::generate_dataset(&config.dataset)?;
            let manifest = io::export_dataset(&dataset, &out)?;
            if stub_images {
                write_stub_images(&dataset, &out)?;
            }
            println!(
                "generated {} images across {} clusters into {}",
                manifest.images.len(),
                dataset.scenes.len(),
                out.display()
            );
            Ok(())
        }
        Command::Select { data } => {
            let dataset = load_dataset(&data)?;
            let mut records = Vec::new();
            for scene in &dataset.scenes {
                let (messages, result, total_bytes) =
                    select::protocol_round(&scene.cluster.cluster_id, &scene.observations)?;
                records.push(serde_json::json!({
                    "cluster_id": result.cluster_id,
                    "chosen_index": result.chosen_index,
                    "chosen_sat_id": result.chosen_sat_id,
                    "per_satellite": result.per_satellite,
                    "messages": messages,
                    "total_bytes": total_bytes,
                }));
            }
            let path = data.join("selection.json");
            write_json(&path, &records)?;
            println!("wrote {} selection records to {}", records.len(), path.display());
            Ok(())
        }
        Command::Detect { data, model, out } => {
            let dataset = load_dataset(&data)?;
            let model = if model == "default" {
                detect::DetectorModel::default()
            } else {
                let text = fs::read_to_string(&model).with_context(|| format!("reading {model}"))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {model}"))?
            };
            let sets = detect::synth_detect_all(&model, &dataset);
            detect::write_detection_sets(&out, sets.values())?;
            println!("wrote {} detection files to {}", sets.len(), out.display());
            Ok(())
        }
        Command::Eval {
            data,
            detections,
            out,
            model_tag,
        } => {
            let dataset = load_dataset(&data)?;
            let sets = load_detections(&detections, &dataset)?;
            let digest = io::config_digest(&dataset.config);
            let report = eval::evaluate(&dataset, &sets, &model_tag, &digest)?;
            let txt_path = out.with_extension("txt");
            let json_path = out.with_extension("json");
            fs::write(&txt_path, report.render_text())
                .with_context(|| format!("writing {}", txt_path.display()))?;
            write_json(&json_path, &report)?;
            print!("{}", report.render_text());
            Ok(())
        }
        Command::Fuse {
            data,
            detections,
            mode,
            out,
        } => {
            let dataset = load_dataset(&data)?;
            let sets = load_detections(&detections, &dataset)?;
            let cfg = SimConfig::default().fusion;
            let out = out.unwrap_or_else(|| {
                let suffix = match mode {
                    FuseMode::Merge => "fused-merge",
                    FuseMode::Vote => "fused-vote",
                };
                detections.with_file_name(format!(
                    "{}-{suffix}",
                    detections.file_name().unwrap_or_default().to_string_lossy()
                ))
            });
            let mut fused = Vec::new();
            for scene in &dataset.scenes {
                let views: Vec<&DetectionSet> = scene
                    .observations
                    .iter()
                    .filter_map(|o| sets.get(&o.image_id))
                    .collect();
                // The fused set stands in for the cluster's single output and
                // is scored against the selected viewpoint's image.
                let target_image =
                    &scene.observations[scene.selection.chosen_index - 1].image_id;
                fused.push(match mode {
                    FuseMode::Merge => fusion::fuse_merge(&views, &cfg, target_image),
                    FuseMode::Vote => fusion::fuse_vote(&views, &cfg, target_image),
                });
            }
            detect::write_detection_sets(&out, fused.iter())?;
            println!("wrote {} fused detection files to {}", fused.len(), out.display());

            // Fused sets replace the chosen viewpoint's detections, so score
            // them against the Vd partition.
            let fused_by_image: BTreeMap<String, DetectionSet> = fused
                .into_iter()
                .map(|s| (s.image_id.clone(), s))
                .collect();
            let vd = select::distance_selected(&dataset);
            let scores = eval::evaluate_images(&dataset, &fused_by_image, &vd)?;
            for (class, cell) in &scores {
                println!(
                    "fused {class}: mAP50 {:.3}  mAP50:95 {:.3}  ({} images)",
                    cell.map50, cell.map50_95, cell.image_count
                );
            }
            write_json(&out.join("fused-scores.json"), &scores)?;
            Ok(())
        }
        Command::Report { data, out } => {
            let dataset = load_dataset(&data)?;
            let out = out.unwrap_or_else(|| data.clone());
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;

            let table = cluster::distance_stats(&dataset)?;
            let dominance = cluster::check_vd_dominance(&table);
            let map_csv = io::map_points_csv(&io::export_map_points(&dataset));
            let comm = SimConfig::default().comm;
            let k = dataset.config.k;
            let costs = vec![
                fusion::comm_cost(
                    CommStrategy::Selection,
                    k,
                    comm.image_bytes,
                    comm.message_bytes,
                    comm.link_gbps,
                ),
                fusion::comm_cost(
                    CommStrategy::EarlyFusion,
                    k,
                    comm.image_bytes,
                    comm.message_bytes,
                    comm.link_gbps,
                ),
            ];
            let cap = stats::cap_asymmetry(2.0, 0.5, 1_000_000, dataset.config.master_seed)?;
            let pairwise = stats::pairwise_stats(&dataset)?;

            let report = serde_json::json!({
                "distance_table": table,
                "vd_dominance": dominance,
                "comm_cost": costs,
                "cap_asymmetry": cap,
                "pairwise_stats": pairwise,
            });
            write_json(&out.join("report.json"), &report)?;
            fs::write(out.join("map.csv"), &map_csv)
                .with_context(|| format!("writing {}", out.join("map.csv").display()))?;

            println!("distance table (km), Vd dominance: {dominance}");
            print!("{}", render_distance_table(&table));
            for cost in &costs {
                println!(
                    "{:?}: {} B/cluster, {:.5} ms at {} Gbps (budget {:.1} ms, within: {})",
                    cost.strategy,
                    cost.bytes_per_cluster,
                    cost.transfer_ms,
                    cost.link_gbps,
                    cost.budget_ms,
                    cost.within_budget
                );
            }
            Ok(())
        }
    }
}

fn render_distance_table(table: &cluster::DistanceTable) -> String {
    let mut out = format!("{:<10}", "Cluster");
    for j in 1..=table.k {
        out.push_str(&format!("{:>8}", format!("V({j})")));
    }
    out.push_str(&format!("{:>8}\n", "Vd"));
    for row in &table.rows {
        let label = row.class.map_or("Overall", |c| c.label());
        out.push_str(&format!("{label:<10}"));
        for v in &row.fixed_km {
            out.push_str(&format!("{v:>8.3}"));
        }
        out.push_str(&format!("{:>8.3}\n", row.vd_km));
    }
    out
}

/// Minimal solid-black PNG per image id. Hand-rolled encoder for a single
/// grayscale zero image to avoid an image-crate dependency.
fn write_stub_images(dataset: &Dataset, dir: &Path) -> Result<()> {
    for scene in &dataset.scenes {
        for obs in &scene.observations {
            let path = dir
                .join(scene.class.label())
                .join(&scene.cluster.cluster_id)
                .join(format!("v{}.png", obs.viewpoint_index));
            let png = black_png(obs.pose.width_px, obs.pose.height_px);
            fs::write(&path, png).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

fn black_png(width: u32, height: u32) -> Vec<u8> {
    fn crc32(data: &[u8]) -> u32 {
        let mut crc = 0xffff_ffffu32;
        for &b in data {
            crc ^= b as u32;
            for _ in 0..8 {
                crc = if crc & 1 != 0 {
                    (crc >> 1) ^ 0xedb8_8320
                } else {
                    crc >> 1
                };
            }
        }
        !crc
    }
    fn chunk(out: &mut Vec<u8>, tag: &[u8; 4], payload: &[u8]) {
        out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
        let mut body = tag.to_vec();
        body.extend_from_slice(payload);
        out.extend_from_slice(&body);
        out.extend_from_slice(&crc32(&body).to_be_bytes());
    }
    fn adler32(data: &[u8]) -> u32 {
        let (mut a, mut b) = (1u32, 0u32);
        for &byte in data {
            a = (a + byte as u32) % 65521;
            b = (b + a) % 65521;
        }
        (b << 16) | a
    }

    // Raw scanlines: filter byte 0 + zero pixels, wrapped in stored-mode zlib.
    let raw: Vec<u8> = vec![0u8; (height as usize) * (width as usize + 1)];
    let mut zlib = vec![0x78, 0x01];
    for (i, block) in raw.chunks(65535).enumerate() {
        let last = (i + 1) * 65535 >= raw.len();
        zlib.push(u8::from(last));
        zlib.extend_from_slice(&(block.len() as u16).to_le_bytes());
        zlib.extend_from_slice(&(!(block.len() as u16)).to_le_bytes());
        zlib.extend_from_slice(block);
    }
    zlib.extend_from_slice(&adler32(&raw).to_be_bytes());

    let mut ihdr = Vec::new();
    ihdr.extend_from_slice(&width.to_be_bytes());
    ihdr.extend_from_slice(&height.to_be_bytes());
    ihdr.extend_from_slice(&[8, 0, 0, 0, 0]); // 8-bit grayscale

    let mut png = vec![0x89, b'P', b'N', b'G', 0x0d, 0x0a, 0x1a, 0x0a];
    chunk(&mut png, b"IHDR", &ihdr);
    chunk(&mut png, b"IDAT", &zlib);
    chunk(&mut png, b"IEND", &[]);
    png
}
