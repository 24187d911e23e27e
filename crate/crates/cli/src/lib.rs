//! The `fidmark` command line, usable in-process through [`run_args`].

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fidmark_core::detector::{Detector, DetectorParams, Variant};
use fidmark_core::eval::{self, BenchmarkMode, BenchmarkReport, PoseTrace, RateRow, Thresholds, TraceRecord};
use fidmark_core::geometry::CameraIntrinsics;
use fidmark_core::io::{self, SequenceManifest};
use fidmark_core::marker::{bit_string, codebook, render_marker_bitmap, MarkerSpec};
use fidmark_core::synth::{find_preset, render_sequence, MarkerLayout, RenderOptions, Scene, Trajectory};
use log::info;
use serde::{Deserialize, Serialize};

use config::{env_seed, overlay, ConfigFile};

/// Parses `args` (program name first) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run(Cli::try_parse_from(args)?)
}

#[derive(Parser)]
#[command(name = "fidmark", version, about = "Circular fiducial marker toolkit")]
pub struct Cli {
    /// JSON config; its values override command-line flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write marker PNGs and/or the canonical ID codebook.
    MarkerGen(MarkerGenArgs),
    /// Render a synthetic frame sequence with ground truth.
    Render(RenderArgs),
    /// Detect markers in a frame sequence and write a pose trace.
    Detect(DetectArgs),
    /// Classify discontinuities in traces and write report tables and plots.
    Evaluate(EvaluateArgs),
    /// Measure the detection rate on a frame sequence.
    Bench(BenchArgs),
}

#[derive(Args)]
struct MarkerGenArgs {
    /// Marker IDs to draw.
    #[arg(long = "id", num_args = 1..)]
    ids: Vec<u32>,
    #[arg(long, default_value_t = 8)]
    id_bits: u32,
    /// Bitmap side in pixels.
    #[arg(long, default_value_t = 512)]
    size: u32,
    /// Also write codebook.csv listing every canonical ID.
    #[arg(long)]
    codebook: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Layout {
    Single,
    Bundle,
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long, conflicts_with = "scene")]
    preset: Option<String>,
    /// Scene description (JSON) instead of a preset.
    #[arg(long)]
    scene: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Layout::Single)]
    layout: Layout,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

/// Scene file for `render --scene`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneFile {
    #[serde(default)]
    camera: Option<CameraIntrinsics>,
    scene: Scene,
    trajectory: Trajectory,
    #[serde(default)]
    noise_sigma: f64,
    #[serde(default)]
    blur_radius: f64,
    #[serde(default)]
    seed: u64,
}

#[derive(Args)]
struct DetectorFlags {
    #[arg(long, default_value = "orig")]
    variant: Variant,
    #[arg(long)]
    id_bits: Option<u32>,
    #[arg(long)]
    id_samples: Option<usize>,
    /// Outer marker diameter in meters; defaults to the sequence's markers.
    #[arg(long)]
    diameter: Option<f64>,
    /// IDs forming the bundle for the multi variant; defaults to the sequence's markers.
    #[arg(long, num_args = 1..)]
    bundle_ids: Vec<u32>,
}

#[derive(Args)]
struct DetectArgs {
    /// Directory with frames and manifest.json.
    #[arg(long)]
    frames: PathBuf,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Output trace (JSON Lines).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Trace files; the system is the parent directory name, the case the file stem.
    #[arg(required = true)]
    traces: Vec<PathBuf>,
    /// Benchmark reports to include in the rate tables.
    #[arg(long, num_args = 1..)]
    bench: Vec<PathBuf>,
    #[arg(long)]
    theta_a: Option<f64>,
    #[arg(long)]
    theta_l: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    frames: PathBuf,
    #[command(flatten)]
    detector: DetectorFlags,
    #[arg(long, default_value = "throughput")]
    mode: BenchmarkMode,
    /// System label; defaults to the variant name.
    #[arg(long)]
    system: Option<String>,
    /// Case label; defaults to the frames directory name.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

/// Benchmark output file.
#[derive(Serialize, Deserialize)]
struct BenchFile {
    system: String,
    case: String,
    report: BenchmarkReport,
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = ConfigFile::load(cli.config.as_deref())?;
    match cli.command {
        Command::MarkerGen(a) => marker_gen(a),
        Command::Render(a) => render(a, &cfg),
        Command::Detect(a) => detect(a, &cfg),
        Command::Evaluate(a) => evaluate(a, &cfg),
        Command::Bench(a) => bench(a, &cfg),
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn marker_gen(a: MarkerGenArgs) -> Result<()> {
    if a.ids.is_empty() && !a.codebook {
        bail!("nothing to do: pass --id and/or --codebook");
    }
    create_dir(&a.out)?;
    for &id in &a.ids {
        let spec = MarkerSpec::new(id, a.id_bits, 1.0)?;
        let path = a.out.join(format!("marker_{id}.png"));
        render_marker_bitmap(&spec, a.size)?.save(&path).with_context(|| format!("writing {}", path.display()))?;
        info!("wrote {}", path.display());
    }
    if a.codebook {
        let path = a.out.join("codebook.csv");
        let mut text = String::from("id,bits\n");
        for id in codebook(a.id_bits) {
            text.push_str(&format!("{id},{}\n", bit_string(id, a.id_bits)));
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn render(a: RenderArgs, cfg: &ConfigFile) -> Result<()> {
    let preset_name = cfg.preset.clone().or(a.preset);
    let (camera, scene, trajectory, mut opts, preset, representative) = match (preset_name, &a.scene) {
        (Some(name), _) => {
            let p = find_preset(&name)?;
            let layout = match a.layout {
                Layout::Single => MarkerLayout::Single,
                Layout::Bundle => MarkerLayout::Bundle,
            };
            let mut opts = p.render_options();
            if let Some(seed) = env_seed()? {
                opts.seed = seed;
            }
            let cam = fidmark_core::synth::presets::preset_camera();
            (cam, p.scene(layout), p.trajectory.clone(), opts, Some(p.name.clone()), p.representative)
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading scene {}", path.display()))?;
            let s: SceneFile = serde_json::from_str(&text).with_context(|| format!("parsing scene {}", path.display()))?;
            let opts =
                RenderOptions { noise_sigma: s.noise_sigma, blur_radius: s.blur_radius, seed: s.seed, ..Default::default() };
            let cam = s.camera.unwrap_or_else(fidmark_core::synth::presets::preset_camera);
            (cam, s.scene, s.trajectory, opts, None, false)
        }
        (None, None) => bail!("pass --preset or --scene"),
    };
    if let Some(seed) = cfg.seed.or(a.seed) {
        opts.seed = seed;
    }
    let seq = render_sequence(&scene, &trajectory, &camera, &opts)?;
    let manifest = SequenceManifest {
        camera,
        frame_rate: trajectory.frame_rate,
        seed: opts.seed,
        noise_sigma: opts.noise_sigma,
        blur_radius: opts.blur_radius,
        preset,
        representative,
        markers: scene.markers.iter().map(|m| m.spec.clone()).collect(),
        frames: Vec::new(),
    };
    let written = io::write_sequence(&a.out, &seq, manifest)?;
    info!("wrote {} frames to {}", written.frames.len(), a.out.display());
    Ok(())
}

/// Detector from flags, sequence defaults and config, in increasing priority.
fn build_detector(flags: &DetectorFlags, manifest: &SequenceManifest, cfg: &ConfigFile) -> Result<Detector> {
    let mut params = DetectorParams::default();
    if let Some(first) = manifest.markers.first() {
        if manifest.markers.iter().all(|m| m.diameter == first.diameter) {
            params.circle_diameter = first.diameter;
        }
        params.id_bits = first.id_bits;
    }
    let variant = cfg.variant.unwrap_or(flags.variant);
    if variant == Variant::Multi && manifest.markers.len() >= 3 {
        params.bundle_ids = manifest.markers.iter().map(|m| m.id).collect();
    }
    if let Some(v) = flags.id_bits {
        params.id_bits = v;
    }
    if let Some(v) = flags.id_samples {
        params.id_samples = v;
    }
    if let Some(v) = flags.diameter {
        params.circle_diameter = v;
    }
    if !flags.bundle_ids.is_empty() {
        params.bundle_ids = flags.bundle_ids.clone();
    }
    let params = overlay(params, cfg.detector.as_ref())?;
    Ok(Detector::new(manifest.camera, params, variant)?)
}

fn detect(a: DetectArgs, cfg: &ConfigFile) -> Result<()> {
    let manifest = io::read_manifest(&a.frames)?;
    let detector = build_detector(&a.detector, &manifest, cfg)?;
    let frames = io::load_frames(&a.frames, &manifest)?;
    let mut records = Vec::new();
    for (entry, img) in manifest.frames.iter().zip(&frames) {
        for det in detector.process(img, entry.index, entry.t) {
            records.extend(TraceRecord::from_detection(&det));
        }
    }
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    io::write_jsonl(&a.out, &records)?;
    info!("{} detections in {} frames", records.len(), frames.len());
    Ok(())
}

fn label(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

fn evaluate(a: EvaluateArgs, cfg: &ConfigFile) -> Result<()> {
    let mut th = Thresholds::default();
    if let Some(v) = a.theta_a {
        th.theta_a = v;
    }
    if let Some(v) = a.theta_l {
        th.theta_l = v;
    }
    let th = overlay(th, cfg.thresholds.as_ref())?;
    let mut traces = Vec::with_capacity(a.traces.len());
    for path in &a.traces {
        let system = path
            .parent()
            .and_then(|p| p.file_name())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "default".into());
        let case = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| label(path));
        let mut records: Vec<TraceRecord> = io::read_jsonl(path)?;
        records.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.id.cmp(&y.id)));
        traces.push(PoseTrace::new(system, case, records));
    }
    let mut rates = Vec::with_capacity(a.bench.len());
    for path in &a.bench {
        let b: BenchFile = io::read_json(path)?;
        rates.push(RateRow { system: b.system, case: b.case, len_s: b.report.t, n: b.report.n, f: b.report.f });
    }
    let report = eval::evaluate(&traces, rates, &th)?;
    let written = eval::emit_report(&report, &traces, &a.out)?;
    for agg in &report.aggregates {
        let std = agg.std.map(|s| format!("{s:.4}")).unwrap_or_else(|| "-".into());
        println!("{:<12} {:<4} cases={:<3} mean={:.4} std={std}", agg.system, agg.metric, agg.cases, agg.mean);
    }
    info!("wrote {} files to {}", written.len(), a.out.display());
    Ok(())
}

fn bench(a: BenchArgs, cfg: &ConfigFile) -> Result<()> {
    let manifest = io::read_manifest(&a.frames)?;
    let detector = build_detector(&a.detector, &manifest, cfg)?;
    // every frame is loaded, and checked to exist, before timing starts
    let frames = io::load_frames(&a.frames, &manifest)?;
    let mode = cfg.mode.unwrap_or(a.mode);
    let report = eval::run_benchmark(&frames, manifest.frame_rate, &detector, mode)?;
    let case = a.case.unwrap_or_else(|| {
        fs::canonicalize(&a.frames)
            .ok()
            .and_then(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()))
            .unwrap_or_else(|| label(&a.frames))
    });
    let out = BenchFile { system: a.system.unwrap_or_else(|| detector.variant().to_string()), case, report };
    println!(
        "{} {}: n={} t={:.3}s F={:.2} Hz (latency mean {:.2} ms, p95 {:.2} ms, dropped {})",
        out.system,
        out.case,
        out.report.n,
        out.report.t,
        out.report.f,
        1e3 * out.report.latency.mean,
        1e3 * out.report.latency.p95,
        out.report.dropped
    );
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    io::write_json(&a.out, &out)?;
    Ok(())
}
