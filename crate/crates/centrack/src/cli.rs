//! `centrack` subcommands.
//!
//! Exit codes: 0 success, 1 I/O or parse failure, 2 invalid arguments or
//! domain error, 3 frame-rate check failed.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use centrack_core::eval::{evaluate, EvalReport};
use centrack_core::imaging::{detect_stack, median_background, Connectivity, DetectParams, GrayImage};
use centrack_core::matching::{track, FrameRateParams, TrackOutput};
use centrack_core::simulate::{generate, ScenarioConfig};
use centrack_core::{AmbiguityPolicy, DetectionSlice, TrackerConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::frames::FramePattern;
use crate::manifest::{Counts, RunManifest};
use crate::{csv_io, events, pgm, Error};

/// Defaults shared by every subcommand; echoed into manifests.
pub mod defaults {
    use centrack_core::imaging::DetectParams;

    pub const THRESHOLD: u8 = DetectParams::DEFAULT.threshold;
    pub const CONNECTIVITY: u8 = 8;
    pub const MIN_AREA: usize = DetectParams::DEFAULT.min_area;
    pub const AMBIGUITY: &str = "nn-resolve";
}

#[derive(Debug, Parser)]
#[command(
    name = "centrack",
    version,
    about = "Centroid tracking with binary distance matrices"
)]
pub struct Cli {
    /// Write the run manifest here instead of stderr.
    #[arg(long, global = true, value_name = "PATH")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Background difference, threshold and blob centroids for a PGM stack.
    Detect(DetectArgs),
    /// Link detections into trajectories.
    Track(TrackArgs),
    /// Generate a synthetic scene with ground truth.
    Simulate(SimulateArgs),
    /// Score trajectories against ground truth.
    Eval(EvalArgs),
    /// Check a frame rate against the free-flow speed bound.
    FpsCheck(FpsCheckArgs),
    /// simulate -> track -> eval in one go.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// printf-style frame pattern, e.g. `frames/f_%04d.pgm`.
    #[arg(long)]
    pub frames: String,
    /// Empty-scene frame. Defaults to the per-pixel median of the stack.
    #[arg(long)]
    pub background: Option<PathBuf>,
    #[arg(long, default_value_t = defaults::THRESHOLD)]
    pub threshold: u8,
    #[arg(long, default_value_t = defaults::CONNECTIVITY, value_parser = parse_connectivity)]
    pub connectivity: u8,
    #[arg(long, default_value_t = defaults::MIN_AREA)]
    pub min_area: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Ambiguity {
    FlagOnly,
    NnResolve,
}

impl Ambiguity {
    fn policy(self) -> AmbiguityPolicy {
        match self {
            Ambiguity::FlagOnly => AmbiguityPolicy::FlagOnly,
            Ambiguity::NnResolve => AmbiguityPolicy::NearestNeighborResolve,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Ambiguity::FlagOnly => "flag-only",
            Ambiguity::NnResolve => "nn-resolve",
        }
    }
}

#[derive(Debug, Args)]
pub struct TrackOptions {
    /// Matching threshold T in pixels.
    #[arg(long = "max-distance", allow_negative_numbers = true)]
    pub max_distance: f64,
    /// Frames per second; speeds are pixels/second when set, else pixels/slice.
    #[arg(long, allow_negative_numbers = true)]
    pub fps: Option<f64>,
    #[arg(long, value_enum, default_value = defaults::AMBIGUITY)]
    pub ambiguity: Ambiguity,
}

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[arg(long)]
    pub detections: PathBuf,
    #[command(flatten)]
    pub options: TrackOptions,
    #[arg(long)]
    pub out: PathBuf,
    /// Occlusion events (JSON lines).
    #[arg(long)]
    pub events: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON.
    #[arg(long)]
    pub config: PathBuf,
    /// Detections CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth CSV.
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub trajectories: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// Matching radius in pixels.
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Tracking threshold; the radius defaults to half of it.
    #[arg(long = "max-distance", allow_negative_numbers = true)]
    pub max_distance: Option<f64>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FpsCheckArgs {
    /// Free-flow speed (distance units per second).
    #[arg(long, allow_negative_numbers = true)]
    pub free_flow_speed: f64,
    /// Speed-density gradient b.
    #[arg(long, allow_negative_numbers = true)]
    pub gradient_b: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub fps: f64,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[command(flatten)]
    pub options: TrackOptions,
    /// Evaluation radius; defaults to half the threshold.
    #[arg(long, allow_negative_numbers = true)]
    pub radius: Option<f64>,
    /// Receives detections.csv, truth.csv, trajectories.csv, events.jsonl, eval.json.
    #[arg(long)]
    pub out_dir: PathBuf,
}

fn parse_connectivity(s: &str) -> Result<u8, String> {
    match s {
        "4" => Ok(4),
        "8" => Ok(8),
        _ => Err(format!("connectivity must be 4 or 8, got `{s}`")),
    }
}

/// A failed run, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(Error),
    Inadequate,
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Data(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Inadequate => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Data(e) => write!(f, "{e}"),
            Failure::Inadequate => f.write_str("frame rate is not above the required minimum"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

fn usage(e: impl fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code().clamp(0, 255) as u8;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            if !matches!(f, Failure::Inadequate) {
                eprintln!("centrack: {f}");
            }
            f.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let started = Instant::now();
    let (mut manifest, outcome) = match &cli.command {
        Command::Detect(a) => cmd_detect(a)?,
        Command::Track(a) => cmd_track(a)?,
        Command::Simulate(a) => cmd_simulate(a)?,
        Command::Eval(a) => cmd_eval(a)?,
        Command::FpsCheck(a) => cmd_fps_check(a)?,
        Command::Pipeline(a) => cmd_pipeline(a)?,
    };
    manifest.finish(started);
    manifest.emit(cli.manifest.as_deref())?;
    outcome
}

type Ran = (RunManifest, Result<(), Failure>);

fn tracker_config(o: &TrackOptions) -> Result<TrackerConfig, Failure> {
    TrackerConfig::new(o.max_distance)
        .and_then(|c| c.with_fps(o.fps))
        .map(|c| c.with_policy(o.ambiguity.policy()))
        .map_err(usage)
}

fn track_parameters(o: &TrackOptions) -> serde_json::Value {
    json!({ "max_distance": o.max_distance, "fps": o.fps, "ambiguity": o.ambiguity.name() })
}

fn point_count(slices: &[DetectionSlice]) -> usize {
    slices.iter().map(DetectionSlice::len).sum()
}

pub fn cmd_detect(a: &DetectArgs) -> Result<Ran, Failure> {
    let pattern = FramePattern::parse(&a.frames)
        .ok_or_else(|| usage(format!("frame pattern `{}` needs one %d or %0Nd placeholder", a.frames)))?;
    let paths = match pattern.resolve() {
        Ok(p) => p,
        Err(Error::Io { .. }) => Vec::new(),
        Err(e) => return Err(e.into()),
    };
    if paths.is_empty() {
        return Err(usage(format!("no frames match `{}`", a.frames)));
    }
    if let Some(bg) = &a.background {
        if !bg.is_file() {
            return Err(usage(format!("background file {} not found", bg.display())));
        }
    }
    let frames = paths
        .iter()
        .map(|p| pgm::read_pgm(p))
        .collect::<Result<Vec<GrayImage>, _>>()?;
    let background = match &a.background {
        Some(bg) => pgm::read_pgm(bg)?,
        None => median_background(&frames).map_err(Error::from)?,
    };
    let params = DetectParams {
        threshold: a.threshold,
        connectivity: if a.connectivity == 4 {
            Connectivity::Four
        } else {
            Connectivity::Eight
        },
        min_area: a.min_area,
    };
    let slices = detect_stack(&frames, &background, &params).map_err(Error::from)?;
    csv_io::write_detections(&a.out, &slices)?;

    let mut m = RunManifest::new(
        "detect",
        json!({
            "frames": a.frames,
            "background": a.background.as_ref().map_or("median".to_string(), |p| p.display().to_string()),
            "threshold": a.threshold,
            "connectivity": a.connectivity,
            "min_area": a.min_area,
        }),
    );
    for (k, p) in paths.iter().enumerate() {
        m.input(&format!("frame_{k}"), p);
    }
    if let Some(bg) = &a.background {
        m.input("background", bg);
    }
    m.output("detections", &a.out);
    m.counts = Counts {
        slices: Some(slices.len()),
        points: Some(point_count(&slices)),
        ..Counts::default()
    };
    Ok((m, Ok(())))
}

fn write_track_outputs(out: &TrackOutput, traj: &Path, ev: Option<&Path>) -> Result<(), Failure> {
    csv_io::write_trajectories(traj, &out.trajectories)?;
    if let Some(p) = ev {
        events::write_events(p, &out.events)?;
    }
    Ok(())
}

pub fn cmd_track(a: &TrackArgs) -> Result<Ran, Failure> {
    let config = tracker_config(&a.options)?;
    let slices = csv_io::read_detections(&a.detections)?;
    let out = track(&slices, &config).map_err(Error::from)?;
    write_track_outputs(&out, &a.out, a.events.as_deref())?;

    let mut m = RunManifest::new("track", track_parameters(&a.options));
    m.input("detections", &a.detections).output("trajectories", &a.out);
    if let Some(p) = &a.events {
        m.output("events", p);
    }
    m.counts = Counts {
        slices: Some(slices.len()),
        points: Some(point_count(&slices)),
        trajectories: Some(out.trajectories.len()),
        occlusion_events: Some(out.events.len()),
    };
    Ok((m, Ok(())))
}

pub fn load_scenario(path: &Path) -> Result<ScenarioConfig, Failure> {
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let cfg: ScenarioConfig = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Ran, Failure> {
    let cfg = load_scenario(&a.config)?;
    let (det, truth) = generate(&cfg).map_err(usage)?;
    csv_io::write_detections(&a.out, &det)?;
    csv_io::write_ground_truth(&a.truth, &truth)?;

    let mut m = RunManifest::new("simulate", serde_json::to_value(&cfg).map_err(Error::from)?);
    m.input("config", &a.config)
        .output("detections", &a.out)
        .output("truth", &a.truth);
    m.counts = Counts {
        slices: Some(det.len()),
        points: Some(point_count(&det)),
        trajectories: Some(truth.tracks().len()),
        ..Counts::default()
    };
    Ok((m, Ok(())))
}

fn eval_radius(radius: Option<f64>, max_distance: Option<f64>) -> Result<f64, Failure> {
    let r = match (radius, max_distance) {
        (Some(r), _) => r,
        (None, Some(t)) => t / 2.0,
        (None, None) => return Err(usage("either --radius or --max-distance is required")),
    };
    if !(r.is_finite() && r > 0.0) {
        return Err(usage(format!("evaluation radius must be > 0, got {r}")));
    }
    Ok(r)
}

fn write_report(report: &EvalReport, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(report).map_err(Error::from)?;
    match out {
        Some(p) => fs::write(p, text + "\n").map_err(Error::io(p))?,
        None => println!("{text}"),
    }
    Ok(())
}

pub fn cmd_eval(a: &EvalArgs) -> Result<Ran, Failure> {
    let radius = eval_radius(a.radius, a.max_distance)?;
    let trajs = csv_io::read_trajectories(&a.trajectories)?;
    let truth = csv_io::read_ground_truth(&a.truth)?;
    let report = evaluate(&trajs, &truth, radius).map_err(usage)?;
    write_report(&report, a.out.as_deref())?;

    let mut m = RunManifest::new("eval", json!({ "radius": radius }));
    m.input("trajectories", &a.trajectories).input("truth", &a.truth);
    if let Some(p) = &a.out {
        m.output("report", p);
    }
    m.counts = Counts {
        slices: Some(truth.n_slices()),
        trajectories: Some(trajs.len()),
        ..Counts::default()
    };
    Ok((m, Ok(())))
}

pub fn cmd_fps_check(a: &FpsCheckArgs) -> Result<Ran, Failure> {
    let params = FrameRateParams::new(a.free_flow_speed, a.gradient_b).map_err(usage)?;
    if !a.fps.is_finite() {
        return Err(usage(format!("fps must be finite, got {}", a.fps)));
    }
    let min = params.min_fps();
    let adequate = params.is_adequate(a.fps);
    println!("minimum_fps: {min}");
    println!("fps: {}", a.fps);
    println!("verdict: {}", if adequate { "adequate" } else { "inadequate" });
    let m = RunManifest::new(
        "fps-check",
        json!({
            "free_flow_speed": a.free_flow_speed,
            "gradient_b": a.gradient_b,
            "fps": a.fps,
            "minimum_fps": min,
            "adequate": adequate,
        }),
    );
    Ok((m, if adequate { Ok(()) } else { Err(Failure::Inadequate) }))
}

pub fn cmd_pipeline(a: &PipelineArgs) -> Result<Ran, Failure> {
    let config = tracker_config(&a.options)?;
    let radius = eval_radius(a.radius, Some(a.options.max_distance))?;
    let scenario = load_scenario(&a.config)?;
    fs::create_dir_all(&a.out_dir).map_err(Error::io(&a.out_dir))?;
    let path = |name: &str| a.out_dir.join(name);

    let (det, truth) = generate(&scenario).map_err(usage)?;
    csv_io::write_detections(&path("detections.csv"), &det)?;
    csv_io::write_ground_truth(&path("truth.csv"), &truth)?;
    let out = track(&det, &config).map_err(Error::from)?;
    write_track_outputs(&out, &path("trajectories.csv"), Some(&path("events.jsonl")))?;
    let report = evaluate(&out.trajectories, &truth, radius).map_err(usage)?;
    write_report(&report, Some(&path("eval.json")))?;
    write_report(&report, None)?;

    let mut params = track_parameters(&a.options);
    params["radius"] = json!(radius);
    params["scenario"] = serde_json::to_value(&scenario).map_err(Error::from)?;
    let mut m = RunManifest::new("pipeline", params);
    m.input("config", &a.config);
    for name in [
        "detections.csv",
        "truth.csv",
        "trajectories.csv",
        "events.jsonl",
        "eval.json",
    ] {
        m.output(name, &path(name));
    }
    m.counts = Counts {
        slices: Some(det.len()),
        points: Some(point_count(&det)),
        trajectories: Some(out.trajectories.len()),
        occlusion_events: Some(out.events.len()),
    };
    Ok((m, Ok(())))
}
