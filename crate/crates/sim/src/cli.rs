//! The `hydroshear` command line.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numerical degeneracy.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hydroshear_core::calibration::{
    cosine_similarity, generate_dataset, rmse, Bracket, CalibrationResult, CalibrationSetup, Calibrator, SampleKind,
    SyntheticConfig, DEFAULT_MAGNITUDE_FLOOR,
};
use hydroshear_core::geometry::{sample_surface, Sdf};
use hydroshear_core::{FieldUnit, MarkerField, PixelScale};
use serde::{Deserialize, Serialize};

use crate::batch::{benchmark, BatchSim, BenchConfig, BenchReport, ModelKind};
use crate::config::{load_scenario, parse_toml, write_toml, HydroSection, ParamsFile, ScenarioConfig};
use crate::dataset::{read_dataset, write_dataset, Sampling};
use crate::error::{exit, Result, SimError};
use crate::io::{read_field, read_text, read_trajectory, write_atomic, write_field, write_samples, write_sdf, FieldEncoding, FieldFile};
use crate::plot::quiver_svg;

pub const CONFIG_ENV: &str = "HYDROSHEAR_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "hydroshear", version, about = "Tactile marker shear simulation, calibration and benchmarking")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Step a scenario along a trajectory and write marker fields.
    Simulate(SimulateArgs),
    /// Fit hydroshear parameters to a dataset directory.
    Calibrate(CalibrateArgs),
    /// RMSE and cosine similarity between predicted and reference fields.
    Compare(CompareArgs),
    /// Time batched stepping over several environment counts.
    Bench(BenchArgs),
    /// Sample an indenter surface and write the samples.
    SampleSurface(SampleSurfaceArgs),
    /// Write a synthetic calibration dataset with known parameters.
    GenDataset(GenDatasetArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file (TOML).
    #[arg(long, env = CONFIG_ENV)]
    pub config: PathBuf,
    /// Trajectory file.
    #[arg(long)]
    pub trajectory: PathBuf,
    /// Output directory, or output file with --final-only.
    #[arg(long)]
    pub out: PathBuf,
    /// Write only the field after the last pose.
    #[arg(long)]
    pub final_only: bool,
    /// Write fields in pixels instead of meters.
    #[arg(long)]
    pub pixels: bool,
    /// Binary payload (f32) instead of text.
    #[arg(long)]
    pub binary: bool,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Dataset directory with dataset.toml and <kind>_<id>.traj/.field pairs.
    #[arg(long)]
    pub dataset: PathBuf,
    /// Calibration settings (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Parameter file to write.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Predicted field file, or a directory of .field files.
    #[arg(long)]
    pub pred: PathBuf,
    /// Reference field file, or a directory matched by file name.
    #[arg(long)]
    pub truth: PathBuf,
    /// Cosine similarity ignores taxels shorter than this in either field, px.
    #[arg(long, default_value_t = DEFAULT_MAGNITUDE_FLOOR)]
    pub floor: f64,
    /// Directory for SVG plots and their CSV data.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Scenario file (TOML).
    #[arg(long, env = CONFIG_ENV)]
    pub config: PathBuf,
    /// Environment counts.
    #[arg(long, value_delimiter = ',', default_values_t = [256usize, 512, 1024])]
    pub env_counts: Vec<usize>,
    /// Models to time; defaults to the scenario's model.
    #[arg(long, value_delimiter = ',')]
    pub models: Vec<ModelKind>,
    /// Timed steps per environment count.
    #[arg(long, default_value_t = 20)]
    pub steps: usize,
    /// Untimed steps before timing starts.
    #[arg(long, default_value_t = 5)]
    pub warmup: usize,
    /// Seed for the synthetic trajectories.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// CSV records file.
    #[arg(long)]
    pub records: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleSurfaceArgs {
    /// Scenario file whose indenter is sampled.
    #[arg(long, env = CONFIG_ENV)]
    pub config: PathBuf,
    /// Number of samples; defaults to the scenario's surface count.
    #[arg(long)]
    pub count: Option<usize>,
    /// Sampling seed; defaults to the scenario's surface seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Samples file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the indenter's lattice SDF (mesh and lattice indenters).
    #[arg(long)]
    pub sdf_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenDatasetArgs {
    /// Dataset directory to create or fill.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for contact locations and headings.
    #[arg(long)]
    pub layout_seed: Option<u64>,
    /// Surface samples per indenter.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Binary field payloads.
    #[arg(long)]
    pub binary: bool,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Messages go to stdout and diagnostics to stderr.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<i32> {
    match command {
        Command::Simulate(a) => simulate(&a),
        Command::Calibrate(a) => calibrate(&a),
        Command::Compare(a) => compare(&a),
        Command::Bench(a) => bench(&a),
        Command::SampleSurface(a) => sample_surface_cmd(&a),
        Command::GenDataset(a) => gen_dataset(&a),
    }
}

fn encoding(binary: bool) -> FieldEncoding {
    if binary {
        FieldEncoding::Binary
    } else {
        FieldEncoding::Text
    }
}

fn simulate(a: &SimulateArgs) -> Result<i32> {
    let scenario = load_scenario(&a.config)?;
    let traj = read_trajectory(&a.trajectory)?;
    let times = traj.times();
    let poses = traj.poses();
    let mut sim = BatchSim::new(scenario.scene, scenario.model, 1)?
        .with_tracker_options(scenario.tracker)
        .with_gravity(scenario.gravity);
    let unit = if a.pixels { FieldUnit::Pixels } else { FieldUnit::Meters };
    let scale = scenario.pixel_scale;
    let wrap = |f: MarkerField| FieldFile {
        field: f.converted(unit, scale),
        pixel_scale: scale,
    };
    if !a.final_only {
        std::fs::create_dir_all(&a.out).map_err(|e| SimError::io(&a.out, e))?;
    }
    let mut last = None;
    for (k, pose) in poses.iter().enumerate() {
        if k > 0 {
            sim.set_dt(times[k] - times[k - 1]);
        }
        let field = sim.step_env(0, pose)?;
        if a.final_only {
            last = Some(field);
        } else {
            let path = a.out.join(format!("field_{k:05}.field"));
            write_field(&path, &wrap(field), encoding(a.binary))?;
        }
    }
    if let Some(f) = last {
        write_field(&a.out, &wrap(f), encoding(a.binary))?;
    }
    println!("simulated {} poses with {}", poses.len(), sim.model().kind());
    Ok(exit::OK)
}

/// Optional settings for `calibrate`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    /// Surface samples per indenter; defaults to the dataset's own setting.
    pub sample_count: Option<usize>,
    pub seed: Option<u64>,
    pub shear_kinds: Option<Vec<String>>,
    pub slip_kinds: Option<Vec<String>>,
    pub substep_threshold: Option<f64>,
    #[serde(default)]
    pub brackets: BracketsConfig,
    pub joint_refinement: Option<JointConfig>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketsConfig {
    pub lambda_d: Option<[f64; 2]>,
    pub lambda_s: Option<[f64; 2]>,
    pub stiffness: Option<[f64; 2]>,
    pub friction: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    /// Half-width of the grid in decades around the staged optimum.
    pub decades: f64,
    /// Points per axis.
    pub points: usize,
}

fn kinds(path: &Path, tags: &[String]) -> Result<Vec<SampleKind>> {
    tags.iter()
        .map(|t| SampleKind::from_tag(t).ok_or_else(|| SimError::parse(path, 0, format!("unknown sample kind `{t}`"))))
        .collect()
}

/// Per-stage summary written next to the fitted parameters.
#[derive(Debug, Clone, Serialize)]
struct StageOut {
    name: String,
    value: f64,
    residual: f64,
    iterations: usize,
    evaluations: usize,
    degeneracy: String,
}

#[derive(Debug, Clone, Serialize)]
struct ReportOut {
    samples: usize,
    stages: Vec<StageOut>,
    rescale: Vec<f64>,
    surrogate_clipped: bool,
    friction_identifiable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    joint_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct CalibrationOut {
    hydroshear: HydroSection,
    calibration: ReportOut,
}

fn report_of(result: &CalibrationResult, samples: usize) -> ReportOut {
    ReportOut {
        samples,
        stages: result
            .stages
            .iter()
            .map(|s| StageOut {
                name: s.name.to_string(),
                value: s.value,
                residual: s.residual,
                iterations: s.iterations,
                evaluations: s.evaluations,
                degeneracy: s.degeneracy.map(|d| d.describe()).unwrap_or("none").to_string(),
            })
            .collect(),
        rescale: result.rescale.clone(),
        surrogate_clipped: result.surrogate_clipped,
        friction_identifiable: result.friction_identifiable,
        joint_residual: result.refinement.map(|r| r.residual),
    }
}

fn calibrate(a: &CalibrateArgs) -> Result<i32> {
    let cfg: CalibrationConfig = match &a.config {
        Some(p) => parse_toml(p, &read_text(p)?)?,
        None => CalibrationConfig::default(),
    };
    let cfg_path = a.config.clone().unwrap_or_default();
    let data = read_dataset(&a.dataset)?;
    let mut setup = CalibrationSetup {
        grid: data.grid,
        pixel_scale: data.pixel_scale,
        ..CalibrationSetup::default()
    };
    if let Some(s) = data.sampling {
        setup.sample_count = s.count;
        setup.seed = s.seed;
    }
    if let Some(n) = cfg.sample_count {
        setup.sample_count = n;
    }
    if let Some(s) = cfg.seed {
        setup.seed = s;
    }
    if let Some(t) = &cfg.shear_kinds {
        setup.shear_kinds = kinds(&cfg_path, t)?;
    }
    if let Some(t) = &cfg.slip_kinds {
        setup.slip_kinds = kinds(&cfg_path, t)?;
    }
    if let Some(t) = cfg.substep_threshold {
        setup.tracker.substep_threshold = t;
    }
    let b = &cfg.brackets;
    for (slot, given) in [
        (&mut setup.brackets.lambda_d, b.lambda_d),
        (&mut setup.brackets.lambda_s, b.lambda_s),
        (&mut setup.brackets.stiffness, b.stiffness),
        (&mut setup.brackets.friction, b.friction),
    ] {
        if let Some([lo, hi]) = given {
            *slot = Bracket::new(lo, hi).map_err(|e| SimError::parse(&cfg_path, 0, format!("bracket: {e}")))?;
        }
    }
    setup.joint_refinement = cfg.joint_refinement.map(|j| (j.decades, j.points));

    let result = Calibrator::new(&setup, &data.samples)?.run()?;
    let out = CalibrationOut {
        hydroshear: HydroSection::from_params(&result.params),
        calibration: report_of(&result, data.samples.len()),
    };
    write_toml(&a.out, &out)?;

    println!("{:<10} {:>14} {:>14} {:>6} {:>6}  degeneracy", "stage", "value", "residual_px2", "iters", "evals");
    for s in &result.stages {
        println!(
            "{:<10} {:>14.6e} {:>14.6e} {:>6} {:>6}  {}",
            s.name,
            s.value,
            s.residual,
            s.iterations,
            s.evaluations,
            s.degeneracy.map(|d| d.describe()).unwrap_or("none")
        );
    }
    if result.surrogate_clipped {
        eprintln!("warning: the surrogate friction clipped during the lambda_s/stiffness stages");
    }
    if !result.friction_identifiable {
        eprintln!("warning: no slip occurs at the fitted friction; mu is not identified by these samples");
    }
    if result.degenerate() {
        let names: Vec<&str> = result.stages.iter().filter(|s| s.degeneracy.is_some()).map(|s| s.name).collect();
        eprintln!("degenerate stages: {}", names.join(", "));
        return Ok(exit::DEGENERATE);
    }
    Ok(exit::OK)
}

/// `.field` files of a directory keyed by file name, or the single file.
fn field_set(path: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    if path.is_dir() {
        for entry in std::fs::read_dir(path).map_err(|e| SimError::io(path, e))? {
            let p = entry.map_err(|e| SimError::io(path, e))?.path();
            if p.extension().and_then(|e| e.to_str()) == Some("field") {
                let name = p.file_name().unwrap().to_string_lossy().into_owned();
                out.insert(name, p);
            }
        }
    } else {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        out.insert(name, path.to_path_buf());
    }
    Ok(out)
}

/// Group of a `<kind>_<id>.field` name; everything else is `all`.
fn group_of(name: &str) -> String {
    let stem = name.strip_suffix(".field").unwrap_or(name);
    match stem.rsplit_once('_') {
        Some((kind, id)) if !id.is_empty() && id.bytes().all(|b| b.is_ascii_digit()) => kind.to_string(),
        _ => "all".to_string(),
    }
}

fn in_pixels(f: &FieldFile) -> MarkerField {
    f.field.to_pixels(f.pixel_scale)
}

#[derive(Default)]
struct Tally {
    rmse: Vec<f64>,
    cs: Vec<f64>,
}

impl Tally {
    fn line(&self, label: &str) -> String {
        let mean = |v: &[f64]| {
            if v.is_empty() {
                "n/a".to_string()
            } else {
                format!("{:.6}", v.iter().sum::<f64>() / v.len() as f64)
            }
        };
        format!(
            "{label:<20} pairs={:<4} rmse_px={:<12} cs={}\n",
            self.rmse.len(),
            mean(&self.rmse),
            mean(&self.cs)
        )
    }
}

fn compare(a: &CompareArgs) -> Result<i32> {
    let pred = field_set(&a.pred)?;
    let truth = field_set(&a.truth)?;
    let pairs: Vec<(String, PathBuf, PathBuf)> = if pred.len() == 1 && truth.len() == 1 && !a.pred.is_dir() {
        let (n, p) = pred.into_iter().next().unwrap();
        let (_, t) = truth.into_iter().next().unwrap();
        vec![(n, p, t)]
    } else {
        let mut v = Vec::new();
        for (name, p) in &pred {
            let t = truth
                .get(name)
                .ok_or_else(|| SimError::Data(format!("{name}: no reference field with this name")))?;
            v.push((name.clone(), p.clone(), t.clone()));
        }
        v
    };
    if pairs.is_empty() {
        return Err(SimError::Data("no field pairs to compare".into()));
    }
    if let Some(dir) = &a.plot {
        std::fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    let scale = PixelScale::default();
    let mut report = String::new();
    let mut groups: BTreeMap<String, Tally> = BTreeMap::new();
    let mut overall = Tally::default();
    for (name, p, t) in &pairs {
        let (pf, tf) = (read_field(p)?, read_field(t)?);
        if pf.field.grid != tf.field.grid {
            return Err(hydroshear_core::Error::GridMismatch.into());
        }
        // both fields are converted with their own embedded scales
        let (pp, tp) = (in_pixels(&pf), in_pixels(&tf));
        let r = rmse(&pp, &tp, scale)?;
        let c = cosine_similarity(&pp, &tp, scale, a.floor)?;
        report.push_str(&format!(
            "{name:<20} rmse_px={r:<12.6} cs={}\n",
            c.map(|c| format!("{c:.6}")).unwrap_or_else(|| "n/a".into())
        ));
        let g = groups.entry(group_of(name)).or_default();
        for tally in [g, &mut overall] {
            tally.rmse.push(r);
            tally.cs.extend(c);
        }
        if let Some(dir) = &a.plot {
            let stem = name.strip_suffix(".field").unwrap_or(name);
            let svg = quiver_svg(stem, &[(&pp, "#1f77b4", "predicted"), (&tp, "#d62728", "reference")]);
            write_atomic(&dir.join(format!("{stem}.svg")), svg.as_bytes())?;
            let mut csv = String::from("x_m,y_m,pred_dx_px,pred_dy_px,truth_dx_px,truth_dy_px\n");
            for q in 0..pp.vectors.len() {
                let [x, y] = pp.grid.point_xy(q);
                let (u, v) = (pp.vectors[q], tp.vectors[q]);
                csv.push_str(&format!("{x:?},{y:?},{:?},{:?},{:?},{:?}\n", u[0], u[1], v[0], v[1]));
            }
            write_atomic(&dir.join(format!("{stem}.csv")), csv.as_bytes())?;
        }
    }
    report.push('\n');
    for (g, t) in &groups {
        report.push_str(&t.line(&format!("group {g}")));
    }
    report.push_str(&overall.line("overall"));
    print!("{report}");
    if let Some(p) = &a.report {
        write_atomic(p, report.as_bytes())?;
    }
    Ok(exit::OK)
}

fn bench(a: &BenchArgs) -> Result<i32> {
    let text = read_text(&a.config)?;
    let cfg: ScenarioConfig = parse_toml(&a.config, &text)?;
    let models = if a.models.is_empty() {
        vec![cfg.model.kind]
    } else {
        a.models.clone()
    };
    let bench_cfg = BenchConfig {
        env_counts: a.env_counts.clone(),
        steps: a.steps,
        warmup: a.warmup,
        seed: a.seed,
    };
    let mut report = BenchReport {
        rows: Vec::new(),
        threads: rayon::current_num_threads(),
    };
    for kind in models {
        let mut c = cfg.clone();
        c.model.kind = kind;
        let scenario = c.build(&a.config)?;
        report
            .rows
            .extend(benchmark(&scenario.scene, &scenario.model, scenario.tracker, &bench_cfg)?);
    }
    print!("{}", report.table());
    if let Some(p) = &a.records {
        write_atomic(p, report.csv().as_bytes())?;
    }
    Ok(exit::OK)
}

fn sample_surface_cmd(a: &SampleSurfaceArgs) -> Result<i32> {
    let cfg: ScenarioConfig = parse_toml(&a.config, &read_text(&a.config)?)?;
    let sdf = cfg.indenter.build(&a.config)?;
    let count = a.count.unwrap_or(cfg.surface.count);
    let seed = a.seed.unwrap_or(cfg.surface.seed);
    let samples = sample_surface(&sdf, count, seed)?;
    write_samples(&a.out, &samples)?;
    if let Some(p) = &a.sdf_out {
        match &sdf {
            Sdf::Grid(g) => write_sdf(p, g)?,
            _ => return Err(SimError::Usage("--sdf-out needs a mesh or lattice indenter".into())),
        }
    }
    println!("wrote {count} samples, total area {:.6e} m^2", samples.total_area());
    Ok(exit::OK)
}

fn gen_dataset(a: &GenDatasetArgs) -> Result<i32> {
    let mut cfg = SyntheticConfig::default();
    if let Some(s) = a.layout_seed {
        cfg.layout_seed = s;
    }
    if let Some(n) = a.samples {
        cfg.sample_count = n;
    }
    let samples = generate_dataset(&cfg)?;
    let sampling = Sampling {
        count: cfg.sample_count,
        seed: cfg.seed,
    };
    write_dataset(&a.out, &samples, cfg.pixel_scale, Some(sampling), encoding(a.binary))?;
    let params = ParamsFile {
        hydroshear: Some(HydroSection::from_params(&cfg.truth)),
        ..ParamsFile::default()
    };
    write_toml(&a.out.join("truth.toml"), &params)?;
    println!("wrote {} samples to {}", samples.len(), a.out.display());
    Ok(exit::OK)
}
