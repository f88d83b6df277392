//! Many independent environments stepped together.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use hydroshear_core::baselines::{fots_step, penalty_field, spatial_velocity, CenterMode, FotsParams, FotsState, PenaltyParams};
use hydroshear_core::geometry::Sdf;
use hydroshear_core::hydroshear::{HydroShear, TrackerOptions, TrackerState};
use hydroshear_core::{HydroParams, MarkerField, Pose, Scene, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Hydroshear,
    FotsOriginal,
    FotsReimpl,
    Penalty,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Hydroshear,
        ModelKind::FotsOriginal,
        ModelKind::FotsReimpl,
        ModelKind::Penalty,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Hydroshear => "hydroshear",
            ModelKind::FotsOriginal => "fots_original",
            ModelKind::FotsReimpl => "fots_reimpl",
            ModelKind::Penalty => "penalty",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ModelKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| format!("unknown model `{s}`; expected hydroshear, fots_original, fots_reimpl or penalty"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    HydroShear(HydroParams),
    /// FOTS with the Gaussians centred on the object frame.
    FotsOriginal(FotsParams),
    /// FOTS with the Gaussians centred on the first contact patch.
    FotsReimpl(FotsParams),
    Penalty(PenaltyParams),
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::HydroShear(_) => ModelKind::Hydroshear,
            Model::FotsOriginal(_) => ModelKind::FotsOriginal,
            Model::FotsReimpl(_) => ModelKind::FotsReimpl,
            Model::Penalty(_) => ModelKind::Penalty,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Model::HydroShear(p) => p.validate()?,
            Model::FotsOriginal(p) | Model::FotsReimpl(p) => p.validate()?,
            Model::Penalty(p) => p.validate()?,
        }
        Ok(())
    }
}

/// State of one environment.
#[derive(Debug, Clone, PartialEq)]
pub enum EnvState {
    Hydro(TrackerState),
    Fots(FotsState),
    /// The previous pose, for finite-differenced velocities.
    Penalty(Option<Pose>),
}

impl EnvState {
    fn new(model: &Model, scene: &Scene) -> Self {
        match model {
            Model::HydroShear(_) => EnvState::Hydro(TrackerState::new(scene.surface.len())),
            Model::FotsOriginal(_) => EnvState::Fots(FotsState::new(CenterMode::ObjectFrame, scene.grid)),
            Model::FotsReimpl(_) => EnvState::Fots(FotsState::new(CenterMode::InitialContactPatch, scene.grid)),
            Model::Penalty(_) => EnvState::Penalty(None),
        }
    }
}

/// Settings shared by every environment of a batch.
#[derive(Debug, Clone)]
struct Shared {
    scene: Scene,
    model: Model,
    tracker: TrackerOptions,
    gravity: Option<Pose>,
    dt: f64,
}

impl Shared {
    fn step(&self, state: &mut EnvState, pose: &Pose) -> hydroshear_core::Result<MarkerField> {
        match (&self.model, state) {
            (Model::HydroShear(p), EnvState::Hydro(st)) => {
                let h = HydroShear::new(&self.scene, *p).with_options(self.tracker);
                h.step(st, pose)?;
                match &self.gravity {
                    Some(g) => h.gravity_field(st, pose, g),
                    None => h.field(st, pose),
                }
            }
            (Model::FotsOriginal(p) | Model::FotsReimpl(p), EnvState::Fots(st)) => {
                let contacts = self.scene.contacts(pose)?;
                fots_step(p, st, pose, &contacts)
            }
            (Model::Penalty(p), EnvState::Penalty(prev)) => {
                let v = prev.map(|q| spatial_velocity(&q, pose, self.dt)).unwrap_or([0.0; 6]);
                *prev = Some(*pose);
                penalty_field(&self.scene.grid, &self.scene.indenter, pose, &v, p)
            }
            _ => unreachable!("environment state always matches the model"),
        }
    }
}

/// A batch of environments sharing one scene and one model.
///
/// Each environment owns its state and is stepped independently, so a
/// lane's output does not depend on the batch size, the other lanes or the
/// order in which the thread pool visits them.
#[derive(Debug, Clone)]
pub struct BatchSim {
    shared: Shared,
    envs: Vec<EnvState>,
}

impl BatchSim {
    pub fn new(scene: Scene, model: Model, env_count: usize) -> Result<Self> {
        model.validate()?;
        let envs = (0..env_count).map(|_| EnvState::new(&model, &scene)).collect();
        Ok(Self {
            shared: Shared {
                scene,
                model,
                tracker: TrackerOptions::default(),
                gravity: None,
                dt: 0.01,
            },
            envs,
        })
    }

    pub fn with_tracker_options(mut self, tracker: TrackerOptions) -> Self {
        self.shared.tracker = tracker;
        self
    }

    /// Hydroshear fields include the gravity augmentation `g`.
    pub fn with_gravity(mut self, g: Option<Pose>) -> Self {
        self.shared.gravity = g;
        self
    }

    /// Time between steps, used by the penalty model's velocities.
    pub fn set_dt(&mut self, dt: f64) {
        self.shared.dt = dt;
    }

    pub fn env_count(&self) -> usize {
        self.envs.len()
    }

    pub fn model(&self) -> &Model {
        &self.shared.model
    }

    pub fn scene(&self) -> &Scene {
        &self.shared.scene
    }

    pub fn state(&self, env: usize) -> Option<&EnvState> {
        self.envs.get(env)
    }

    /// Advances every environment by one pose and returns the fields in
    /// environment order.
    pub fn batch_step(&mut self, poses: &[Pose]) -> Result<Vec<MarkerField>> {
        if poses.len() != self.envs.len() {
            return Err(SimError::Data(format!(
                "got {} poses for {} environments",
                poses.len(),
                self.envs.len()
            )));
        }
        let shared = &self.shared;
        let fields: hydroshear_core::Result<Vec<MarkerField>> = self
            .envs
            .par_iter_mut()
            .zip(poses.par_iter())
            .map(|(state, pose)| shared.step(state, pose))
            .collect();
        Ok(fields?)
    }

    /// Advances one environment alone.
    pub fn step_env(&mut self, env: usize, pose: &Pose) -> Result<MarkerField> {
        let state = self.envs.get_mut(env).ok_or_else(|| SimError::Data(format!("no environment {env}")))?;
        Ok(self.shared.step(state, pose)?)
    }

    /// Returns environment `env` to its initial state.
    pub fn reset(&mut self, env: usize) -> Result<()> {
        let fresh = EnvState::new(&self.shared.model, &self.shared.scene);
        *self.envs.get_mut(env).ok_or_else(|| SimError::Data(format!("no environment {env}")))? = fresh;
        Ok(())
    }

    pub fn reset_all(&mut self) {
        for env in &mut self.envs {
            *env = EnvState::new(&self.shared.model, &self.shared.scene);
        }
    }
}

/// Distance from the indenter origin down to its lowest point.
pub fn indenter_bottom(sdf: &Sdf) -> f64 {
    match sdf {
        Sdf::Grid(g) => -g.solid_bounds().min.z,
        other => other.bounds().map(|b| -b.min.z).unwrap_or(0.0),
    }
}

/// Press, slide and twist, `len` poses long, for environment `env`.
///
/// The contact location, slide heading and twist sign are drawn from a
/// generator seeded with `(seed, env)` only, so every environment gets the
/// same trajectory whatever the batch size.
pub fn synthetic_trajectory(indenter: &Sdf, len: usize, seed: u64, env: usize) -> Vec<Pose> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (env as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let x0 = rng.random_range(-3e-3..3e-3);
    let y0 = rng.random_range(-3e-3..3e-3);
    let heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let twist = if rng.random::<bool>() { 0.1 } else { -0.1 };
    let bottom = indenter_bottom(indenter);
    let (depth, approach, slide) = (1.5e-3, 1e-3, 2e-3);
    let n = len.max(1);
    let press_end = (0.3 * n as f64).ceil() as usize;
    let slide_end = (0.7 * n as f64).ceil() as usize;
    (0..n)
        .map(|i| {
            let (s_press, s_slide, s_twist) = if i < press_end {
                ((i + 1) as f64 / press_end as f64, 0.0, 0.0)
            } else if i < slide_end {
                (1.0, (i + 1 - press_end) as f64 / (slide_end - press_end) as f64, 0.0)
            } else {
                (1.0, 1.0, (i + 1 - slide_end) as f64 / (n - slide_end) as f64)
            };
            let z = bottom + approach - (approach + depth) * s_press;
            let t = Vector3::new(
                x0 + slide * s_slide * heading.cos(),
                y0 + slide * s_slide * heading.sin(),
                z,
            );
            Pose::from_axis_angle(Vector3::z(), twist * s_twist, t)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub env_counts: Vec<usize>,
    /// Timed steps per env count.
    pub steps: usize,
    /// Untimed steps run first.
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            env_counts: vec![256, 512, 1024],
            steps: 20,
            warmup: 5,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub model: ModelKind,
    pub env_count: usize,
    pub steps: usize,
    pub mean_ms: f64,
    pub stdev_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub threads: usize,
}

impl BenchReport {
    /// Fitted `β` in `time ∝ env_count^β` per model, in first-seen order.
    /// Models measured at fewer than two env counts are left out.
    pub fn exponents(&self) -> Vec<(ModelKind, f64)> {
        let mut kinds: Vec<ModelKind> = Vec::new();
        for r in &self.rows {
            if !kinds.contains(&r.model) {
                kinds.push(r.model);
            }
        }
        kinds
            .into_iter()
            .filter_map(|k| {
                let pts: Vec<(f64, f64)> = self
                    .rows
                    .iter()
                    .filter(|r| r.model == k)
                    .map(|r| (r.env_count as f64, r.mean_ms))
                    .collect();
                scaling_exponent(&pts).map(|b| (k, b))
            })
            .collect()
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:<14} {:>9} {:>7} {:>12} {:>12}\n",
            "model", "envs", "steps", "mean_ms", "stdev_ms"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:<14} {:>9} {:>7} {:>12.3} {:>12.3}\n",
                r.model.tag(),
                r.env_count,
                r.steps,
                r.mean_ms,
                r.stdev_ms
            ));
        }
        for (k, b) in self.exponents() {
            s.push_str(&format!("scaling exponent {:<14} beta = {:.3}\n", k.tag(), b));
        }
        s.push_str(&format!("threads {}\n", self.threads));
        s
    }

    pub fn csv(&self) -> String {
        let mut s = String::from("model,env_count,steps,mean_ms,stdev_ms\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{:?},{:?}\n",
                r.model.tag(),
                r.env_count,
                r.steps,
                r.mean_ms,
                r.stdev_ms
            ));
        }
        s
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn scaling_exponent(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

fn mean_stdev(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Times `batch_step` on synthetic trajectories for each env count.
pub fn benchmark(scene: &Scene, model: &Model, tracker: TrackerOptions, cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.steps == 0 {
        return Err(SimError::Usage("benchmark needs at least one timed step".into()));
    }
    let len = cfg.warmup + cfg.steps;
    let mut rows = Vec::with_capacity(cfg.env_counts.len());
    for &count in &cfg.env_counts {
        if count == 0 {
            return Err(SimError::Usage("env counts must be positive".into()));
        }
        let trajectories: Vec<Vec<Pose>> = (0..count)
            .map(|e| synthetic_trajectory(&scene.indenter, len, cfg.seed, e))
            .collect();
        let mut sim = BatchSim::new(scene.clone(), *model, count)?.with_tracker_options(tracker);
        let mut times = Vec::with_capacity(cfg.steps);
        for step in 0..len {
            let poses: Vec<Pose> = trajectories.iter().map(|t| t[step]).collect();
            let start = Instant::now();
            let fields = sim.batch_step(&poses)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            std::hint::black_box(&fields);
            if step >= cfg.warmup {
                times.push(elapsed);
            }
        }
        let (mean_ms, stdev_ms) = mean_stdev(&times);
        rows.push(BenchRow {
            model: model.kind(),
            env_count: count,
            steps: cfg.steps,
            mean_ms,
            stdev_ms,
        });
    }
    Ok(rows)
}
