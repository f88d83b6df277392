//! TOML scenario and parameter files.

use std::path::{Path, PathBuf};

use hydroshear_core::baselines::{FotsParams, PenaltyParams};
use hydroshear_core::geometry::{GridSdf, Sdf, DEFAULT_SAMPLE_COUNT};
use hydroshear_core::hydroshear::TrackerOptions;
use hydroshear_core::types::DEFAULT_SENSOR_WIDTH;
use hydroshear_core::{HydroParams, PixelScale, Pose, Scene, TactileGrid, Vector3};
use serde::{Deserialize, Serialize};

use crate::batch::{Model, ModelKind};
use crate::error::{Result, SimError};
use crate::io::{read_samples, read_sdf, read_stl, read_text, write_atomic};

fn toml_error(path: &Path, text: &str, e: toml::de::Error) -> SimError {
    let line = e
        .span()
        .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
        .unwrap_or(0);
    SimError::parse(path, line, e.message().trim().to_string())
}

pub(crate) fn parse_toml<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| toml_error(path, text, e))
}

/// Resolves `p` against the directory of the file that names it.
pub(crate) fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn require_file(config: &Path, p: &Path) -> Result<PathBuf> {
    let full = resolve(config, p);
    if !full.is_file() {
        return Err(SimError::parse(config, 0, format!("referenced file {} does not exist", full.display())));
    }
    Ok(full)
}

fn positive(config: &Path, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(SimError::parse(config, 0, format!("`{name}` must be positive, got {v}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum IndenterSpec {
    Sphere {
        radius: f64,
    },
    Box {
        half_extents: [f64; 3],
    },
    Cylinder {
        radius: f64,
        half_height: f64,
    },
    Torus {
        major_radius: f64,
        minor_radius: f64,
    },
    /// STL mesh converted to a lattice SDF.
    Mesh {
        path: PathBuf,
        #[serde(default = "default_cell")]
        cell: f64,
        #[serde(default = "default_padding")]
        padding: f64,
    },
    /// Lattice SDF in the binary format.
    Lattice {
        path: PathBuf,
    },
}

fn default_cell() -> f64 {
    5e-4
}

fn default_padding() -> f64 {
    2e-3
}

impl IndenterSpec {
    pub fn from_sdf(sdf: &Sdf) -> Option<Self> {
        Some(match sdf {
            Sdf::Sphere { radius } => IndenterSpec::Sphere { radius: *radius },
            Sdf::Box { half_extents } => IndenterSpec::Box {
                half_extents: [half_extents.x, half_extents.y, half_extents.z],
            },
            Sdf::Cylinder { radius, half_height } => IndenterSpec::Cylinder {
                radius: *radius,
                half_height: *half_height,
            },
            Sdf::Torus {
                major_radius,
                minor_radius,
            } => IndenterSpec::Torus {
                major_radius: *major_radius,
                minor_radius: *minor_radius,
            },
            _ => return None,
        })
    }

    /// `config` is the file this indenter was read from; relative paths are
    /// resolved against it.
    pub fn build(&self, config: &Path) -> Result<Sdf> {
        let sdf = match self {
            IndenterSpec::Sphere { radius } => Sdf::Sphere { radius: *radius },
            IndenterSpec::Box { half_extents: h } => Sdf::Box {
                half_extents: Vector3::new(h[0], h[1], h[2]),
            },
            IndenterSpec::Cylinder { radius, half_height } => Sdf::Cylinder {
                radius: *radius,
                half_height: *half_height,
            },
            IndenterSpec::Torus {
                major_radius,
                minor_radius,
            } => Sdf::Torus {
                major_radius: *major_radius,
                minor_radius: *minor_radius,
            },
            IndenterSpec::Mesh { path, cell, padding } => {
                positive(config, "cell", *cell)?;
                positive(config, "padding", *padding)?;
                let mesh = read_stl(&require_file(config, path)?)?;
                Sdf::Grid(GridSdf::from_mesh(&mesh, *cell, *padding)?.with_extrapolation(true))
            }
            IndenterSpec::Lattice { path } => Sdf::Grid(read_sdf(&require_file(config, path)?)?),
        };
        sdf.validate()
            .map_err(|e| SimError::parse(config, 0, format!("indenter: {e}")))?;
        Ok(sdf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    /// Precomputed samples; overrides `count` and `seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

fn default_count() -> usize {
    DEFAULT_SAMPLE_COUNT
}

impl Default for SurfaceSpec {
    fn default() -> Self {
        Self {
            count: DEFAULT_SAMPLE_COUNT,
            seed: 0,
            file: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_rows")]
    pub rows: usize,
    #[serde(default = "default_cols")]
    pub cols: usize,
    #[serde(default = "default_pitch")]
    pub pitch: f64,
    #[serde(default)]
    pub plane_height: f64,
    /// Pixels per meter.
    #[serde(default = "default_pixel_scale")]
    pub pixel_scale: f64,
}

fn default_rows() -> usize {
    7
}

fn default_cols() -> usize {
    9
}

fn default_pitch() -> f64 {
    DEFAULT_SENSOR_WIDTH / 9.0
}

fn default_pixel_scale() -> f64 {
    PixelScale::default().value()
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            rows: default_rows(),
            cols: default_cols(),
            pitch: default_pitch(),
            plane_height: 0.0,
            pixel_scale: default_pixel_scale(),
        }
    }
}

impl GridSpec {
    pub fn grid(&self) -> TactileGrid {
        TactileGrid::centered(self.rows, self.cols, self.pitch, self.plane_height)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(default)]
    pub kind: ModelKind,
    /// Parameter file; built-in defaults when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<PathBuf>,
}

/// Extra pose applied for the gravity-augmented field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GravitySpec {
    #[serde(default)]
    pub translation: [f64; 3],
    /// `[w, x, y, z]`
    #[serde(default = "identity_quaternion")]
    pub rotation: [f64; 4],
}

fn identity_quaternion() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl GravitySpec {
    pub fn pose(&self, config: &Path) -> Result<Pose> {
        let [w, x, y, z] = self.rotation;
        let [tx, ty, tz] = self.translation;
        Pose::from_array([w, x, y, z, tx, ty, tz]).map_err(|e| SimError::parse(config, 0, format!("gravity: {e}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub indenter: IndenterSpec,
    #[serde(default)]
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gravity: Option<GravitySpec>,
    /// Meters; non-positive disables substepping.
    #[serde(default = "default_substep")]
    pub substep_threshold: f64,
}

fn default_substep() -> f64 {
    TrackerOptions::default().substep_threshold
}

/// Everything a command needs to step one indenter on one sensor.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub scene: Scene,
    pub pixel_scale: PixelScale,
    pub model: Model,
    pub tracker: TrackerOptions,
    pub gravity: Option<Pose>,
}

impl ScenarioConfig {
    pub fn build(&self, config: &Path) -> Result<Scenario> {
        let grid = self.grid.grid();
        grid.validate()
            .map_err(|e| SimError::parse(config, 0, format!("grid: {e}")))?;
        positive(config, "pixel_scale", self.grid.pixel_scale)?;
        let pixel_scale = PixelScale::new(self.grid.pixel_scale)?;
        let indenter = self.indenter.build(config)?;
        let scene = match &self.surface.file {
            Some(f) => Scene::new(grid, indenter, read_samples(&require_file(config, f)?)?)?,
            None => Scene::sampled(grid, indenter, self.surface.count, self.surface.seed)?,
        };
        let params = match &self.model.params {
            Some(p) => load_params(&require_file(config, p)?)?,
            None => ParamsFile::default(),
        };
        let model = params.model(self.model.kind, &scene)?;
        let gravity = self.gravity.as_ref().map(|g| g.pose(config)).transpose()?;
        Ok(Scenario {
            scene,
            pixel_scale,
            model,
            tracker: TrackerOptions {
                substep_threshold: self.substep_threshold,
            },
            gravity,
        })
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let cfg: ScenarioConfig = parse_toml(path, &read_text(path)?)?;
    cfg.build(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroSection {
    pub lambda_d: f64,
    pub lambda_s: f64,
    pub stiffness: f64,
    /// Defaults to `stiffness`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normal_stiffness: Option<f64>,
    pub friction: f64,
    /// Defaults to `friction`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub projection_friction: Option<f64>,
    /// Defaults to the mean sample area of the scene.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
}

impl Default for HydroSection {
    fn default() -> Self {
        Self {
            lambda_d: 2e4,
            lambda_s: 1.5e4,
            stiffness: 5e5,
            normal_stiffness: None,
            friction: 0.5,
            projection_friction: None,
            area: None,
        }
    }
}

impl HydroSection {
    pub fn from_params(p: &HydroParams) -> Self {
        Self {
            lambda_d: p.lambda_d,
            lambda_s: p.lambda_s,
            stiffness: p.stiffness,
            normal_stiffness: Some(p.normal_stiffness),
            friction: p.friction,
            projection_friction: Some(p.projection_friction),
            area: Some(p.area),
        }
    }

    pub fn params(&self, mean_area: f64) -> HydroParams {
        HydroParams {
            lambda_d: self.lambda_d,
            lambda_s: self.lambda_s,
            stiffness: self.stiffness,
            normal_stiffness: self.normal_stiffness.unwrap_or(self.stiffness),
            friction: self.friction,
            projection_friction: self.projection_friction.unwrap_or(self.friction),
            area: self.area.unwrap_or(mean_area),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FotsSection {
    pub lambda_d: f64,
    pub lambda_s: f64,
    pub lambda_t: f64,
    pub shear_max: f64,
    pub twist_max: f64,
}

impl Default for FotsSection {
    fn default() -> Self {
        Self {
            lambda_d: 2e4,
            lambda_s: 1e4,
            lambda_t: 8e3,
            shear_max: 1e-3,
            twist_max: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PenaltySection {
    pub k_n: f64,
    pub k_t: f64,
    pub mu: f64,
}

impl Default for PenaltySection {
    fn default() -> Self {
        Self {
            k_n: 1.0,
            k_t: 0.05,
            mu: 0.5,
        }
    }
}

/// Model parameters, one optional table per model. Tables for other models
/// and any extra tables (such as a calibration report) are ignored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParamsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hydroshear: Option<HydroSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fots: Option<FotsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty: Option<PenaltySection>,
}

impl ParamsFile {
    pub fn model(&self, kind: ModelKind, scene: &Scene) -> Result<Model> {
        let model = match kind {
            ModelKind::Hydroshear => Model::HydroShear(self.hydroshear.unwrap_or_default().params(scene.mean_area())),
            ModelKind::FotsOriginal | ModelKind::FotsReimpl => {
                let f = self.fots.unwrap_or_default();
                let p = FotsParams {
                    lambda_d: f.lambda_d,
                    lambda_s: f.lambda_s,
                    lambda_t: f.lambda_t,
                    shear_max: f.shear_max,
                    twist_max: f.twist_max,
                };
                if kind == ModelKind::FotsOriginal {
                    Model::FotsOriginal(p)
                } else {
                    Model::FotsReimpl(p)
                }
            }
            ModelKind::Penalty => {
                let p = self.penalty.unwrap_or_default();
                Model::Penalty(PenaltyParams {
                    k_n: p.k_n,
                    k_t: p.k_t,
                    mu: p.mu,
                })
            }
        };
        model.validate()?;
        Ok(model)
    }
}

pub fn load_params(path: &Path) -> Result<ParamsFile> {
    parse_toml(path, &read_text(path)?)
}

pub fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| SimError::Data(format!("{}: {e}", path.display())))?;
    write_atomic(path, text.as_bytes())
}
