use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{UnitQuaternion, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::Sdf;
use crate::hydroshear::TrackerOptions;
use crate::scene::Scene;
use crate::types::{HydroParams, PixelScale, Pose, TactileGrid};

use super::stages::{simulate_trajectory, CalibrationSample, CalibrationSetup, SampleKind};

/// Generator for datasets whose observations are produced by the model
/// itself with known parameters.
///
/// Observations only identify the parameters if the calibration motions
/// behave as the stages assume: pure presses give no shear, and shear
/// motions stick everywhere. The defaults are picked for that. A flat face
/// pressed straight down moves every bottom point along its normal. Sliding
/// an axis-aligned box along one of its axes keeps its side faces either
/// unloaded or moving along their normals. Twisting a cylinder moves its wall
/// tangentially, where it carries no load.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    pub truth: HydroParams,
    pub grid: TactileGrid,
    pub pixel_scale: PixelScale,
    /// Indenter for every kind except twist.
    pub indenter: Sdf,
    pub twist_indenter: Sdf,
    /// Draw slide headings from the four axis directions only.
    pub axis_aligned: bool,
    /// Surface sampling, shared with the calibration setup.
    pub sample_count: usize,
    pub seed: u64,
    /// Seed for contact locations and motion directions.
    pub layout_seed: u64,
    /// Samples per kind, in [`SampleKind::ALL`] order.
    pub counts: [usize; 5],
    /// Half extents of the region contact locations are drawn from, meters.
    pub placement: [f64; 2],
    pub press_depth: f64,
    /// Clearance of the first pose above the membrane.
    pub approach: f64,
    pub press_steps: usize,
    pub slide: f64,
    pub slide_steps: usize,
    pub slip_slide: f64,
    pub slip_steps: usize,
    pub twist_angle: f64,
    pub roll_angle: f64,
    pub dt: f64,
    pub tracker: TrackerOptions,
}

impl Default for SyntheticConfig {
    fn default() -> Self {
        Self {
            truth: HydroParams::single_tracker(2e4, 1.5e4, 5e5, 0.5, 1.0),
            grid: TactileGrid::default(),
            pixel_scale: PixelScale::default(),
            indenter: Sdf::Box {
                half_extents: Vector3::new(0.012, 0.012, 0.01),
            },
            twist_indenter: Sdf::Cylinder {
                radius: 0.012,
                half_height: 0.01,
            },
            axis_aligned: true,
            sample_count: 1024,
            seed: 7,
            layout_seed: 11,
            counts: [10, 6, 4, 2, 4],
            placement: [0.008, 0.005],
            press_depth: 1.5e-3,
            approach: 2e-3,
            press_steps: 10,
            slide: 3e-4,
            slide_steps: 6,
            slip_slide: 3e-3,
            slip_steps: 30,
            twist_angle: 0.04,
            roll_angle: 0.03,
            dt: 0.01,
            tracker: TrackerOptions::default(),
        }
    }
}

impl SyntheticConfig {
    /// A calibration setup matching this generator's grid and sampling.
    pub fn setup(&self) -> CalibrationSetup {
        CalibrationSetup {
            grid: self.grid,
            pixel_scale: self.pixel_scale,
            sample_count: self.sample_count,
            seed: self.seed,
            tracker: self.tracker,
            ..CalibrationSetup::default()
        }
    }

    pub fn indenter_for(&self, kind: SampleKind) -> &Sdf {
        match kind {
            SampleKind::Twist => &self.twist_indenter,
            _ => &self.indenter,
        }
    }

    /// Height of the indenter origin for a given penetration of its lowest
    /// point below the membrane.
    fn height(&self, indenter: &Sdf, depth: f64) -> f64 {
        let bottom = match indenter {
            Sdf::Sphere { radius } => *radius,
            Sdf::Box { half_extents } => half_extents.z,
            Sdf::Cylinder { half_height, .. } => *half_height,
            Sdf::Torus { minor_radius, .. } => *minor_radius,
            Sdf::HalfSpace { .. } => 0.0,
            Sdf::Grid(g) => -g.min().z,
        };
        self.grid.plane_height + bottom - depth
    }
}

/// Press at `xy`, then the kind's motion. The unit vector `direction`
/// orients slides and roll axes; its x sign picks the twist sense.
pub fn sample_trajectory(cfg: &SyntheticConfig, kind: SampleKind, xy: [f64; 2], direction: [f64; 2]) -> Vec<(f64, Pose)> {
    let indenter = cfg.indenter_for(kind);
    let start = Vector3::new(xy[0], xy[1], cfg.height(indenter, -cfg.approach));
    let pressed = Vector3::new(xy[0], xy[1], cfg.height(indenter, cfg.press_depth));
    let mut out = Vec::new();
    let mut t = 0.0;
    let mut push = |p: Pose, out: &mut Vec<(f64, Pose)>| {
        out.push((t, p));
        t += cfg.dt;
    };
    for i in 0..=cfg.press_steps {
        let s = i as f64 / cfg.press_steps as f64;
        push(Pose::new(UnitQuaternion::identity(), start + (pressed - start) * s), &mut out);
    }
    let dir = Vector3::new(direction[0], direction[1], 0.0);
    let (steps, motion): (usize, &dyn Fn(f64) -> Pose) = match kind {
        SampleKind::Dilation => (0, &|_| Pose::identity()),
        SampleKind::Shear => (cfg.slide_steps, &|s| {
            Pose::new(UnitQuaternion::identity(), pressed + dir * (cfg.slide * s))
        }),
        SampleKind::Slip => (cfg.slip_steps, &|s| {
            Pose::new(UnitQuaternion::identity(), pressed + dir * (cfg.slip_slide * s))
        }),
        SampleKind::Twist => (cfg.slide_steps, &|s| {
            let sign = if direction[0] >= 0.0 { 1.0 } else { -1.0 };
            Pose::new(
                UnitQuaternion::from_axis_angle(&Vector3::z_axis(), sign * cfg.twist_angle * s),
                pressed,
            )
        }),
        SampleKind::Roll => (cfg.slide_steps, &|s| {
            // rotate about a horizontal axis through the bottom centre
            let axis = nalgebra::Unit::new_normalize(Vector3::new(-dir.y, dir.x, 0.0));
            let r = UnitQuaternion::from_axis_angle(&axis, cfg.roll_angle * s);
            let pivot = Vector3::new(pressed.x, pressed.y, cfg.grid.plane_height - cfg.press_depth);
            Pose::new(r, pivot + r * (pressed - pivot))
        }),
    };
    for i in 1..=steps {
        push(motion(i as f64 / steps as f64), &mut out);
    }
    out
}

/// Generates `cfg.counts` samples per kind with the observed fields in
/// pixels.
pub fn generate_dataset(cfg: &SyntheticConfig) -> Result<Vec<CalibrationSample>> {
    let scenes = [
        Scene::sampled(cfg.grid, cfg.indenter.clone(), cfg.sample_count, cfg.seed)?,
        Scene::sampled(cfg.grid, cfg.twist_indenter.clone(), cfg.sample_count, cfg.seed)?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.layout_seed);
    let mut out = Vec::new();
    for (kind, &count) in SampleKind::ALL.iter().zip(&cfg.counts) {
        for _ in 0..count {
            let xy = [
                rng.random_range(-cfg.placement[0]..=cfg.placement[0]),
                rng.random_range(-cfg.placement[1]..=cfg.placement[1]),
            ];
            let direction = if cfg.axis_aligned {
                [[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]][rng.random_range(0..4usize)]
            } else {
                let h = rng.random_range(0.0..2.0 * PI);
                [libm::cos(h), libm::sin(h)]
            };
            let trajectory = sample_trajectory(cfg, *kind, xy, direction);
            let scene = &scenes[usize::from(*kind == SampleKind::Twist)];
            let mut truth = cfg.truth;
            truth.area = scene.mean_area();
            let sim = simulate_trajectory(scene, &truth, &cfg.tracker, trajectory.iter().map(|(_, p)| p))?;
            let observed = sim.total()?.to_pixels(cfg.pixel_scale);
            out.push(CalibrationSample::new(*kind, trajectory, observed, scene.indenter.clone())?);
        }
    }
    Ok(out)
}
