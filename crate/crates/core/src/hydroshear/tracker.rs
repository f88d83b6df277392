use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::geometry::{Sdf, SurfaceSamples};
use crate::numeric::relu;
use crate::types::{HydroParams, Pose};

/// Fraction of the segment between two SDF samples that lies inside the
/// elastomer, assuming the SDF is linear along the segment.
///
/// Both inside gives 1, both outside (or on the surface) gives 0.
#[inline]
pub fn contact_fraction(phi_now: f64, phi_prev: f64) -> f64 {
    let den = phi_prev - phi_now;
    if den == 0.0 {
        return if phi_now < 0.0 { 1.0 } else { 0.0 };
    }
    let num = relu(-phi_now) - relu(-phi_prev);
    (num / den).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerOptions {
    /// A step whose largest per-point displacement exceeds this many meters
    /// is split into equal substeps. Non-positive disables substepping.
    pub substep_threshold: f64,
}

impl Default for TrackerOptions {
    fn default() -> Self {
        Self {
            substep_threshold: 5e-3,
        }
    }
}

/// Per-surface-point state of the force tracker and the unit-stiffness
/// projection tracker, stored as parallel arrays.
///
/// A tracked vector is kept as a scalar normal magnitude and a world-frame
/// tangential vector relative to the point's current outward normal `n`. The
/// full vector is `normal * (-n) + tangential`: the restoring action of the
/// membrane on the indenter. The normal magnitude is never negative, and
/// `-tangential` points along the accumulated sticking displacement.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub normal_force: Vec<f64>,
    pub tangential_force: Vec<Vector3<f64>>,
    pub normal_offset: Vec<f64>,
    pub tangential_offset: Vec<Vector3<f64>>,
    /// World-frame outward indenter normals at the last step.
    pub normals: Vec<Vector3<f64>>,
    /// World-frame surface points at the last step.
    pub points: Vec<Vector3<f64>>,
    /// Elastomer SDF at `points`.
    pub phi: Vec<f64>,
    /// Friction clip was active on the force tracker at the last step.
    pub force_clipped: Vec<bool>,
    /// Friction clip was active on the projection tracker at the last step.
    pub offset_clipped: Vec<bool>,
    pub prev_pose: Option<Pose>,
    pub step_index: u64,
}

impl TrackerState {
    /// Zero state for `m` surface points; no pose seen yet.
    pub fn new(m: usize) -> Self {
        Self {
            normal_force: vec![0.0; m],
            tangential_force: vec![Vector3::zeros(); m],
            normal_offset: vec![0.0; m],
            tangential_offset: vec![Vector3::zeros(); m],
            normals: vec![Vector3::zeros(); m],
            points: vec![Vector3::zeros(); m],
            phi: vec![f64::INFINITY; m],
            force_clipped: vec![false; m],
            offset_clipped: vec![false; m],
            prev_pose: None,
            step_index: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.normal_force.len()
    }

    pub fn is_empty(&self) -> bool {
        self.normal_force.is_empty()
    }

    /// Episode reset: back to the out-of-contact base case.
    pub fn reset(&mut self) {
        *self = Self::new(self.len());
    }

    pub fn in_contact(&self, j: usize) -> bool {
        self.phi[j] < 0.0
    }

    pub fn force(&self, j: usize) -> Vector3<f64> {
        self.tangential_force[j] - self.normals[j] * self.normal_force[j]
    }

    pub fn offset(&self, j: usize) -> Vector3<f64> {
        self.tangential_offset[j] - self.normals[j] * self.normal_offset[j]
    }

    /// Where point `j` is attached on the membrane surface.
    pub fn projected_point(&self, j: usize) -> Vector3<f64> {
        self.points[j] + self.offset(j)
    }

    pub fn any_clipped(&self) -> bool {
        self.force_clipped.iter().chain(&self.offset_clipped).any(|c| *c)
    }
}

/// Stiffnesses and friction of one tracker.
#[derive(Debug, Clone, Copy)]
struct Gains {
    normal: f64,
    tangential: f64,
    friction: f64,
}

/// One recursive update of a tracked normal/tangential pair.
///
/// Returns whether the friction clip was active under a positive normal
/// load. With no load the tangential part is zeroed as well, but that is not
/// counted as slip.
#[inline]
#[allow(clippy::too_many_arguments)]
fn accumulate(
    normal: &mut f64,
    tangential: &mut Vector3<f64>,
    prev_normal: &Vector3<f64>,
    n: &Vector3<f64>,
    d: &Vector3<f64>,
    gains: Gains,
    active: bool,
) -> bool {
    if !active {
        *normal = 0.0;
        *tangential = Vector3::zeros();
        return false;
    }
    if n != prev_normal && (*normal != 0.0 || *tangential != Vector3::zeros()) {
        // re-express the stored vector against the rotated normal
        let full = *tangential - prev_normal * *normal;
        let fn_ = -full.dot(n);
        *normal = fn_;
        *tangential = full + n * fn_;
    }
    let dn = d.dot(n);
    let dt = d - n * dn;
    let f_n = relu(*normal + gains.normal * dn);
    let mut f_t = *tangential - dt * gains.tangential;
    let limit = gains.friction * f_n;
    let mag = f_t.norm();
    let clipped = mag > limit;
    if clipped {
        f_t *= if mag > 0.0 { limit / mag } else { 0.0 };
    }
    *normal = f_n;
    *tangential = f_t;
    clipped && f_n > 0.0
}

pub fn step_tracker(
    state: &mut TrackerState,
    pose_now: &Pose,
    surface: &SurfaceSamples,
    elastomer: &Sdf,
    params: &HydroParams,
) -> Result<()> {
    step_tracker_with(state, pose_now, surface, elastomer, params, &TrackerOptions::default())
}

/// Advances both trackers to `pose_now`.
///
/// The first call after construction or [`TrackerState::reset`] only records
/// the pose: the recursion starts from the out-of-contact base case.
pub fn step_tracker_with(
    state: &mut TrackerState,
    pose_now: &Pose,
    surface: &SurfaceSamples,
    elastomer: &Sdf,
    params: &HydroParams,
    opts: &TrackerOptions,
) -> Result<()> {
    if state.len() != surface.len() {
        return Err(Error::DimensionMismatch {
            expected: surface.len(),
            actual: state.len(),
        });
    }
    let Some(prev_pose) = state.prev_pose else {
        for j in 0..surface.len() {
            let o = pose_now.transform_point(&surface.points[j]);
            state.points[j] = o;
            state.normals[j] = pose_now.rotate_vector(&surface.normals[j]);
            state.phi[j] = elastomer.eval(&o)?;
        }
        state.prev_pose = Some(*pose_now);
        state.step_index += 1;
        return Ok(());
    };

    let substeps = if opts.substep_threshold > 0.0 {
        let max_disp = surface
            .points
            .iter()
            .zip(&state.points)
            .map(|(p, prev)| (pose_now.transform_point(p) - prev).norm())
            .fold(0.0, libm::fmax);
        libm::ceil(max_disp / opts.substep_threshold).max(1.0) as usize
    } else {
        1
    };

    for s in 1..=substeps {
        let pose = if s == substeps {
            *pose_now
        } else {
            prev_pose.interpolate(pose_now, s as f64 / substeps as f64)
        };
        advance(state, &pose, surface, elastomer, params)?;
    }
    state.prev_pose = Some(*pose_now);
    state.step_index += 1;
    Ok(())
}

fn advance(
    state: &mut TrackerState,
    pose: &Pose,
    surface: &SurfaceSamples,
    elastomer: &Sdf,
    params: &HydroParams,
) -> Result<()> {
    let unit = Gains {
        normal: 1.0,
        tangential: 1.0,
        friction: params.projection_friction,
    };
    for j in 0..surface.len() {
        let o_now = pose.transform_point(&surface.points[j]);
        let n = pose.rotate_vector(&surface.normals[j]);
        let phi_now = elastomer.eval(&o_now)?;
        let alpha = contact_fraction(phi_now, state.phi[j]);
        let d = (o_now - state.points[j]) * alpha;
        let active = phi_now < 0.0;
        let gains = Gains {
            normal: params.normal_stiffness * surface.areas[j],
            tangential: params.stiffness * surface.areas[j],
            friction: params.friction,
        };
        let prev_n = state.normals[j];
        state.force_clipped[j] = accumulate(
            &mut state.normal_force[j],
            &mut state.tangential_force[j],
            &prev_n,
            &n,
            &d,
            gains,
            active,
        );
        state.offset_clipped[j] = accumulate(
            &mut state.normal_offset[j],
            &mut state.tangential_offset[j],
            &prev_n,
            &n,
            &d,
            unit,
            active,
        );
        state.points[j] = o_now;
        state.normals[j] = n;
        state.phi[j] = phi_now;
    }
    Ok(())
}

/// Forces recovered from the projection tracker alone, `K·A·offset`.
///
/// Only valid when `E = K`, `mu = mu_hat` and every point carries area
/// `params.area`.
pub fn recover_forces_from_offsets(state: &TrackerState, params: &HydroParams) -> Result<Vec<Vector3<f64>>> {
    if !params.supports_single_tracker() {
        return Err(Error::Configuration(
            "force recovery needs normal_stiffness == stiffness and friction == projection_friction",
        ));
    }
    let ka = params.stiffness * params.area;
    Ok((0..state.len()).map(|j| state.offset(j) * ka).collect())
}
