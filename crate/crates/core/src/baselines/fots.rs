use core::f64::consts::PI;

use crate::dilation::ContactSet;
use crate::error::{Error, Result};
use crate::numeric::{norm2, KahanSum2};
use crate::types::{FieldUnit, MarkerField, Pose, TactileGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FotsParams {
    pub lambda_d: f64,
    pub lambda_s: f64,
    pub lambda_t: f64,
    /// Largest translation passed to the shear term, meters.
    pub shear_max: f64,
    /// Largest rotation passed to the twist term, radians.
    pub twist_max: f64,
}

impl FotsParams {
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("lambda_d", self.lambda_d),
            ("lambda_s", self.lambda_s),
            ("lambda_t", self.lambda_t),
            ("shear_max", self.shear_max),
            ("twist_max", self.twist_max),
        ];
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be strictly positive and finite",
                });
            }
        }
        Ok(())
    }
}

/// Where the shear and twist Gaussians are centred.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CenterMode {
    /// The object frame origin projected on the sensor plane, as in the
    /// original formulation.
    ObjectFrame,
    /// Penetration-weighted centroid of the first contact patch.
    InitialContactPatch,
}

/// In-plane object motion since first contact.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Se2Motion {
    pub translation: [f64; 2],
    pub rotation: f64,
}

impl Se2Motion {
    /// Planar translation and yaw change from `from` to `to`, with the angle
    /// wrapped to (-π, π].
    pub fn between(from: &Pose, to: &Pose) -> Self {
        let mut dtheta = to.yaw() - from.yaw();
        while dtheta > PI {
            dtheta -= 2.0 * PI;
        }
        while dtheta <= -PI {
            dtheta += 2.0 * PI;
        }
        Self {
            translation: [
                to.translation.x - from.translation.x,
                to.translation.y - from.translation.y,
            ],
            rotation: dtheta,
        }
    }
}

/// Per-environment FOTS state. The rest markers `M0` are the grid points.
#[derive(Debug, Clone, PartialEq)]
pub struct FotsState {
    pub center_mode: CenterMode,
    /// Set once at first contact in [`CenterMode::InitialContactPatch`].
    pub reference_center: Option<[f64; 2]>,
    /// Pose at first contact; motion is accumulated from here.
    pub contact_pose: Option<Pose>,
    pub grid: TactileGrid,
}

impl FotsState {
    pub fn new(center_mode: CenterMode, grid: TactileGrid) -> Self {
        Self {
            center_mode,
            reference_center: None,
            contact_pose: None,
            grid,
        }
    }

    pub fn reset(&mut self) {
        self.reference_center = None;
        self.contact_pose = None;
    }

    /// The Gaussian centre `G` for an object currently at `pose`.
    pub fn center(&self, pose: &Pose) -> Result<[f64; 2]> {
        match self.center_mode {
            CenterMode::ObjectFrame => Ok([pose.translation.x, pose.translation.y]),
            CenterMode::InitialContactPatch => self
                .reference_center
                .ok_or(Error::FotsState("contact patch centre not set")),
        }
    }
}

/// `Σ_i Δh_i (M0 - C_i) exp(-λ_d |M0 - C_i|²)` with the penetrations as the
/// height map.
pub fn fots_dilate(grid: &TactileGrid, contacts: &ContactSet, lambda_d: f64) -> MarkerField {
    crate::dilation::dilation_field(grid, contacts, lambda_d)
}

/// Clamps `v` to at most `max` in norm.
fn clamp_norm(v: [f64; 2], max: f64) -> [f64; 2] {
    let n = norm2(v);
    if n > max {
        let s = max / n;
        [v[0] * s, v[1] * s]
    } else {
        v
    }
}

/// `min{Δs, Δs_max} exp(-λ_s |M0 - G|²)`.
pub fn fots_shear(grid: &TactileGrid, delta_s: [f64; 2], center: [f64; 2], lambda_s: f64, shear_max: f64) -> MarkerField {
    let s = clamp_norm(delta_s, shear_max);
    let mut field = MarkerField::zeros(*grid, FieldUnit::Meters);
    if s == [0.0, 0.0] {
        return field;
    }
    for (q, out) in field.vectors.iter_mut().enumerate() {
        let [x, y] = grid.point_xy(q);
        let (dx, dy) = (x - center[0], y - center[1]);
        let e = libm::exp(-lambda_s * (dx * dx + dy * dy));
        *out = [s[0] * e, s[1] * e];
    }
    field
}

/// `min{Δθ, Δθ_max} R90 (M0 - G) exp(-λ_t |M0 - G|²)`, with the clamp
/// symmetric in sign. The radial vector is turned a quarter turn so that a
/// positive twist circulates counter-clockwise.
pub fn fots_twist(grid: &TactileGrid, delta_theta: f64, center: [f64; 2], lambda_t: f64, twist_max: f64) -> MarkerField {
    let th = delta_theta.clamp(-twist_max, twist_max);
    let mut field = MarkerField::zeros(*grid, FieldUnit::Meters);
    if th == 0.0 {
        return field;
    }
    for (q, out) in field.vectors.iter_mut().enumerate() {
        let [x, y] = grid.point_xy(q);
        let (dx, dy) = (x - center[0], y - center[1]);
        let e = th * libm::exp(-lambda_t * (dx * dx + dy * dy));
        *out = [-dy * e, dx * e];
    }
    field
}

/// `M1 - M0` from scratch, given the contacts, the centre and the motion
/// since first contact.
pub fn fots_field(
    params: &FotsParams,
    grid: &TactileGrid,
    contacts: &ContactSet,
    center: [f64; 2],
    motion: &Se2Motion,
) -> MarkerField {
    let d = fots_dilate(grid, contacts, params.lambda_d);
    let s = fots_shear(grid, motion.translation, center, params.lambda_s, params.shear_max);
    let t = fots_twist(grid, motion.rotation, center, params.lambda_t, params.twist_max);
    let vectors = d
        .vectors
        .iter()
        .zip(&s.vectors)
        .zip(&t.vectors)
        .map(|((a, b), c)| {
            let mut acc = KahanSum2::default();
            acc.add(*a);
            acc.add(*b);
            acc.add(*c);
            acc.value()
        })
        .collect();
    MarkerField {
        grid: *grid,
        vectors,
        unit: FieldUnit::Meters,
    }
}

/// Advances the state to `pose` and returns the displacement field.
///
/// Without contact the state is cleared and the field is zero. The first
/// contact fixes the reference pose and, in patch mode, the centre.
pub fn fots_step(params: &FotsParams, state: &mut FotsState, pose: &Pose, contacts: &ContactSet) -> Result<MarkerField> {
    if contacts.is_empty() {
        state.reset();
        return Ok(MarkerField::zeros(state.grid, FieldUnit::Meters));
    }
    if state.contact_pose.is_none() {
        state.contact_pose = Some(*pose);
        if state.center_mode == CenterMode::InitialContactPatch {
            state.reference_center = contacts.weighted_centroid(&state.grid);
        }
    }
    let start = state.contact_pose.ok_or(Error::FotsState("no contact pose"))?;
    let center = state.center(pose)?;
    let motion = Se2Motion::between(&start, pose);
    Ok(fots_field(params, &state.grid, contacts, center, &motion))
}
