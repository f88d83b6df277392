use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Sdf, SurfaceSamples};
use crate::numeric::KahanSum2;
use crate::types::{FieldUnit, HydroParams, MarkerField, Pose, TactileGrid};

use super::tracker::{step_tracker_with, TrackerOptions, TrackerState};

/// One in-contact surface point's contribution to the shear field.
#[derive(Debug, Clone, Copy)]
struct Source {
    center: [f64; 2],
    vector: [f64; 2],
}

/// Shear field at `pose_now` from a tracker state already advanced to it.
///
/// Every surface point strictly inside the elastomer contributes its
/// penetration depth times the in-plane part of `-tangential_force`, spread
/// with `exp(-λ_s |(x, y) - ô|²)` around its projected point `ô`.
pub fn shear_field(
    state: &TrackerState,
    pose_now: &Pose,
    surface: &SurfaceSamples,
    elastomer: &Sdf,
    grid: &TactileGrid,
    lambda_s: f64,
) -> Result<MarkerField> {
    if state.len() != surface.len() {
        return Err(Error::DimensionMismatch {
            expected: surface.len(),
            actual: state.len(),
        });
    }
    let mut sources = Vec::new();
    for k in 0..surface.len() {
        let o = pose_now.transform_point(&surface.points[k]);
        let phi = elastomer.eval(&o)?;
        if phi >= 0.0 {
            continue;
        }
        let f_t = state.tangential_force[k];
        if f_t.x == 0.0 && f_t.y == 0.0 {
            continue;
        }
        let o_hat = o + state.offset(k);
        let w = -phi;
        sources.push(Source {
            center: [o_hat.x, o_hat.y],
            vector: [-f_t.x * w, -f_t.y * w],
        });
    }

    let mut field = MarkerField::zeros(*grid, FieldUnit::Meters);
    if sources.is_empty() {
        return Ok(field);
    }
    for (q, out) in field.vectors.iter_mut().enumerate() {
        let [x, y] = grid.point_xy(q);
        let mut acc = KahanSum2::default();
        for s in &sources {
            let dx = x - s.center[0];
            let dy = y - s.center[1];
            let e = libm::exp(-lambda_s * (dx * dx + dy * dy));
            acc.add([s.vector[0] * e, s.vector[1] * e]);
        }
        *out = acc.value();
    }
    Ok(field)
}

/// `dilation + shear` on a shared grid and unit.
pub fn total_field(dilation: &MarkerField, shear: &MarkerField) -> Result<MarkerField> {
    dilation.add(shear)
}

/// Shear field after one hypothetical extra step from `pose_now` to
/// `gravity_xf ∘ pose_now`. `state` is not modified; the recursion continues
/// from the un-augmented state.
#[allow(clippy::too_many_arguments)]
pub fn gravity_augmented_field(
    state: &TrackerState,
    pose_now: &Pose,
    gravity_xf: &Pose,
    surface: &SurfaceSamples,
    elastomer: &Sdf,
    grid: &TactileGrid,
    params: &HydroParams,
    opts: &TrackerOptions,
) -> Result<MarkerField> {
    if gravity_xf.is_identity() {
        return shear_field(state, pose_now, surface, elastomer, grid, params.lambda_s);
    }
    let augmented = gravity_xf.compose(pose_now);
    let mut probe = state.clone();
    step_tracker_with(&mut probe, &augmented, surface, elastomer, params, opts)?;
    shear_field(&probe, &augmented, surface, elastomer, grid, params.lambda_s)
}
