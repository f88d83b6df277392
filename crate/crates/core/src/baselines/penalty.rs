use nalgebra::Vector3;

use crate::dilation::find_contacts;
use crate::error::{Error, Result};
use crate::geometry::Sdf;
use crate::types::{FieldUnit, MarkerField, Pose, TactileGrid};

/// Gains of the penalty comparator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyParams {
    /// Normal gain per meter of penetration.
    pub k_n: f64,
    /// Tangential gain per m/s of relative velocity.
    pub k_t: f64,
    pub mu: f64,
}

impl PenaltyParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k_n", self.k_n), ("k_t", self.k_t), ("mu", self.mu)] {
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

/// Linear and angular velocity `[vx, vy, vz, wx, wy, wz]` of the indenter
/// origin, finite-differenced between two poses `dt` seconds apart.
pub fn spatial_velocity(prev: &Pose, now: &Pose, dt: f64) -> [f64; 6] {
    let v = (now.translation - prev.translation) / dt;
    let w = (now.rotation * prev.rotation.inverse()).scaled_axis() / dt;
    [v.x, v.y, v.z, w.x, w.y, w.z]
}

/// Memoryless penalty field.
///
/// Each taxel inside the indenter gets the in-plane part of `k_t v_t`, where
/// `v_t` is the indenter's velocity at the taxel with the component along
/// the indenter surface normal removed, clipped to `mu k_n` times the
/// penetration. There is no spreading to taxels outside the contact.
pub fn penalty_field(
    grid: &TactileGrid,
    indenter: &Sdf,
    pose: &Pose,
    velocity: &[f64; 6],
    params: &PenaltyParams,
) -> Result<MarkerField> {
    let contacts = find_contacts(grid, indenter, pose)?;
    let mut field = MarkerField::zeros(*grid, FieldUnit::Meters);
    let v = Vector3::new(velocity[0], velocity[1], velocity[2]);
    let w = Vector3::new(velocity[3], velocity[4], velocity[5]);
    let to_local = pose.inverse();
    for (&i, &pen) in contacts.indices.iter().zip(&contacts.penetrations) {
        let p = grid.point(i);
        let local = to_local.transform_point(&p);
        let n = indenter
            .normal(&local)?
            .map(|n| pose.rotate_vector(&n))
            .unwrap_or_else(|| -Vector3::z());
        let vel = v + w.cross(&(p - pose.translation));
        let vt = vel - n * vel.dot(&n);
        let mut t = [params.k_t * vt.x, params.k_t * vt.y];
        let limit = params.mu * params.k_n * pen;
        let mag = libm::sqrt(t[0] * t[0] + t[1] * t[1]);
        if mag > limit {
            let s = limit / mag;
            t = [t[0] * s, t[1] * s];
        }
        field.vectors[i] = t;
    }
    Ok(field)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains() -> PenaltyParams {
        PenaltyParams {
            k_n: 2.0,
            k_t: 0.01,
            mu: 0.5,
        }
    }

    #[test]
    fn no_contact_or_no_motion_gives_zero() {
        let g = TactileGrid::default();
        let s = Sdf::sphere(0.0175);
        let up = Pose::from_translation(0.0, 0.0, 0.1);
        let f = penalty_field(&g, &s, &up, &[0.1, 0.0, 0.0, 0.0, 0.0, 0.0], &gains()).unwrap();
        assert_eq!(f.norm(), 0.0);
        let press = Pose::from_translation(0.0, 0.0, 0.0175 - 0.002);
        let f = penalty_field(&g, &s, &press, &[0.0; 6], &gains()).unwrap();
        assert_eq!(f.norm(), 0.0);
    }

    #[test]
    fn flat_press_slide_is_uniform_and_clipped() {
        let g = TactileGrid::default();
        let half = Vector3::new(0.05, 0.05, 0.01);
        let b = Sdf::Box { half_extents: half };
        let depth = 1e-3;
        let pose = Pose::from_translation(0.0, 0.0, half.z - depth);
        let p = gains();
        // small velocity: unclipped k_t v
        let f = penalty_field(&g, &b, &pose, &[0.03, 0.04, 0.0, 0.0, 0.0, 0.0], &p).unwrap();
        for v in &f.vectors {
            assert!((v[0] - 3e-4).abs() < 1e-15 && (v[1] - 4e-4).abs() < 1e-15);
        }
        // fast: clipped to mu k_n depth = 1e-3 along the motion
        let f = penalty_field(&g, &b, &pose, &[0.3, 0.4, 0.0, 0.0, 0.0, 0.0], &p).unwrap();
        for v in &f.vectors {
            assert!((v[0] - 6e-4).abs() < 1e-15 && (v[1] - 8e-4).abs() < 1e-15);
        }
    }

    #[test]
    fn velocity_from_poses() {
        let a = Pose::from_translation(0.0, 0.0, 0.01);
        let b = Pose::from_axis_angle(Vector3::z(), 0.01, Vector3::new(0.001, 0.0, 0.01));
        let v = spatial_velocity(&a, &b, 0.01);
        assert!((v[0] - 0.1).abs() < 1e-12 && (v[5] - 1.0).abs() < 1e-9);
    }
}
