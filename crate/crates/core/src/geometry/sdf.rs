use core::f64::consts::PI;

use nalgebra::Vector3;

use super::grid::GridSdf;
use crate::error::{Error, Result};

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }
}

/// Signed distance field; negative inside the solid.
///
/// Analytic shapes are centred on the local origin. Cylinder and torus are
/// symmetric about the local z axis.
#[derive(Debug, Clone, PartialEq)]
pub enum Sdf {
    Sphere { radius: f64 },
    Box { half_extents: Vector3<f64> },
    Cylinder { radius: f64, half_height: f64 },
    Torus { major_radius: f64, minor_radius: f64 },
    /// Solid below the plane `z = height`.
    HalfSpace { height: f64 },
    Grid(GridSdf),
}

const FD_STEP: f64 = 1e-6;

impl Sdf {
    pub fn sphere(radius: f64) -> Self {
        Sdf::Sphere { radius }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Sdf::Sphere { radius } => *radius > 0.0,
            Sdf::Box { half_extents } => half_extents.iter().all(|v| *v > 0.0),
            Sdf::Cylinder {
                radius,
                half_height,
            } => *radius > 0.0 && *half_height > 0.0,
            Sdf::Torus {
                major_radius,
                minor_radius,
            } => *minor_radius > 0.0 && major_radius > minor_radius,
            Sdf::HalfSpace { height } => height.is_finite(),
            Sdf::Grid(g) => g.validate().is_ok(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Geometry("shape parameters must be positive"))
        }
    }

    /// Signed distance at `p`. Only lattice fields can fail.
    #[inline]
    pub fn eval(&self, p: &Vector3<f64>) -> Result<f64> {
        match self {
            Sdf::Grid(g) => g.eval(p),
            _ => Ok(self.eval_analytic(p)),
        }
    }

    #[inline]
    fn eval_analytic(&self, p: &Vector3<f64>) -> f64 {
        match self {
            Sdf::Sphere { radius } => p.norm() - radius,
            Sdf::Box { half_extents } => {
                let q = p.abs() - half_extents;
                let outside = q.sup(&Vector3::zeros()).norm();
                let inside = libm::fmin(q.max(), 0.0);
                outside + inside
            }
            Sdf::Cylinder {
                radius,
                half_height,
            } => {
                let dx = libm::hypot(p.x, p.y) - radius;
                let dz = libm::fabs(p.z) - half_height;
                let inside = libm::fmin(libm::fmax(dx, dz), 0.0);
                let outside = libm::hypot(libm::fmax(dx, 0.0), libm::fmax(dz, 0.0));
                inside + outside
            }
            Sdf::Torus {
                major_radius,
                minor_radius,
            } => {
                let qx = libm::hypot(p.x, p.y) - major_radius;
                libm::hypot(qx, p.z) - minor_radius
            }
            Sdf::HalfSpace { height } => p.z - height,
            Sdf::Grid(_) => unreachable!("lattice fields are evaluated through GridSdf"),
        }
    }

    /// Gradient of the field. Closed form for sphere, torus and half-space,
    /// central differences otherwise.
    pub fn gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        match self {
            Sdf::Sphere { .. } => {
                let n = p.norm();
                Ok(if n > 0.0 { p / n } else { Vector3::z() })
            }
            Sdf::HalfSpace { .. } => Ok(Vector3::z()),
            Sdf::Torus { major_radius, .. } => {
                let rho = libm::hypot(p.x, p.y);
                if rho == 0.0 {
                    // degenerate on the symmetry axis
                    return Ok(-Vector3::x());
                }
                let qx = rho - major_radius;
                let len = libm::hypot(qx, p.z);
                if len == 0.0 {
                    return Ok(Vector3::z());
                }
                let radial = qx / len;
                Ok(Vector3::new(radial * p.x / rho, radial * p.y / rho, p.z / len))
            }
            Sdf::Grid(g) => g.gradient(p),
            _ => {
                let mut g = Vector3::zeros();
                for axis in 0..3 {
                    let mut e = Vector3::zeros();
                    e[axis] = FD_STEP;
                    g[axis] = (self.eval_analytic(&(p + e)) - self.eval_analytic(&(p - e)))
                        / (2.0 * FD_STEP);
                }
                Ok(g)
            }
        }
    }

    /// Unit-length gradient, or `None` where the gradient vanishes.
    pub fn normal(&self, p: &Vector3<f64>) -> Result<Option<Vector3<f64>>> {
        let g = self.gradient(p)?;
        let n = g.norm();
        Ok((n > 1e-12).then(|| g / n))
    }

    /// Bounding box of the solid; `None` for unbounded fields.
    pub fn bounds(&self) -> Option<Aabb> {
        let half = match self {
            Sdf::Sphere { radius } => Vector3::repeat(*radius),
            Sdf::Box { half_extents } => *half_extents,
            Sdf::Cylinder {
                radius,
                half_height,
            } => Vector3::new(*radius, *radius, *half_height),
            Sdf::Torus {
                major_radius,
                minor_radius,
            } => {
                let r = major_radius + minor_radius;
                Vector3::new(r, r, *minor_radius)
            }
            Sdf::HalfSpace { .. } => return None,
            Sdf::Grid(g) => return Some(g.solid_bounds()),
        };
        Some(Aabb {
            min: -half,
            max: half,
        })
    }

    /// Total surface area, m². Lattice fields use the stored mesh area when
    /// available and a smeared-delta estimate otherwise.
    pub fn surface_area(&self) -> Option<f64> {
        match self {
            Sdf::Sphere { radius } => Some(4.0 * PI * radius * radius),
            Sdf::Box { half_extents: h } => Some(8.0 * (h.x * h.y + h.y * h.z + h.z * h.x)),
            Sdf::Cylinder {
                radius,
                half_height,
            } => Some(2.0 * PI * radius * radius + 2.0 * PI * radius * 2.0 * half_height),
            Sdf::Torus {
                major_radius,
                minor_radius,
            } => Some(4.0 * PI * PI * major_radius * minor_radius),
            Sdf::HalfSpace { .. } => None,
            Sdf::Grid(g) => Some(g.surface_area()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const R: f64 = 0.0175;

    #[test]
    fn sphere_values() {
        let s = Sdf::sphere(R);
        assert!((s.eval(&Vector3::new(0.035, 0.0, 0.0)).unwrap() - 0.0175).abs() < 1e-15);
        assert_eq!(s.eval(&Vector3::zeros()).unwrap(), -0.0175);
    }

    #[test]
    fn sphere_gradient_is_radial() {
        let s = Sdf::sphere(R);
        let g = s.gradient(&Vector3::new(R + 0.003, 0.0, 0.0)).unwrap();
        assert!((g - Vector3::x()).norm() < 1e-6);
    }

    #[test]
    fn halfspace_gradient_is_up() {
        let h = Sdf::HalfSpace { height: 0.0 };
        for p in [Vector3::new(1.0, 2.0, 3.0), Vector3::new(-0.1, 0.0, -4.0)] {
            assert_eq!(h.gradient(&p).unwrap(), Vector3::z());
        }
        assert!((h.eval(&Vector3::new(0.0, 0.0, 0.001)).unwrap() - 0.001).abs() < 1e-18);
    }

    #[test]
    fn box_cylinder_torus_values() {
        let b = Sdf::Box {
            half_extents: Vector3::new(0.01, 0.02, 0.03),
        };
        assert!((b.eval(&Vector3::new(0.015, 0.0, 0.0)).unwrap() - 0.005).abs() < 1e-15);
        assert!((b.eval(&Vector3::zeros()).unwrap() + 0.01).abs() < 1e-15);
        // corner region: distance to the corner
        let corner = b.eval(&Vector3::new(0.013, 0.024, 0.03)).unwrap();
        assert!((corner - 0.005).abs() < 1e-12);

        let c = Sdf::Cylinder {
            radius: 0.01,
            half_height: 0.02,
        };
        assert!((c.eval(&Vector3::new(0.0, 0.0, 0.025)).unwrap() - 0.005).abs() < 1e-15);
        assert!((c.eval(&Vector3::new(0.012, 0.0, 0.0)).unwrap() - 0.002).abs() < 1e-15);

        let t = Sdf::Torus {
            major_radius: 0.02,
            minor_radius: 0.005,
        };
        assert!((t.eval(&Vector3::new(0.02, 0.0, 0.0)).unwrap() + 0.005).abs() < 1e-15);
        assert!((t.eval(&Vector3::zeros()).unwrap() - 0.015).abs() < 1e-15);
    }

    /// Random points whose nearest-feature structure is unambiguous for each
    /// shape, i.e. at least a margin away from the medial axis.
    fn eikonal_points(shape: &Sdf, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vector3<f64>> {
        let b = shape.bounds().unwrap();
        let mut out = Vec::new();
        while out.len() < n {
            let p = Vector3::new(
                rng.random_range(b.min.x * 1.5..b.max.x * 1.5),
                rng.random_range(b.min.y * 1.5..b.max.y * 1.5),
                rng.random_range(b.min.z * 1.5..b.max.z * 1.5),
            );
            let phi = shape.eval(&p).unwrap();
            let margin = 1e-4;
            let far_from_medial = match shape {
                Sdf::Sphere { .. } => p.norm() > margin,
                Sdf::Box { half_extents } => {
                    if phi < 0.0 {
                        // distances to the two nearest faces must differ
                        let mut d: Vec<f64> =
                            (0..3).map(|i| half_extents[i] - p[i].abs()).collect();
                        d.sort_by(|a, b| a.partial_cmp(b).unwrap());
                        d[1] - d[0] > margin
                    } else {
                        true
                    }
                }
                Sdf::Cylinder {
                    radius,
                    half_height,
                } => {
                    let dx = radius - libm::hypot(p.x, p.y);
                    let dz = half_height - p.z.abs();
                    phi >= 0.0 || (dx - dz).abs() > margin
                }
                Sdf::Torus { major_radius, .. } => {
                    let q = libm::hypot(libm::hypot(p.x, p.y) - major_radius, p.z);
                    q > margin && libm::hypot(p.x, p.y) > margin
                }
                _ => true,
            };
            if far_from_medial {
                out.push(p);
            }
        }
        out
    }

    #[test]
    fn analytic_shapes_satisfy_eikonal() {
        let shapes = [
            Sdf::sphere(R),
            Sdf::Box {
                half_extents: Vector3::new(0.01, 0.015, 0.02),
            },
            Sdf::Cylinder {
                radius: 0.01,
                half_height: 0.02,
            },
            Sdf::Torus {
                major_radius: 0.02,
                minor_radius: 0.006,
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for s in &shapes {
            for p in eikonal_points(s, &mut rng, 10_000) {
                let g = s.gradient(&p).unwrap().norm();
                assert!((g - 1.0).abs() < 1e-3, "{s:?} at {p:?}: |grad| = {g}");
            }
        }
    }

    #[test]
    fn analytic_areas() {
        assert!((Sdf::sphere(1.0).surface_area().unwrap() - 4.0 * PI).abs() < 1e-12);
        let t = Sdf::Torus {
            major_radius: 2.0,
            minor_radius: 0.5,
        };
        assert!((t.surface_area().unwrap() - 4.0 * PI * PI).abs() < 1e-12);
        assert!(Sdf::HalfSpace { height: 0.0 }.surface_area().is_none());
    }
}
