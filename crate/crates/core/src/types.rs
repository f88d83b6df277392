//! Shared domain types.
//!
//! Frame convention for the sensor plane: x to the right and y up in the
//! marker image, z pointing out of the membrane towards the indenter. The
//! elastomer occupies `z <= plane_height`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Quaternion, Unit, UnitQuaternion, Vector3};

use crate::error::{Error, Result};

/// Rigid transform of the indenter expressed in the elastomer frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: UnitQuaternion<f64>,
    pub translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: UnitQuaternion::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn new(rotation: UnitQuaternion<f64>, translation: Vector3<f64>) -> Self {
        Self {
            rotation,
            translation,
        }
    }

    pub fn from_translation(x: f64, y: f64, z: f64) -> Self {
        Self::new(UnitQuaternion::identity(), Vector3::new(x, y, z))
    }

    /// Rotation of `angle` radians about `axis`, followed by `translation`.
    pub fn from_axis_angle(axis: Vector3<f64>, angle: f64, translation: Vector3<f64>) -> Self {
        let rotation = UnitQuaternion::from_axis_angle(&Unit::new_normalize(axis), angle);
        Self::new(rotation, translation)
    }

    /// Parses `[qw, qx, qy, qz, tx, ty, tz]`.
    ///
    /// Quaternions within 1e-6 of unit norm are accepted and renormalized,
    /// which tolerates the rounding of text serializations.
    pub fn from_array(v: [f64; 7]) -> Result<Self> {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidPose("non-finite component"));
        }
        let q = Quaternion::new(v[0], v[1], v[2], v[3]);
        let n = q.norm();
        if (n - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidPose("quaternion is not unit norm"));
        }
        Ok(Self::new(
            UnitQuaternion::new_normalize(q),
            Vector3::new(v[4], v[5], v[6]),
        ))
    }

    pub fn to_array(&self) -> [f64; 7] {
        let q = self.rotation.quaternion();
        [
            q.w,
            q.i,
            q.j,
            q.k,
            self.translation.x,
            self.translation.y,
            self.translation.z,
        ]
    }

    /// `self ∘ other`: the result maps a point `p` to `self(other(p))`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let mut rotation = self.rotation * other.rotation;
        rotation.renormalize();
        Pose {
            rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rotation = self.rotation.inverse();
        Pose {
            rotation,
            translation: -(rotation * self.translation),
        }
    }

    #[inline]
    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    #[inline]
    pub fn rotate_vector(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * v
    }

    pub fn transform_points(&self, points: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
        points.iter().map(|p| self.transform_point(p)).collect()
    }

    /// Interpolates translation linearly and rotation by slerp; `t` in [0, 1].
    pub fn interpolate(&self, other: &Pose, t: f64) -> Pose {
        let rotation = self
            .rotation
            .try_slerp(&other.rotation, t, 1e-12)
            .unwrap_or(if t < 0.5 { self.rotation } else { other.rotation });
        Pose {
            rotation,
            translation: self.translation.lerp(&other.translation, t),
        }
    }

    /// Heading of the rotated x axis about the sensor normal, in radians.
    pub fn yaw(&self) -> f64 {
        let x = self.rotation * Vector3::x();
        libm::atan2(x.y, x.x)
    }

    pub fn is_identity(&self) -> bool {
        *self == Pose::identity()
    }
}

/// Regular lattice of marker query points on the undeformed membrane.
///
/// Point `i` sits at row `i / cols`, column `i % cols`, at
/// `origin + (col * spacing.x, row * spacing.y)` on the plane `z = plane_height`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TactileGrid {
    pub rows: usize,
    pub cols: usize,
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub plane_height: f64,
}

/// Width of the active sensing area assumed for the default grid, meters.
pub const DEFAULT_SENSOR_WIDTH: f64 = 0.065;

impl Default for TactileGrid {
    /// 7 x 9 markers centred on the origin, spaced evenly across a 65 mm wide
    /// active area.
    fn default() -> Self {
        Self::centered(7, 9, DEFAULT_SENSOR_WIDTH / 9.0, 0.0)
    }
}

impl TactileGrid {
    /// Square-pitch grid centred on `(0, 0)`.
    pub fn centered(rows: usize, cols: usize, pitch: f64, plane_height: f64) -> Self {
        let ox = -0.5 * (cols.saturating_sub(1)) as f64 * pitch;
        let oy = -0.5 * (rows.saturating_sub(1)) as f64 * pitch;
        Self {
            rows,
            cols,
            origin: [ox, oy],
            spacing: [pitch, pitch],
            plane_height,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "rows and cols must be positive",
            });
        }
        if !(self.spacing[0] > 0.0 && self.spacing[1] > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid.spacing",
                reason: "must be positive",
            });
        }
        if !(self.origin.iter().all(|v| v.is_finite()) && self.plane_height.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "grid",
                reason: "origin and plane height must be finite",
            });
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn point_xy(&self, index: usize) -> [f64; 2] {
        let r = index / self.cols;
        let c = index % self.cols;
        [
            self.origin[0] + c as f64 * self.spacing[0],
            self.origin[1] + r as f64 * self.spacing[1],
        ]
    }

    #[inline]
    pub fn point(&self, index: usize) -> Vector3<f64> {
        let [x, y] = self.point_xy(index);
        Vector3::new(x, y, self.plane_height)
    }

    pub fn points_xy(&self) -> Vec<[f64; 2]> {
        (0..self.len()).map(|i| self.point_xy(i)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldUnit {
    Meters,
    Pixels,
}

impl FieldUnit {
    pub fn tag(self) -> &'static str {
        match self {
            FieldUnit::Meters => "m",
            FieldUnit::Pixels => "px",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "m" => Some(FieldUnit::Meters),
            "px" => Some(FieldUnit::Pixels),
            _ => None,
        }
    }
}

/// Camera scale in pixels per meter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PixelScale(f64);

impl Default for PixelScale {
    /// GelSight Mini: 1000 px across 0.065 m.
    fn default() -> Self {
        PixelScale(1000.0 / 0.065)
    }
}

impl PixelScale {
    pub fn new(pixels_per_meter: f64) -> Result<Self> {
        if pixels_per_meter > 0.0 && pixels_per_meter.is_finite() {
            Ok(PixelScale(pixels_per_meter))
        } else {
            Err(Error::InvalidParameter {
                name: "pixel_scale",
                reason: "must be positive and finite",
            })
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// One displacement vector per grid point, row-major, with an explicit unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerField {
    pub grid: TactileGrid,
    pub vectors: Vec<[f64; 2]>,
    pub unit: FieldUnit,
}

impl MarkerField {
    pub fn zeros(grid: TactileGrid, unit: FieldUnit) -> Self {
        Self {
            grid,
            vectors: vec![[0.0; 2]; grid.len()],
            unit,
        }
    }

    pub fn new(grid: TactileGrid, vectors: Vec<[f64; 2]>, unit: FieldUnit) -> Result<Self> {
        if vectors.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: vectors.len(),
            });
        }
        Ok(Self {
            grid,
            vectors,
            unit,
        })
    }

    /// Returns the field expressed in `unit`, scaling at most once.
    pub fn converted(&self, unit: FieldUnit, scale: PixelScale) -> MarkerField {
        let factor = match (self.unit, unit) {
            (FieldUnit::Meters, FieldUnit::Pixels) => scale.value(),
            (FieldUnit::Pixels, FieldUnit::Meters) => 1.0 / scale.value(),
            _ => return self.clone(),
        };
        MarkerField {
            grid: self.grid,
            vectors: self
                .vectors
                .iter()
                .map(|v| [v[0] * factor, v[1] * factor])
                .collect(),
            unit,
        }
    }

    pub fn to_pixels(&self, scale: PixelScale) -> MarkerField {
        self.converted(FieldUnit::Pixels, scale)
    }

    pub fn to_meters(&self, scale: PixelScale) -> MarkerField {
        self.converted(FieldUnit::Meters, scale)
    }

    /// Elementwise sum of two fields on the same grid and unit.
    pub fn add(&self, other: &MarkerField) -> Result<MarkerField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        if self.unit != other.unit {
            return Err(Error::UnitMismatch);
        }
        Ok(MarkerField {
            grid: self.grid,
            vectors: self
                .vectors
                .iter()
                .zip(&other.vectors)
                .map(|(a, b)| [a[0] + b[0], a[1] + b[1]])
                .collect(),
            unit: self.unit,
        })
    }

    pub fn scaled(&self, factor: f64) -> MarkerField {
        MarkerField {
            grid: self.grid,
            vectors: self
                .vectors
                .iter()
                .map(|v| [v[0] * factor, v[1] * factor])
                .collect(),
            unit: self.unit,
        }
    }

    /// Frobenius norm over all components.
    pub fn norm(&self) -> f64 {
        libm::sqrt(
            self.vectors
                .iter()
                .map(|v| v[0] * v[0] + v[1] * v[1])
                .sum::<f64>(),
        )
    }

    pub fn max_abs_diff(&self, other: &MarkerField) -> f64 {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| libm::fmax(libm::fabs(a[0] - b[0]), libm::fabs(a[1] - b[1])))
            .fold(0.0, libm::fmax)
    }
}

/// Parameters of the hydroelastic shear model.
///
/// `lambda_d` and `lambda_s` are Gaussian attenuation rates in 1/m² applied
/// to planar distances in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydroParams {
    pub lambda_d: f64,
    pub lambda_s: f64,
    /// Tangential stiffness `K` per unit area.
    pub stiffness: f64,
    /// Normal stiffness `E` per unit area.
    pub normal_stiffness: f64,
    /// Friction coefficient of the force tracker.
    pub friction: f64,
    /// Friction coefficient of the unit-stiffness projection tracker.
    pub projection_friction: f64,
    /// Per-point area assumed when the surface is treated as uniform, m².
    pub area: f64,
}

impl HydroParams {
    /// Parameter set satisfying the single-tracker assumptions:
    /// `E = K`, `mu_hat = mu` and one shared area.
    pub fn single_tracker(lambda_d: f64, lambda_s: f64, stiffness: f64, friction: f64, area: f64) -> Self {
        Self {
            lambda_d,
            lambda_s,
            stiffness,
            normal_stiffness: stiffness,
            friction,
            projection_friction: friction,
            area,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("lambda_d", self.lambda_d),
            ("lambda_s", self.lambda_s),
            ("stiffness", self.stiffness),
            ("normal_stiffness", self.normal_stiffness),
            ("friction", self.friction),
            ("projection_friction", self.projection_friction),
            ("area", self.area),
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

    pub fn supports_single_tracker(&self) -> bool {
        self.normal_stiffness == self.stiffness && self.friction == self.projection_friction
    }
}
