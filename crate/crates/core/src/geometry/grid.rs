use alloc::vec::Vec;

use nalgebra::Vector3;

use super::mesh::TriangleMesh;
use super::sdf::{Aabb, Sdf};
use crate::error::{Error, Result};

/// Signed distances sampled on a regular lattice, trilinearly interpolated.
///
/// Samples are stored with z varying fastest: the value at lattice node
/// `(i, j, k)` lives at `(i * ny + j) * nz + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSdf {
    dims: [usize; 3],
    min: Vector3<f64>,
    max: Vector3<f64>,
    values: Vec<f64>,
    /// When set, queries outside the lattice are answered from the nearest
    /// boundary point plus the distance to it.
    pub extrapolate: bool,
    area: Option<f64>,
}

impl GridSdf {
    pub fn new(dims: [usize; 3], min: Vector3<f64>, max: Vector3<f64>, values: Vec<f64>) -> Result<Self> {
        let g = Self {
            dims,
            min,
            max,
            values,
            extrapolate: false,
            area: None,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&n| n < 2) {
            return Err(Error::Geometry("lattice needs at least two nodes per axis"));
        }
        if (0..3).any(|a| !(self.max[a] > self.min[a])) {
            return Err(Error::Geometry("lattice bounds are empty"));
        }
        let n = self.dims[0] * self.dims[1] * self.dims[2];
        if self.values.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: self.values.len(),
            });
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Geometry("lattice contains non-finite samples"));
        }
        Ok(())
    }

    /// Samples `source` on a lattice covering `[min, max]` with node spacing
    /// at most `cell`.
    pub fn sample(source: &Sdf, min: Vector3<f64>, max: Vector3<f64>, cell: f64) -> Result<Self> {
        let dims = lattice_dims(&min, &max, cell)?;
        let mut g = Self {
            dims,
            min,
            max,
            values: Vec::with_capacity(dims[0] * dims[1] * dims[2]),
            extrapolate: false,
            area: source.surface_area(),
        };
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let p = g.node(i, j, k);
                    g.values.push(source.eval(&p)?);
                }
            }
        }
        g.validate()?;
        Ok(g)
    }

    /// Exact unsigned distance to the closest triangle, signed by the
    /// generalized winding number. `padding` is added around the mesh bounds.
    pub fn from_mesh(mesh: &TriangleMesh, cell: f64, padding: f64) -> Result<Self> {
        let b = mesh.bounds().ok_or(Error::Geometry("empty mesh"))?;
        let pad = Vector3::repeat(padding);
        let (min, max) = (b.min - pad, b.max + pad);
        let dims = lattice_dims(&min, &max, cell)?;
        let mut g = Self {
            dims,
            min,
            max,
            values: Vec::with_capacity(dims[0] * dims[1] * dims[2]),
            extrapolate: false,
            area: Some(mesh.area()),
        };
        for i in 0..dims[0] {
            for j in 0..dims[1] {
                for k in 0..dims[2] {
                    let p = g.node(i, j, k);
                    g.values.push(mesh.signed_distance(&p));
                }
            }
        }
        g.validate()?;
        Ok(g)
    }

    pub fn with_extrapolation(mut self, on: bool) -> Self {
        self.extrapolate = on;
        self
    }

    pub fn with_surface_area(mut self, area: Option<f64>) -> Self {
        self.area = area;
        self
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn min(&self) -> Vector3<f64> {
        self.min
    }

    pub fn max(&self) -> Vector3<f64> {
        self.max
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn stored_surface_area(&self) -> Option<f64> {
        self.area
    }

    pub fn cell(&self) -> Vector3<f64> {
        let e = self.max - self.min;
        Vector3::new(
            e.x / (self.dims[0] - 1) as f64,
            e.y / (self.dims[1] - 1) as f64,
            e.z / (self.dims[2] - 1) as f64,
        )
    }

    fn node(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        let c = self.cell();
        Vector3::new(
            self.min.x + i as f64 * c.x,
            self.min.y + j as f64 * c.y,
            self.min.z + k as f64 * c.z,
        )
    }

    #[inline]
    fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.dims[1] + j) * self.dims[2] + k]
    }

    fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn eval(&self, p: &Vector3<f64>) -> Result<f64> {
        if self.contains(p) {
            return Ok(self.interpolate(p));
        }
        if !self.extrapolate || !p.iter().all(|v| v.is_finite()) {
            return Err(Error::OutOfBounds {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        let clamped = p.sup(&self.min).inf(&self.max);
        Ok(self.interpolate(&clamped) + (p - clamped).norm())
    }

    fn interpolate(&self, p: &Vector3<f64>) -> f64 {
        let c = self.cell();
        let mut idx = [0usize; 3];
        let mut t = [0.0f64; 3];
        for a in 0..3 {
            let u = (p[a] - self.min[a]) / c[a];
            let i = libm::floor(u).max(0.0) as usize;
            let i = i.min(self.dims[a] - 2);
            idx[a] = i;
            t[a] = (u - i as f64).clamp(0.0, 1.0);
        }
        let [i, j, k] = idx;
        let [tx, ty, tz] = t;
        let lerp = |a: f64, b: f64, s: f64| a + (b - a) * s;
        let c00 = lerp(self.at(i, j, k), self.at(i + 1, j, k), tx);
        let c10 = lerp(self.at(i, j + 1, k), self.at(i + 1, j + 1, k), tx);
        let c01 = lerp(self.at(i, j, k + 1), self.at(i + 1, j, k + 1), tx);
        let c11 = lerp(self.at(i, j + 1, k + 1), self.at(i + 1, j + 1, k + 1), tx);
        lerp(lerp(c00, c10, ty), lerp(c01, c11, ty), tz)
    }

    /// Central differences with a half-cell step, one-sided at the lattice
    /// boundary.
    pub fn gradient(&self, p: &Vector3<f64>) -> Result<Vector3<f64>> {
        if !self.extrapolate && !self.contains(p) {
            return Err(Error::OutOfBounds {
                x: p.x,
                y: p.y,
                z: p.z,
            });
        }
        let c = self.cell();
        let mut g = Vector3::zeros();
        for a in 0..3 {
            let h = 0.5 * c[a];
            let mut lo = *p;
            let mut hi = *p;
            lo[a] = (p[a] - h).max(self.min[a]);
            hi[a] = (p[a] + h).min(self.max[a]);
            if self.extrapolate {
                lo[a] = p[a] - h;
                hi[a] = p[a] + h;
            }
            let span = hi[a] - lo[a];
            g[a] = (self.eval(&hi)? - self.eval(&lo)?) / span;
        }
        Ok(g)
    }

    /// Lattice extent; the solid is contained in it.
    pub fn solid_bounds(&self) -> Aabb {
        Aabb {
            min: self.min,
            max: self.max,
        }
    }

    /// Stored area, or `∫ δ_ε(φ) dV` with a cosine-smoothed delta of
    /// half-width 1.5 cells.
    pub fn surface_area(&self) -> f64 {
        if let Some(a) = self.area {
            return a;
        }
        let c = self.cell();
        let eps = 1.5 * c.max();
        let dv = c.x * c.y * c.z;
        let mut sum = crate::numeric::KahanSum::new();
        for &phi in &self.values {
            if libm::fabs(phi) < eps {
                let delta = (1.0 + libm::cos(core::f64::consts::PI * phi / eps)) / (2.0 * eps);
                sum.add(delta * dv);
            }
        }
        sum.value()
    }
}

fn lattice_dims(min: &Vector3<f64>, max: &Vector3<f64>, cell: f64) -> Result<[usize; 3]> {
    if !(cell > 0.0) {
        return Err(Error::Geometry("lattice cell must be positive"));
    }
    let mut dims = [0usize; 3];
    for a in 0..3 {
        let e = max[a] - min[a];
        if !(e > 0.0) {
            return Err(Error::Geometry("lattice bounds are empty"));
        }
        dims[a] = libm::ceil(e / cell - 1e-9) as usize + 1;
    }
    Ok(dims)
}
