use alloc::vec::Vec;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sdf::Sdf;
use crate::error::{Error, Result};

/// Surface sample count used when none is configured.
pub const DEFAULT_SAMPLE_COUNT: usize = 2048;

/// On-surface indenter points with outward unit normals and per-point areas,
/// all in the indenter's local frame.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceSamples {
    pub points: Vec<Vector3<f64>>,
    pub normals: Vec<Vector3<f64>>,
    pub areas: Vec<f64>,
}

impl SurfaceSamples {
    pub fn new(points: Vec<Vector3<f64>>, normals: Vec<Vector3<f64>>, areas: Vec<f64>) -> Result<Self> {
        let n = points.len();
        for len in [normals.len(), areas.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: len,
                });
            }
        }
        if normals.iter().any(|v| (v.norm() - 1.0).abs() > 1e-6) {
            return Err(Error::Geometry("surface normals must be unit length"));
        }
        if areas.iter().any(|a| !(*a > 0.0)) {
            return Err(Error::Geometry("surface areas must be positive"));
        }
        Ok(Self {
            points,
            normals,
            areas,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// The shared per-point area if every point carries the same one.
    pub fn uniform_area(&self) -> Option<f64> {
        let first = *self.areas.first()?;
        self.areas.iter().all(|a| *a == first).then_some(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingOptions {
    /// Candidates are accepted within this fraction of the largest bounding
    /// box extent from the surface before projection.
    pub band_fraction: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Give up after `count * max_attempts_per_sample` rejected candidates.
    pub max_attempts_per_sample: usize,
    /// Projected points where the gradient norm is further than this from 1
    /// sit on an edge or corner and are rejected. Edges have no area, but the
    /// projection maps a whole wedge of candidates onto them.
    pub kink_tolerance: f64,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        Self {
            band_fraction: 0.02,
            tolerance: 1e-6,
            max_iterations: 32,
            max_attempts_per_sample: 2000,
            kink_tolerance: 0.05,
        }
    }
}

pub fn sample_surface(field: &Sdf, target_count: usize, seed: u64) -> Result<SurfaceSamples> {
    sample_surface_with(field, target_count, seed, &SamplingOptions::default())
}

/// Rejection-samples a thin shell around the zero level set inside the
/// bounding box, then Newton-projects each candidate onto the surface.
/// Every sample gets `total_area / count`.
pub fn sample_surface_with(
    field: &Sdf,
    target_count: usize,
    seed: u64,
    opts: &SamplingOptions,
) -> Result<SurfaceSamples> {
    if target_count == 0 {
        return Err(Error::Sampling("sample count must be positive"));
    }
    let bounds = field
        .bounds()
        .ok_or(Error::Sampling("field is unbounded"))?;
    let area = field
        .surface_area()
        .ok_or(Error::Sampling("surface area unavailable"))?;
    let band = opts.band_fraction * bounds.extent().max();
    let (lo, hi) = match field {
        // lattice queries must stay inside the lattice
        Sdf::Grid(_) => (bounds.min, bounds.max),
        _ => (bounds.min.add_scalar(-band), bounds.max.add_scalar(band)),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(target_count);
    let mut normals = Vec::with_capacity(target_count);
    let mut attempts = 0usize;
    let budget = target_count.saturating_mul(opts.max_attempts_per_sample);

    while points.len() < target_count {
        attempts += 1;
        if attempts > budget {
            return Err(Error::Sampling("too many rejected candidates"));
        }
        let p = Vector3::new(
            rng.random_range(lo.x..hi.x),
            rng.random_range(lo.y..hi.y),
            rng.random_range(lo.z..hi.z),
        );
        if libm::fabs(field.eval(&p)?) > band {
            continue;
        }
        let Some(q) = project(field, p, opts)? else {
            continue;
        };
        let g = field.gradient(&q)?;
        if libm::fabs(g.norm() - 1.0) > opts.kink_tolerance {
            continue;
        }
        let n = g.normalize();
        points.push(q);
        normals.push(n);
    }

    let per_point = area / target_count as f64;
    Ok(SurfaceSamples {
        points,
        normals,
        areas: alloc::vec![per_point; target_count],
    })
}

/// Newton projection along the gradient. `Ok(None)` rejects a candidate with a
/// vanishing gradient (medial axis); non-convergence is an error.
fn project(field: &Sdf, mut p: Vector3<f64>, opts: &SamplingOptions) -> Result<Option<Vector3<f64>>> {
    for _ in 0..opts.max_iterations {
        let phi = field.eval(&p)?;
        if libm::fabs(phi) < opts.tolerance {
            return Ok(Some(p));
        }
        let g = field.gradient(&p)?;
        let g2 = g.norm_squared();
        if g2 < 1e-6 {
            return Ok(None);
        }
        p -= g * (phi / g2);
    }
    if libm::fabs(field.eval(&p)?) < opts.tolerance {
        Ok(Some(p))
    } else {
        Err(Error::Sampling("projection did not converge"))
    }
}
