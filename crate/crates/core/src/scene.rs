//! Indenter, membrane and grid bundled for the simulators.

use crate::dilation::{dilation_field, find_contacts, ContactSet};
use crate::error::{Error, Result};
use crate::geometry::{elastomer_sdf, sample_surface, Sdf, SurfaceSamples};
use crate::types::{MarkerField, Pose, TactileGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub grid: TactileGrid,
    pub indenter: Sdf,
    pub elastomer: Sdf,
    pub surface: SurfaceSamples,
}

impl Scene {
    /// Flat-membrane scene; the elastomer is the half-space under the grid.
    pub fn new(grid: TactileGrid, indenter: Sdf, surface: SurfaceSamples) -> Result<Self> {
        grid.validate()?;
        indenter.validate()?;
        if surface.is_empty() {
            return Err(Error::Geometry("indenter has no surface samples"));
        }
        Ok(Self {
            elastomer: elastomer_sdf(&grid),
            grid,
            indenter,
            surface,
        })
    }

    /// Samples `count` surface points of `indenter` with `seed`.
    pub fn sampled(grid: TactileGrid, indenter: Sdf, count: usize, seed: u64) -> Result<Self> {
        let surface = sample_surface(&indenter, count, seed)?;
        Self::new(grid, indenter, surface)
    }

    /// Mean per-point area, used as the uniform area of the single-tracker
    /// recovery.
    pub fn mean_area(&self) -> f64 {
        self.surface.total_area() / self.surface.len() as f64
    }

    pub fn contacts(&self, pose: &Pose) -> Result<ContactSet> {
        find_contacts(&self.grid, &self.indenter, pose)
    }

    pub fn dilation(&self, pose: &Pose, lambda_d: f64) -> Result<MarkerField> {
        Ok(dilation_field(&self.grid, &self.contacts(pose)?, lambda_d))
    }
}
