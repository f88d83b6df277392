//! Path-dependent hydroelastic shear model.
//!
//! Each indenter surface point carries two recursively tracked vectors: a
//! contact force built from the in-contact part of its displacement with
//! stiffnesses `E·A` (normal) and `K·A` (tangential), and a unit-stiffness
//! offset that locates the point it is attached to on the membrane. Both are
//! clipped to a Coulomb cone and reset when the point leaves the elastomer.
//! The shear field spreads the tangential forces around the attachment
//! points with a Gaussian kernel.

mod field;
mod tracker;

pub use field::{gravity_augmented_field, shear_field, total_field};
pub use tracker::{
    contact_fraction, recover_forces_from_offsets, step_tracker, step_tracker_with, TrackerOptions,
    TrackerState,
};

use crate::error::Result;
use crate::scene::Scene;
use crate::types::{HydroParams, MarkerField, Pose};

/// A scene paired with model parameters.
#[derive(Debug, Clone, Copy)]
pub struct HydroShear<'a> {
    pub scene: &'a Scene,
    pub params: HydroParams,
    pub options: TrackerOptions,
}

impl<'a> HydroShear<'a> {
    pub fn new(scene: &'a Scene, params: HydroParams) -> Self {
        Self {
            scene,
            params,
            options: TrackerOptions::default(),
        }
    }

    pub fn with_options(mut self, options: TrackerOptions) -> Self {
        self.options = options;
        self
    }

    pub fn new_state(&self) -> TrackerState {
        TrackerState::new(self.scene.surface.len())
    }

    pub fn step(&self, state: &mut TrackerState, pose: &Pose) -> Result<()> {
        step_tracker_with(
            state,
            pose,
            &self.scene.surface,
            &self.scene.elastomer,
            &self.params,
            &self.options,
        )
    }

    pub fn dilation(&self, pose: &Pose) -> Result<MarkerField> {
        self.scene.dilation(pose, self.params.lambda_d)
    }

    pub fn shear(&self, state: &TrackerState, pose: &Pose) -> Result<MarkerField> {
        shear_field(
            state,
            pose,
            &self.scene.surface,
            &self.scene.elastomer,
            &self.scene.grid,
            self.params.lambda_s,
        )
    }

    /// Dilation plus shear at `pose` for a state already advanced to it.
    pub fn field(&self, state: &TrackerState, pose: &Pose) -> Result<MarkerField> {
        total_field(&self.dilation(pose)?, &self.shear(state, pose)?)
    }

    /// Dilation at `pose` plus the gravity-augmented shear.
    pub fn gravity_field(&self, state: &TrackerState, pose: &Pose, gravity_xf: &Pose) -> Result<MarkerField> {
        let shear = gravity_augmented_field(
            state,
            pose,
            gravity_xf,
            &self.scene.surface,
            &self.scene.elastomer,
            &self.scene.grid,
            &self.params,
            &self.options,
        )?;
        total_field(&self.dilation(pose)?, &shear)
    }

    /// Steps through `poses` from a fresh state and returns the final state.
    pub fn run<'p>(&self, poses: impl IntoIterator<Item = &'p Pose>) -> Result<TrackerState> {
        let mut state = self.new_state();
        for p in poses {
            self.step(&mut state, p)?;
        }
        Ok(state)
    }
}
