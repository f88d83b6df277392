//! Tactile marker-displacement simulation for flat elastomer sensors.
//!
//! Given the SE(3) trajectory of a rigid indenter expressed in the elastomer
//! frame, this crate computes the 2-D marker displacement field on a tactile
//! grid as the sum of an instantaneous dilation field and a path-dependent
//! shear field. The shear field is driven by a per-surface-point hydroelastic
//! force tracker with Coulomb stick-slip clipping and a unit-stiffness
//! projection tracker that locates where each indenter point is attached to
//! the membrane.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. File formats,
//! the batched engine and the command line live in `hydroshear-sim`.
//!
//! Module map:
//!
//! - [`types`]: poses, tactile grids, marker fields, parameters, pixel scale
//! - [`geometry`]: analytic and lattice signed distance fields, mesh ingestion,
//!   surface sampling
//! - [`dilation`]: contact detection on the grid and the dilation field
//! - [`hydroshear`]: force/projection trackers, shear field, gravity augmentation
//! - [`baselines`]: FOTS (object-frame and contact-patch centred) and a penalty
//!   comparator
//! - [`calibration`]: staged scalar identification, metrics, synthetic datasets

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod baselines;
pub mod calibration;
pub mod dilation;
pub mod error;
pub mod geometry;
pub mod hydroshear;
pub mod numeric;
pub mod scene;
pub mod types;

pub use error::{Error, Result};
pub use scene::Scene;
pub use types::{FieldUnit, HydroParams, MarkerField, PixelScale, Pose, TactileGrid};

/// Re-exported so downstream crates name the same vector type.
pub use nalgebra::{UnitQuaternion, Vector3};
