//! Comparator models: FOTS in its object-frame and contact-patch centred
//! forms, and a memoryless penalty field.

mod fots;
mod penalty;

pub use fots::{
    fots_dilate, fots_field, fots_shear, fots_step, fots_twist, CenterMode, FotsParams, FotsState, Se2Motion,
};
pub use penalty::{penalty_field, spatial_velocity, PenaltyParams};
