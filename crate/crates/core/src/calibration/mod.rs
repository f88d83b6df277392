//! Staged identification of the model parameters and the comparison
//! metrics.
//!
//! The four parameters are fitted one at a time, each stage reusing the
//! values found before it: `lambda_d` from pure presses, `lambda_s` from
//! in-contact shear motions with rescaled observations, `K` from the same
//! motions at their raw magnitude, and `mu` from slipping motions.

mod metrics;
mod solver;
mod stages;
mod synthetic;

pub use metrics::{cosine_similarity, rmse, DEFAULT_MAGNITUDE_FLOOR};
pub use solver::{minimize_scalar, Bracket, Degeneracy, ScalarSolution, SolverOptions};
pub use stages::{
    simulate_trajectory, Brackets, CalibrationResult, CalibrationSample, CalibrationSetup, Calibrator,
    JointRefinement, LambdaSObjective, SampleKind, SimulatedSample, StageReport, SURROGATE_FRICTION,
};
pub use synthetic::{generate_dataset, sample_trajectory, SyntheticConfig};
