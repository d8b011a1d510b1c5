//! Deterministic analysis/synthesis transforms and the entropy priors.

pub mod dct;
pub mod features;
pub mod prior;

pub use dct::{analysis, analysis_with, synthesis, synthesis_real, synthesis_with};
pub use features::{extract_features, feature_shape, synthesize_frame};
pub use prior::{
    intra_prior, predict_ci_prior, predict_motion_prior, predict_residual_prior, BlockActivity,
};
