//! Randomized rounding of the 2-spanner relaxation.

pub mod lll;
pub mod threshold;

pub use lll::{lll_ft2, lll_round, BadEvent, LllOutcome, LllTrace};
pub use threshold::{
    approx_ft2, approx_ft2_from, round_thresholds, AlphaMode, RoundError, Rounded, RoundingConfig, RoundingReport,
    ThresholdAssignment,
};
