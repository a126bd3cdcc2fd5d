//! Worst-case stability of `x -> |Phi^* x|` modulo sign.
//!
//! The upper Lipschitz constant is the operator norm `beta`. The lower one is
//! sandwiched as `sigma <= alpha <= sqrt(2) sigma`, where `sigma` is the
//! strong-complement-property constant computed here by exhaustive
//! enumeration. The ratio `2 beta / sigma` then bounds the stability constant
//! of the best reconstruction. Also included are the localized Fourier frame
//! whose `sigma` stays small and the Gaussian-ensemble experiment.

mod curves;
mod experiment;
mod frames;
mod lipschitz;
mod scp;

pub use curves::{curve_a, curve_b, measurements_for, theorem_sigma, TheoremSigma};
pub use experiment::{
    format_float, run_gaussian_experiment, trial_seed, write_points_csv, write_summary_csv,
    ExperimentPoint, GaussianExperimentConfig, GaussianExperimentResult, RedundancySummary,
    POINTS_HEADER, SUMMARY_HEADER,
};
pub use frames::{complex_gaussian_ensemble, gaussian_ensemble, localized_fourier_frame};
pub use lipschitz::{
    alpha_bounds, holder_divergence_probe, lipschitz_ratio, lipschitz_report, operator_norm,
    sample_lipschitz_ratios, LipschitzReport, RatioSample, MIN_PAIR_DISTANCE,
};
pub use scp::{scp_sigma, scp_upper_bound, ScpReport, ScpUpperBound, DEFAULT_SCP_BUDGET};
