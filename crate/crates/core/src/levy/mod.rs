//! Truncated symmetric Lévy noise: compound-Poisson jump samples, their
//! wavelet coefficient fields, and Monte Carlo diagnostics of the Besov
//! moment bound, the truncation rate and small-ball probabilities.

pub mod coeffs;
pub mod measure;
pub mod reports;

pub use coeffs::{field_from_jumps, levy_coefficient, synthesize_levy_field};
pub use measure::{sample_jumps, sample_large_jumps, JumpSample, LevyMeasureSpec};
pub use reports::{
    moment_scaling_report, small_ball_report, truncation_convergence_report, MomentReport, SmallBallConfig,
    SmallBallReport, TruncationReport,
};
