//! The 2D torus `[0, 2pi)^2`: Stokes eigenbasis, divergence-free spectral
//! fields and saturating mode sets.

mod basis;
mod modeset;
mod velocity;

pub use basis::{
    eigenfunction_eval, in_half_lattice, stokes_eigenvalue, ModeIndex, Parity, CONSTANT_AMPLITUDE,
    OSCILLATORY_AMPLITUDE,
};
pub use modeset::{
    is_saturating_up_to, saturate_step, saturate_step_with, ModeSet, SaturationIteration, SaturationReport,
    DEFAULT_MAX_ITERS,
};
pub use velocity::SpectralVelocity;
