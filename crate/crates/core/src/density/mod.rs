//! Monte Carlo interrogation of the law of `pi_F u(T)`.
//!
//! Absolute continuity cannot be verified from finitely many samples. It is
//! read here in the weak sense "no atoms and a stable kernel density
//! estimate": [`atom_test`] looks for exact and near repeats, [`kde`]
//! produces gridded estimates whose L1 distances drive the continuity
//! pipeline, and [`conditional_kernel_probe`] applies the atom test to
//! conditional laws of noise coefficients.

mod atoms;
mod continuity;
mod ensemble;
mod kde;
mod probe;

pub use atoms::{atom_test, AtomReport, AtomTestConfig, AtomVerdict};
pub use continuity::{continuity_in_initial_condition, ContinuityConfig, ContinuityPoint, ContinuityReport};
pub use ensemble::{
    config_hash, member_seed, run_ensemble, EnsembleSample, ForcingSpec, NoiseLaw, ProjectionSubspace, Provenance,
    MAX_EXCLUSION, MIN_MEMBERS,
};
pub use kde::{bandwidths, common_grid, kde, kde_on_grid, l1_distance, sample_l1_distance, Bandwidth, DensityEstimate, GridAxis};
pub use probe::{conditional_kernel_probe, haar_coarse, NoiseSource, ProbeCell, ProbeConfig, ProbeReport, MAX_PROBE_LEVEL};
