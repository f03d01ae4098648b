//! Capacity of discrete-time memoryless channels whose additive Gaussian
//! noise comes from sampling a wide-sense cyclostationary continuous-time
//! process.
//!
//! The crate covers three layers:
//!
//! - [`profile`]: periodic variance profiles and the discrete-time variance
//!   sequences they induce under any sampling configuration
//!   `Tc = (td + eps) * Ts`;
//! - [`waterfill`] and [`asynccap`]: the closed-form synchronous capacity,
//!   and the asynchronous capacity as the liminf of a sequence of
//!   synchronous capacities at rationalized mismatches, with ratio, power,
//!   and offset sweeps;
//! - [`infospec`]: a Monte Carlo lab for the information density rates whose
//!   limits justify the capacity characterization, including their
//!   closed-form characteristic function and finite-sample p-liminf and
//!   p-limsup estimators.
//!
//! Everything is deterministic: sweeps are data-parallel over independent
//! points (disable the default `parallel` feature for a plain sequential
//! build) and Monte Carlo batches derive one counter-based RNG stream per
//! sample, so results are bit-identical for any worker count.

pub mod asynccap;
pub mod error;
mod exec;
pub mod infospec;
pub mod profile;
pub mod rational;
pub mod waterfill;

pub use asynccap::{
    capacity_at, capacity_sequence, liminf_capacity, liminf_estimate, sweep_offset, sweep_power,
    sweep_ratio, sync_capacity_at, AsyncOptions, CapacityEntry, CapacitySequence, LiminfEstimate,
    SweepResult,
};
pub use error::{Error, Result};
pub use exec::set_worker_threads;
pub use infospec::{
    build_density_model, charfn_v, empirical_charfn, p_lim_estimate, sample_density,
    theorem1_check, DensityBatch, DensityModelPerIndex, PlimDirection, PlimEstimate,
    Theorem1Options, Theorem1Report,
};
pub use profile::{
    pulse_value, sample_variances, variance_at, DtVarianceSeq, Eps, ProfileShape, PulseShape,
    SamplingSpec, TabulatedShape, VarianceProfile, DEFAULT_PERIOD_CAP,
};
pub use rational::{epsilon_n, Rational};
pub use waterfill::{
    bruteforce_capacity, sync_capacity, water_level, water_level_sorted, WaterFillSolution,
};
