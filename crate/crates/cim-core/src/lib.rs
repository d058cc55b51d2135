//! Core model of a coherent Ising machine built from an injection-locked
//! network of two-mode slave lasers.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled. Everything here is a pure function of its inputs and an explicit
//! random number generator; IO, configuration files and orchestration live in
//! the companion `cim-sim` crate.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod dynamics;
pub mod ising;
mod math;
pub mod readout;
pub mod schedule;
pub mod seed;
pub mod spectrum;
pub mod trial;

pub use dynamics::{
    apply_spontaneous_noise, drift, gain_coefficient, step, DynamicsError, LaserNetworkState,
    Couplings, LaserRates, LaserState, NoiseConfig, Stepper,
};
pub use ising::{build_cubic_problem, flip_one_coupling, ising_energy, Edge, IsingError, IsingProblem, SpinVector};
pub use readout::{
    collective_spins, decide, spin, BasisDecision, gain_sum_residual, predicted_growth_rate, to_circular, Decision,
    GainSumTerms, ReadoutConfig, ReadoutError, ReadoutFrame,
};
pub use schedule::{coupling_at, pump_at, threshold_pump, PhysicsConfig, ScheduleError, ScheduleSpec, Scheme};
pub use spectrum::{enumerate_spectrum, SpectrumAccumulator, predicted_counts, verify_gap, SpectrumError, SpectrumStats};
pub use trial::{run_trial, run_trial_with_state, TrialError, TrialOptions, TrialResult, TrajectoryRow};

/// Elementary charge in coulombs, used to express pump rates as currents.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
