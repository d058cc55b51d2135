//! A complete annealing run: integrate from the initial state to `t_end`,
//! sampling the readout on a fixed grid.

use alloc::vec::Vec;

use thiserror::Error;

use crate::dynamics::{DynamicsError, LaserNetworkState, NoiseConfig, Stepper};
use crate::ising::IsingProblem;
use crate::readout::{decide, ReadoutConfig, ReadoutError, ReadoutFrame};
use crate::schedule::{PhysicsConfig, ScheduleError, ScheduleSpec};
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrialError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Readout(#[from] ReadoutError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("invalid readout configuration")]
    InvalidReadout,
    #[error("t_end = {t_end:e} s precedes the end of the schedule t_f = {t_f:e} s")]
    EndBeforeSchedule { t_end: f64, t_f: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOptions {
    pub t_end: f64,
    pub readout: ReadoutConfig,
    pub noise: NoiseConfig,
    /// Draw the initial mode phases uniformly; otherwise start all at zero.
    pub random_initial_phases: bool,
    pub record_trajectory: bool,
}

impl TrialOptions {
    /// Defaults for `sched`: settle for `0.2 t_P` after the ramp ends.
    pub fn for_schedule(sched: &ScheduleSpec) -> Self {
        Self {
            t_end: sched.t_f + 0.2 * sched.t_p(),
            readout: ReadoutConfig::default(),
            noise: NoiseConfig::default(),
            random_initial_phases: true,
            record_trajectory: false,
        }
    }
}

/// One readout sample.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub sigma_circ: Vec<f64>,
    pub sigma_diag: Vec<f64>,
    pub mean_n_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub seed: u64,
    pub success_circular: bool,
    pub success_diagonal: bool,
    pub success: bool,
    /// First sample time at which the circular basis shows `±target` with
    /// every `|σ_i|` at or above threshold. A trial recovered only by the
    /// final diagonal-basis check gets `t_end`.
    pub comp_time: Option<f64>,
    /// First sample time at which any laser's spin, in either basis, reaches
    /// the threshold.
    pub bifurcation_time: Option<f64>,
    pub final_spins_circular: Vec<f64>,
    pub final_spins_diagonal: Vec<f64>,
    pub final_mean_n_c: f64,
    pub trajectory: Vec<TrajectoryRow>,
}

/// Runs one trial and also returns the final network state.
pub fn run_trial_with_state(
    p: &IsingProblem,
    sched: &ScheduleSpec,
    cfg: &PhysicsConfig,
    opts: &TrialOptions,
    seed: u64,
) -> Result<(TrialResult, LaserNetworkState), TrialError> {
    cfg.validate()?;
    sched.validate()?;
    if !opts.readout.is_valid() {
        return Err(TrialError::InvalidReadout);
    }
    if opts.t_end < sched.t_f {
        return Err(TrialError::EndBeforeSchedule { t_end: opts.t_end, t_f: sched.t_f });
    }
    let mut rng = rng_from_seed(seed);
    let mut state = if opts.random_initial_phases {
        LaserNetworkState::initial(p.m(), cfg, &mut rng)
    } else {
        LaserNetworkState::symmetric(p.m(), cfg)
    };
    let mut stepper = Stepper::new(p, *sched, *cfg, opts.noise);

    let dt = cfg.dt;
    let total_steps = (opts.t_end / dt).round() as u64;
    let per_sample = ((opts.readout.sample_interval / dt).round() as u64).max(1);
    let threshold = opts.readout.sigma_threshold;

    let mut comp_time = None;
    let mut bifurcation_time = None;
    let mut trajectory = Vec::new();

    let mut k: u64 = 0;
    loop {
        if k % per_sample == 0 || k == total_steps {
            let frame = ReadoutFrame::from_state(&state)?;
            if k > 0 {
                if bifurcation_time.is_none()
                    && frame
                        .sigma_circ
                        .iter()
                        .chain(&frame.sigma_diag)
                        .any(|s| s.abs() >= threshold)
                {
                    bifurcation_time = Some(state.t);
                }
                if comp_time.is_none() && decide(&frame, p, &opts.readout).circular.found() {
                    comp_time = Some(state.t);
                }
            }
            if opts.record_trajectory {
                trajectory.push(TrajectoryRow {
                    t: state.t,
                    sigma_circ: frame.sigma_circ,
                    sigma_diag: frame.sigma_diag,
                    mean_n_c: state.mean_carriers(),
                });
            }
        }
        if k == total_steps {
            break;
        }
        stepper.step(&mut state, &mut rng)?;
        k += 1;
        // keep the clock on the exact grid
        state.t = k as f64 * dt;
    }

    let frame = ReadoutFrame::from_state(&state)?;
    let decision = decide(&frame, p, &opts.readout);
    if comp_time.is_none() && decision.found() {
        comp_time = Some(state.t);
    }
    let result = TrialResult {
        seed,
        success_circular: decision.circular.found(),
        success_diagonal: decision.diagonal.found(),
        success: decision.found(),
        comp_time,
        bifurcation_time,
        final_spins_circular: frame.sigma_circ,
        final_spins_diagonal: frame.sigma_diag,
        final_mean_n_c: state.mean_carriers(),
        trajectory,
    };
    Ok((result, state))
}

/// Runs one trial from the standard initial state (see
/// [`LaserNetworkState::initial`]) with all randomness drawn from `seed`.
pub fn run_trial(
    p: &IsingProblem,
    sched: &ScheduleSpec,
    cfg: &PhysicsConfig,
    opts: &TrialOptions,
    seed: u64,
) -> Result<TrialResult, TrialError> {
    run_trial_with_state(p, sched, cfg, opts, seed).map(|(r, _)| r)
}
