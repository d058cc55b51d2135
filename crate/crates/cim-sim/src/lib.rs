//! Configuration files, result formats, sweeps and the `sim` command line
//! around [`cim_core`].

pub mod config;
pub mod io;
pub mod sweep;

pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use io::{problem_from_json, problem_to_json, write_trajectory_csv, Basis, IoError, ProblemFile, TrialRecord};
pub use sweep::{
    build_problem, run_size_scaling, run_sweep, write_results_csv, write_results_json, AggregateResult, PointResult,
    ScalingSpec, SweepError, SweepSpec, SweepVariable, TrialSummary,
};
