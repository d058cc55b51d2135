use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cim_core::seed::derive_seed;
use cim_core::spectrum::{DEFAULT_CAP, MAX_ENUMERABLE};
use cim_core::{build_cubic_problem, enumerate_spectrum, flip_one_coupling, run_trial, Scheme, SpinVector};
use cim_sim::io::SpectrumRecord;
use cim_sim::{
    build_problem, load_config, problem_from_json, run_size_scaling, run_sweep, write_results_csv, write_results_json,
    write_trajectory_csv, Basis, ConfigError, RunConfig, ScalingSpec, SweepSpec, TrialRecord,
};
use clap::{Parser, Subcommand};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "sim", version, about = "Laser-network Ising machine simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single trial and print the effective config and result as JSON.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Problem file; otherwise the instance comes from the config.
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Write the sampled trajectory here.
        #[arg(long)]
        traj: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Basis::Circular)]
        traj_basis: Basis,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        sweep: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-trial detail; defaults to the CSV path with a .json extension.
        #[arg(long)]
        json: Option<PathBuf>,
        /// 0 means one worker per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Success probability and time against problem size.
    Scaling {
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "gp,gc,abrupt")]
        schemes: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        targets: usize,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        /// Add a GC run with this coupling flipped.
        #[arg(long)]
        flip_edge: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Exact spectrum of a cubic instance by enumeration.
    Oracle {
        #[arg(long)]
        m: usize,
        /// Seed for a random target; all spins up when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        flip_edge: Option<usize>,
        /// Allow sizes above the default enumeration cap.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Run(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn run_err(e: impl std::fmt::Display) -> Failure {
    Failure::Run(e.to_string())
}

fn config_or_default(path: Option<&Path>) -> Result<RunConfig, Failure> {
    Ok(match path {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| run_err(format!("{}: {e}", path.display())))
}

fn emit_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(run_err)?;
    match out {
        Some(p) => {
            let mut w = create(p)?;
            writeln!(w, "{text}").map_err(run_err)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct RunOutput<'a> {
    config: &'a RunConfig,
    problem: cim_sim::ProblemFile,
    result: TrialRecord,
}

fn cmd_run(
    config: Option<&Path>,
    seed: u64,
    problem: Option<&Path>,
    traj: Option<&Path>,
    basis: Basis,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let mut cfg = config_or_default(config)?;
    let p = match problem {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            let p = problem_from_json(&text).map_err(|e| Failure::Config(e.to_string()))?;
            cfg.problem.m = p.m();
            cfg.problem.target = Some(p.target().as_slice().to_vec());
            cfg.problem.flip_edge = None;
            p
        }
        None => build_problem(&cfg, derive_seed(seed, &[0]))?,
    };
    let mut opts = cfg.trial_options();
    opts.record_trajectory = traj.is_some();
    let r = run_trial(&p, &cfg.schedule(), &cfg.physics(), &opts, seed).map_err(run_err)?;
    if let Some(path) = traj {
        write_trajectory_csv(create(path)?, &r.trajectory, basis).map_err(run_err)?;
    }
    emit_json(&RunOutput { config: &cfg, problem: (&p).into(), result: (&r).into() }, out)
}

fn json_path(csv: &Path, json: Option<PathBuf>) -> PathBuf {
    json.unwrap_or_else(|| csv.with_extension("json"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.cmd {
        Command::Run { config, seed, problem, traj, traj_basis, out } => {
            cmd_run(config.as_deref(), seed, problem.as_deref(), traj.as_deref(), traj_basis, out.as_deref())
        }
        Command::Sweep { config, sweep, out, json, workers } => (|| {
            let text = std::fs::read_to_string(&sweep)
                .map_err(|e| Failure::Config(format!("{}: {e}", sweep.display())))?;
            let mut spec: SweepSpec = serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", sweep.display())))?;
            if let Some(c) = config.as_deref() {
                spec.base = load_config(c)?;
            }
            let result = run_sweep(&spec, workers).map_err(|e| match e {
                cim_sim::SweepError::Config(c) => Failure::from(c),
                e => run_err(e),
            })?;
            write_results_csv(create(&out)?, &result).map_err(run_err)?;
            write_results_json(create(&json_path(&out, json))?, &result).map_err(run_err)?;
            Ok(())
        })(),
        Command::Scaling { sizes, schemes, config, targets, trials, flip_edge, seed, out, json, workers } => (|| {
            let base = config_or_default(config.as_deref())?;
            let schemes = schemes
                .iter()
                .map(|s| s.parse::<Scheme>().map_err(|e| Failure::Config(format!("--schemes {s}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let mut spec = ScalingSpec::new(sizes, schemes, base, seed);
            spec.targets_per_point = targets;
            spec.trials_per_target = trials;
            spec.flipped_gc_edge = flip_edge;
            let result = run_size_scaling(&spec, workers).map_err(|e| match e {
                cim_sim::SweepError::Config(c) => Failure::from(c),
                e => run_err(e),
            })?;
            write_results_csv(create(&out)?, &result).map_err(run_err)?;
            write_results_json(create(&json_path(&out, json))?, &result).map_err(run_err)?;
            Ok(())
        })(),
        Command::Oracle { m, seed, flip_edge, force } => (|| {
            let target = match seed {
                Some(s) => SpinVector::random(m, &mut cim_core::seed::rng_from_seed(s)),
                None => SpinVector::all_up(m),
            };
            let mut p = build_cubic_problem(m, target).map_err(|e| Failure::Config(e.to_string()))?;
            if let Some(k) = flip_edge {
                p = flip_one_coupling(&p, k).map_err(|e| Failure::Config(e.to_string()))?;
            }
            let cap = if force { MAX_ENUMERABLE } else { DEFAULT_CAP };
            let stats = enumerate_spectrum(&p, cap).map_err(|e| Failure::Config(e.to_string()))?;
            emit_json(&SpectrumRecord::from(&stats), None)
        })(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            let _ = writeln!(io::stderr(), "configuration error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            let _ = writeln!(io::stderr(), "error: {msg}");
            ExitCode::from(1)
        }
    }
}
