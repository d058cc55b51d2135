//! Parameter sweeps and size scaling over many seeded trials.
//!
//! Work is split into `(point, target, trial)` items with seeds fixed before
//! anything runs, so results do not depend on the worker count or on the
//! order in which trials finish.

use std::io::Write;

use cim_core::seed::{derive_seed, rng_from_seed};
use cim_core::{build_cubic_problem, flip_one_coupling, run_trial, IsingProblem, Scheme, SpinVector, TrialError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

// Domain tags for seed derivation.
const TARGET_TAG: u64 = 0x7461_7267;
const TRIAL_TAG: u64 = 0x7472_6961;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot start worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Final mutual coupling `alpha_final`.
    Alpha,
    /// Ramp duration `t_P` in ns.
    RampRate,
    /// Final pump in units of the threshold pump.
    PumpFinal,
    /// Number of spins `M`.
    ProblemSize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub trials_per_point: usize,
    #[serde(default = "one")]
    pub targets_per_point: usize,
    #[serde(default)]
    pub base: RunConfig,
    #[serde(default)]
    pub master_seed: u64,
}

fn one() -> usize {
    1
}

impl SweepSpec {
    /// Configuration of sweep point `index`.
    pub fn point_config(&self, index: usize) -> Result<RunConfig, ConfigError> {
        let v = self.values[index];
        let mut cfg = self.base.clone();
        match self.variable {
            SweepVariable::Alpha => cfg.schedule.alpha_final = v,
            SweepVariable::RampRate => cfg.schedule.t_p_ns = v,
            SweepVariable::PumpFinal => cfg.schedule.pump_final_over_threshold = v,
            SweepVariable::ProblemSize => {
                if !(v.fract() == 0.0 && v >= 0.0) {
                    return Err(ConfigError::invalid(format!("values[{index}]"), "problem size must be an integer"));
                }
                cfg.problem.m = v as usize;
                cfg.problem.target = None;
            }
        }
        cfg.validate().map_err(|e| match e {
            ConfigError::Invalid { path, message } => {
                ConfigError::Invalid { path: format!("values[{index}] -> {path}"), message }
            }
            e => e,
        })?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<Vec<RunConfig>, ConfigError> {
        if self.values.is_empty() {
            return Err(ConfigError::invalid("values", "must not be empty"));
        }
        if self.trials_per_point == 0 {
            return Err(ConfigError::invalid("trials_per_point", "must be at least 1"));
        }
        if self.targets_per_point == 0 {
            return Err(ConfigError::invalid("targets_per_point", "must be at least 1"));
        }
        self.base.validate()?;
        (0..self.values.len()).map(|i| self.point_config(i)).collect()
    }
}

/// Outcome of one trial inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub target_index: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub success: bool,
    pub success_circular: bool,
    pub success_diagonal: bool,
    pub comp_time_ns: Option<f64>,
    pub bifurcation_time_ns: Option<f64>,
    /// Diagnostic when the trial aborted; such trials count as failures.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub scheme: String,
    pub m: usize,
    pub alpha_f: f64,
    pub t_p_ns: f64,
    pub pump_over_th: f64,
    pub flipped: bool,
    pub n_trials: usize,
    pub n_success: usize,
    pub success_prob: f64,
    /// Largest `comp_time` among successful trials.
    pub worst_time_ns: Option<f64>,
    /// `worst_time_ns / success_prob`; `None` stands for infinity.
    pub net_time_ns: Option<f64>,
    /// Size of the configuration space an exhaustive search visits, `2^M`.
    pub brute_force_states: f64,
    pub master_seed: u64,
    pub config: RunConfig,
    pub targets: Vec<Vec<i8>>,
    pub trials: Vec<TrialSummary>,
}

impl PointResult {
    fn aggregate(cfg: &RunConfig, master_seed: u64, targets: Vec<Vec<i8>>, trials: Vec<TrialSummary>) -> Self {
        let n_trials = trials.len();
        let n_success = trials.iter().filter(|t| t.success).count();
        let success_prob = if n_trials == 0 { 0.0 } else { n_success as f64 / n_trials as f64 };
        let worst_time_ns = trials
            .iter()
            .filter(|t| t.success)
            .filter_map(|t| t.comp_time_ns)
            .fold(None, |acc: Option<f64>, t| Some(acc.map_or(t, |a| a.max(t))));
        let net_time_ns = match worst_time_ns {
            Some(w) if success_prob > 0.0 => Some(w / success_prob),
            _ => None,
        };
        Self {
            scheme: cfg.schedule.scheme.as_str().to_string(),
            m: cfg.problem.m,
            alpha_f: cfg.schedule.alpha_final,
            t_p_ns: cfg.schedule.t_p_ns,
            pump_over_th: cfg.schedule.pump_final_over_threshold,
            flipped: cfg.problem.flip_edge.is_some(),
            n_trials,
            n_success,
            success_prob,
            worst_time_ns,
            net_time_ns,
            brute_force_states: 2f64.powi(cfg.problem.m as i32),
            master_seed,
            config: cfg.clone(),
            targets,
            trials,
        }
    }

    /// Net computational time with the infinite case made explicit.
    pub fn net_time(&self) -> f64 {
        self.net_time_ns.unwrap_or(f64::INFINITY)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateResult {
    pub master_seed: u64,
    pub points: Vec<PointResult>,
}

/// Seed of the random target `target_index` for size `m`. Independent of the
/// scheme and of the swept value, so every point sees the same instances.
pub fn target_seed(master: u64, m: usize, target_index: usize) -> u64 {
    derive_seed(master, &[TARGET_TAG, m as u64, target_index as u64])
}

pub fn trial_seed(master: u64, m: usize, target_index: usize, trial_index: usize) -> u64 {
    derive_seed(master, &[TRIAL_TAG, m as u64, target_index as u64, trial_index as u64])
}

/// The problem a configuration describes, with a target drawn from `seed`
/// unless one is given explicitly.
pub fn build_problem(cfg: &RunConfig, seed: u64) -> Result<IsingProblem, ConfigError> {
    let m = cfg.problem.m;
    let target = match &cfg.problem.target {
        Some(t) => SpinVector::new(t.clone()).map_err(|e| ConfigError::invalid("problem.target", e))?,
        None => SpinVector::random(m, &mut rng_from_seed(seed)),
    };
    let p = build_cubic_problem(m, target).map_err(|e| ConfigError::invalid("problem.m", e))?;
    match cfg.problem.flip_edge {
        Some(k) => flip_one_coupling(&p, k).map_err(|e| ConfigError::invalid("problem.flip_edge", e)),
        None => Ok(p),
    }
}

fn run_one(p: &IsingProblem, cfg: &RunConfig, target_index: usize, trial_index: usize, seed: u64) -> TrialSummary {
    let outcome = run_trial(p, &cfg.schedule(), &cfg.physics(), &cfg.trial_options(), seed);
    match outcome {
        Ok(r) => TrialSummary {
            target_index,
            trial_index,
            seed,
            success: r.success,
            success_circular: r.success_circular,
            success_diagonal: r.success_diagonal,
            comp_time_ns: r.comp_time.map(|t| t * 1e9),
            bifurcation_time_ns: r.bifurcation_time.map(|t| t * 1e9),
            error: None,
        },
        Err(e) => TrialSummary {
            target_index,
            trial_index,
            seed,
            success: false,
            success_circular: false,
            success_diagonal: false,
            comp_time_ns: None,
            bifurcation_time_ns: None,
            error: Some(describe(&e)),
        },
    }
}

fn describe(e: &TrialError) -> String {
    e.to_string()
}

/// One group of trials sharing a configuration.
struct Job {
    cfg: RunConfig,
    targets: usize,
    trials: usize,
}

fn run_jobs(jobs: &[Job], master_seed: u64, workers: usize) -> Result<Vec<PointResult>, SweepError> {
    let mut problems = Vec::with_capacity(jobs.len());
    for job in jobs {
        let ps = (0..job.targets)
            .map(|k| build_problem(&job.cfg, target_seed(master_seed, job.cfg.problem.m, k)))
            .collect::<Result<Vec<_>, _>>()?;
        problems.push(ps);
    }
    let items: Vec<(usize, usize, usize)> = jobs
        .iter()
        .enumerate()
        .flat_map(|(j, job)| (0..job.targets).flat_map(move |k| (0..job.trials).map(move |n| (j, k, n))))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build()?;
    // collect() keeps item order, so the merge is keyed rather than timed
    let summaries: Vec<TrialSummary> = pool.install(|| {
        items
            .par_iter()
            .map(|&(j, k, n)| {
                let cfg = &jobs[j].cfg;
                let seed = trial_seed(master_seed, cfg.problem.m, k, n);
                run_one(&problems[j][k], cfg, k, n, seed)
            })
            .collect()
    });

    let mut grouped: Vec<Vec<TrialSummary>> = jobs.iter().map(|_| Vec::new()).collect();
    for (&(j, _, _), s) in items.iter().zip(summaries) {
        grouped[j].push(s);
    }
    Ok(jobs
        .iter()
        .zip(problems)
        .zip(grouped)
        .map(|((job, ps), trials)| {
            let targets = ps.iter().map(|p| p.target().as_slice().to_vec()).collect();
            PointResult::aggregate(&job.cfg, master_seed, targets, trials)
        })
        .collect())
}

/// Runs every point of `spec`. `workers == 0` uses one worker per core.
pub fn run_sweep(spec: &SweepSpec, workers: usize) -> Result<AggregateResult, SweepError> {
    let configs = spec.validate()?;
    let jobs: Vec<Job> = configs
        .into_iter()
        .map(|cfg| Job { cfg, targets: spec.targets_per_point, trials: spec.trials_per_point })
        .collect();
    let points = run_jobs(&jobs, spec.master_seed, workers)?;
    Ok(AggregateResult { master_seed: spec.master_seed, points })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSpec {
    pub sizes: Vec<usize>,
    pub schemes: Vec<Scheme>,
    pub targets_per_point: usize,
    pub trials_per_target: usize,
    /// Also run GC on each instance with this coupling flipped.
    pub flipped_gc_edge: Option<usize>,
    pub base: RunConfig,
    pub master_seed: u64,
}

impl ScalingSpec {
    /// Five targets with ten trials each per point.
    pub fn new(sizes: Vec<usize>, schemes: Vec<Scheme>, base: RunConfig, master_seed: u64) -> Self {
        Self {
            sizes,
            schemes,
            targets_per_point: 5,
            trials_per_target: 10,
            flipped_gc_edge: None,
            base,
            master_seed,
        }
    }
}

/// Success probability and computational time per `(size, scheme)`.
pub fn run_size_scaling(spec: &ScalingSpec, workers: usize) -> Result<AggregateResult, SweepError> {
    if spec.sizes.is_empty() {
        return Err(ConfigError::invalid("sizes", "must not be empty").into());
    }
    if spec.schemes.is_empty() && spec.flipped_gc_edge.is_none() {
        return Err(ConfigError::invalid("schemes", "must not be empty").into());
    }
    if spec.targets_per_point == 0 || spec.trials_per_target == 0 {
        return Err(ConfigError::invalid("trials", "must be at least 1").into());
    }
    let mut jobs = Vec::new();
    for (i, &m) in spec.sizes.iter().enumerate() {
        let mut variants: Vec<(Scheme, Option<usize>)> = spec.schemes.iter().map(|&s| (s, None)).collect();
        if let Some(k) = spec.flipped_gc_edge {
            variants.push((Scheme::Gc, Some(k)));
        }
        for (scheme, flip) in variants {
            let mut cfg = spec.base.clone();
            cfg.problem.m = m;
            cfg.problem.target = None;
            cfg.problem.flip_edge = flip;
            cfg.schedule.scheme = scheme;
            cfg.validate().map_err(|e| match e {
                ConfigError::Invalid { path, message } => {
                    ConfigError::Invalid { path: format!("sizes[{i}] -> {path}"), message }
                }
                e => e,
            })?;
            jobs.push(Job { cfg, targets: spec.targets_per_point, trials: spec.trials_per_target });
        }
    }
    let points = run_jobs(&jobs, spec.master_seed, workers)?;
    Ok(AggregateResult { master_seed: spec.master_seed, points })
}

pub const RESULTS_HEADER: [&str; 11] = [
    "scheme",
    "m",
    "alpha_f",
    "t_p_ns",
    "pump_over_th",
    "n_trials",
    "n_success",
    "success_prob",
    "worst_time_ns",
    "net_time_ns",
    "master_seed",
];

/// Summary table; an infinite net time is written as `inf`, a missing worst
/// time as an empty field.
pub fn write_results_csv<W: Write>(out: W, result: &AggregateResult) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RESULTS_HEADER)?;
    for p in &result.points {
        w.write_record([
            p.scheme.clone(),
            p.m.to_string(),
            p.alpha_f.to_string(),
            p.t_p_ns.to_string(),
            p.pump_over_th.to_string(),
            p.n_trials.to_string(),
            p.n_success.to_string(),
            p.success_prob.to_string(),
            p.worst_time_ns.map(|t| t.to_string()).unwrap_or_default(),
            p.net_time_ns.map_or_else(|| "inf".to_string(), |t| t.to_string()),
            p.master_seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_json<W: Write>(out: W, result: &AggregateResult) -> Result<(), SweepError> {
    serde_json::to_writer_pretty(out, result)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(success: bool, comp: Option<f64>) -> TrialSummary {
        TrialSummary {
            target_index: 0,
            trial_index: 0,
            seed: 0,
            success,
            success_circular: success,
            success_diagonal: false,
            comp_time_ns: comp,
            bifurcation_time_ns: comp,
            error: None,
        }
    }

    #[test]
    fn net_time_is_worst_over_probability() {
        let cfg = RunConfig::default();
        let p = PointResult::aggregate(
            &cfg,
            1,
            vec![],
            vec![summary(true, Some(400.0)), summary(true, Some(500.0)), summary(false, Some(100.0)), summary(false, None)],
        );
        assert_eq!(p.n_trials, 4);
        assert_eq!(p.n_success, 2);
        assert_eq!(p.success_prob, 0.5);
        assert_eq!(p.worst_time_ns, Some(500.0));
        assert_eq!(p.net_time_ns, Some(1000.0));
        assert!(p.net_time() >= p.worst_time_ns.unwrap());
    }

    proptest::proptest! {
        #[test]
        fn aggregate_invariants(outcomes in proptest::collection::vec((proptest::bool::ANY, 1.0f64..1e4), 1..40)) {
            let trials: Vec<_> = outcomes.iter().map(|&(ok, t)| summary(ok, Some(t))).collect();
            let p = PointResult::aggregate(&RunConfig::default(), 0, vec![], trials);
            proptest::prop_assert!((0.0..=1.0).contains(&p.success_prob));
            proptest::prop_assert_eq!(p.n_success, outcomes.iter().filter(|o| o.0).count());
            match p.worst_time_ns {
                Some(w) => {
                    proptest::prop_assert!(outcomes.iter().filter(|o| o.0).all(|o| o.1 <= w));
                    proptest::prop_assert!(p.net_time() >= w);
                }
                None => proptest::prop_assert!(p.net_time().is_infinite()),
            }
        }
    }

    #[test]
    fn all_failures_give_infinite_net_time() {
        let p = PointResult::aggregate(&RunConfig::default(), 1, vec![], vec![summary(false, None); 3]);
        assert_eq!(p.n_success, 0);
        assert_eq!(p.net_time(), f64::INFINITY);
        let json = serde_json::to_value(&p).unwrap();
        assert!(json["net_time_ns"].is_null());
        let mut buf = Vec::new();
        write_results_csv(&mut buf, &AggregateResult { master_seed: 1, points: vec![p] }).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), RESULTS_HEADER.join(","));
        assert!(text.lines().nth(1).unwrap().ends_with(",3,3,0,0,,inf,1"));
    }

    #[test]
    fn sweep_spec_validation() {
        let mut spec = SweepSpec {
            variable: SweepVariable::ProblemSize,
            values: vec![4.0, 6.0],
            trials_per_point: 1,
            targets_per_point: 1,
            base: RunConfig::default(),
            master_seed: 3,
        };
        assert_eq!(spec.validate().unwrap()[1].problem.m, 6);
        spec.values = vec![4.0, 5.0];
        let err = spec.validate().unwrap_err();
        assert_eq!(err.field_path(), Some("values[1] -> problem.m"));
        spec.values = vec![4.5];
        assert_eq!(spec.validate().unwrap_err().field_path(), Some("values[0]"));
        spec.values.clear();
        assert_eq!(spec.validate().unwrap_err().field_path(), Some("values"));
        spec.values = vec![4.0];
        spec.trials_per_point = 0;
        assert_eq!(spec.validate().unwrap_err().field_path(), Some("trials_per_point"));
    }

    #[test]
    fn sweep_values_land_in_the_right_field() {
        let base = RunConfig::default();
        for (variable, check) in [
            (SweepVariable::Alpha, (|c: &RunConfig| c.schedule.alpha_final) as fn(&RunConfig) -> f64),
            (SweepVariable::RampRate, |c| c.schedule.t_p_ns),
            (SweepVariable::PumpFinal, |c| c.schedule.pump_final_over_threshold),
        ] {
            let spec = SweepSpec {
                variable,
                values: vec![0.01, 2.0],
                trials_per_point: 1,
                targets_per_point: 1,
                base: base.clone(),
                master_seed: 0,
            };
            let cfgs = spec.validate().unwrap();
            assert_eq!(check(&cfgs[0]), 0.01);
            assert_eq!(check(&cfgs[1]), 2.0);
        }
    }

    #[test]
    fn sweep_json_parses_with_defaults() {
        let spec: SweepSpec =
            serde_json::from_str(r#"{"variable": "ramp_rate", "values": [100, 200], "trials_per_point": 4}"#).unwrap();
        assert_eq!(spec.variable, SweepVariable::RampRate);
        assert_eq!(spec.targets_per_point, 1);
        assert_eq!(spec.base, RunConfig::default());
    }

    #[test]
    fn seeds_are_keyed_not_positional() {
        assert_eq!(target_seed(9, 8, 2), target_seed(9, 8, 2));
        assert_ne!(target_seed(9, 8, 2), target_seed(9, 10, 2));
        assert_ne!(trial_seed(9, 8, 0, 1), trial_seed(9, 8, 1, 0));
        assert_ne!(trial_seed(9, 8, 0, 1), trial_seed(10, 8, 0, 1));
    }

    #[test]
    fn explicit_target_and_flip() {
        let mut cfg = RunConfig::default();
        cfg.problem.m = 4;
        cfg.problem.target = Some(vec![1, -1, 1, -1]);
        cfg.problem.flip_edge = Some(0);
        let p = build_problem(&cfg, 0).unwrap();
        assert_eq!(p.target().as_slice(), &[1, -1, 1, -1]);
        assert_eq!(p.edges()[0].coupling, -1);
        assert_eq!(p.unstable_edges(p.target()), 1);
    }
}
