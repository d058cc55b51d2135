//! Run configuration as read from JSON.
//!
//! Every section and field is optional; missing values take the defaults
//! below. Times are given in ns (ps for `dt`) to keep files readable.

use std::fmt;
use std::path::Path;

use cim_core::{
    threshold_pump, NoiseConfig, PhysicsConfig, ReadoutConfig, ScheduleSpec, Scheme, TrialOptions,
};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error at line {line}, column {column} ({path}): {message}")]
    Parse { line: usize, column: usize, path: String, message: String },
    #[error("invalid value for {path}: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError::Invalid { path: path.into(), message: message.to_string() }
    }

    /// Dotted field path of the offending value, if known.
    pub fn field_path(&self) -> Option<&str> {
        match self {
            ConfigError::Io { .. } => None,
            ConfigError::Parse { path, .. } | ConfigError::Invalid { path, .. } => Some(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub omega_q: f64,
    pub tau_sp_ns: f64,
    pub beta_sp: f64,
    pub dt_ps: f64,
    pub amp_floor: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        let d = PhysicsConfig::default();
        Self {
            omega_q: d.omega_q,
            tau_sp_ns: d.tau_sp * 1e9,
            beta_sp: d.beta_sp,
            dt_ps: d.dt * 1e12,
            amp_floor: d.amp_floor,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(serialize_with = "ser_scheme", deserialize_with = "de_scheme")]
    pub scheme: Scheme,
    pub t_mid_ns: f64,
    pub t_p_ns: f64,
    pub pump_ratio_mid: f64,
    pub pump_final_over_threshold: f64,
    pub alpha_ratio_mid: f64,
    pub alpha_final: f64,
    pub zeta_over_alpha: f64,
    /// Absolute master coupling; overrides `zeta_over_alpha * alpha_final`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zeta: Option<f64>,
    pub a_m: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self {
            scheme: Scheme::Gp,
            t_mid_ns: 10.0,
            t_p_ns: 1000.0,
            pump_ratio_mid: 0.5,
            pump_final_over_threshold: 3.0,
            alpha_ratio_mid: 0.6,
            alpha_final: 0.02,
            zeta_over_alpha: 1.0,
            zeta: None,
            a_m: 2500.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReadoutSection {
    pub sigma_threshold: f64,
    pub sample_interval_ns: f64,
}

impl Default for ReadoutSection {
    fn default() -> Self {
        Self { sigma_threshold: 0.071, sample_interval_ns: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub enabled: bool,
    pub rate_factor: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self { enabled: true, rate_factor: 1.0 }
    }
}

/// Which instance to solve. Without an explicit `target` one is drawn from
/// the run seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemSection {
    pub m: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<Vec<i8>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flip_edge: Option<usize>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self { m: 8, target: None, flip_edge: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub physics: PhysicsSection,
    pub schedule: ScheduleSection,
    pub readout: ReadoutSection,
    pub noise: NoiseSection,
    pub problem: ProblemSection,
    /// Extra integration time after `t_f`, as a fraction of `t_P`.
    pub settle_fraction: f64,
    pub random_initial_phases: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            physics: PhysicsSection::default(),
            schedule: ScheduleSection::default(),
            readout: ReadoutSection::default(),
            noise: NoiseSection::default(),
            problem: ProblemSection::default(),
            settle_fraction: 0.2,
            random_initial_phases: true,
        }
    }
}

fn ser_scheme<S: Serializer>(s: &Scheme, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_str(s.as_str())
}

fn de_scheme<'de, D: Deserializer<'de>>(de: D) -> Result<Scheme, D::Error> {
    let s = String::deserialize(de)?;
    s.parse().map_err(serde::de::Error::custom)
}

fn positive(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(path, format!("must be finite and > 0, got {v}")))
    }
}

fn non_negative(path: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(path, format!("must be finite and >= 0, got {v}")))
    }
}

fn unit_interval(path: &str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(ConfigError::invalid(path, format!("must lie in [0, 1], got {v}")))
    }
}

impl RunConfig {
    pub fn physics(&self) -> PhysicsConfig {
        let p = &self.physics;
        PhysicsConfig {
            omega_q: p.omega_q,
            tau_sp: p.tau_sp_ns * 1e-9,
            beta_sp: p.beta_sp,
            dt: p.dt_ps * 1e-12,
            amp_floor: p.amp_floor,
        }
    }

    pub fn schedule(&self) -> ScheduleSpec {
        let s = &self.schedule;
        let p_f = s.pump_final_over_threshold * threshold_pump(&self.physics());
        let mut spec = ScheduleSpec::from_ratios(
            s.scheme,
            s.t_mid_ns * 1e-9,
            s.t_p_ns * 1e-9,
            p_f,
            s.pump_ratio_mid,
            s.alpha_final,
            s.alpha_ratio_mid,
            s.zeta_over_alpha,
            s.a_m,
        );
        if let Some(z) = s.zeta {
            spec.zeta = z;
        }
        spec
    }

    pub fn readout(&self) -> ReadoutConfig {
        ReadoutConfig {
            sigma_threshold: self.readout.sigma_threshold,
            sample_interval: self.readout.sample_interval_ns * 1e-9,
        }
    }

    pub fn noise(&self) -> NoiseConfig {
        NoiseConfig { enabled: self.noise.enabled, rate_factor: self.noise.rate_factor }
    }

    pub fn trial_options(&self) -> TrialOptions {
        let sched = self.schedule();
        let mut opts = TrialOptions::for_schedule(&sched);
        opts.t_end = sched.t_f + self.settle_fraction * sched.t_p();
        opts.readout = self.readout();
        opts.noise = self.noise();
        opts.random_initial_phases = self.random_initial_phases;
        opts
    }

    /// Checks every field; the error names the first offending one.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.physics;
        positive("physics.omega_q", p.omega_q)?;
        positive("physics.tau_sp_ns", p.tau_sp_ns)?;
        positive("physics.beta_sp", p.beta_sp)?;
        positive("physics.dt_ps", p.dt_ps)?;
        positive("physics.amp_floor", p.amp_floor)?;
        let product = p.omega_q * p.dt_ps * 1e-12;
        if product > cim_core::schedule::MAX_OMEGA_Q_DT {
            return Err(ConfigError::invalid(
                "physics.dt_ps",
                format!(
                    "omega_q * dt = {product} exceeds the stability limit {}",
                    cim_core::schedule::MAX_OMEGA_Q_DT
                ),
            ));
        }

        let s = &self.schedule;
        positive("schedule.t_mid_ns", s.t_mid_ns)?;
        non_negative("schedule.t_p_ns", s.t_p_ns)?;
        unit_interval("schedule.pump_ratio_mid", s.pump_ratio_mid)?;
        positive("schedule.pump_final_over_threshold", s.pump_final_over_threshold)?;
        unit_interval("schedule.alpha_ratio_mid", s.alpha_ratio_mid)?;
        non_negative("schedule.alpha_final", s.alpha_final)?;
        non_negative("schedule.zeta_over_alpha", s.zeta_over_alpha)?;
        if let Some(z) = s.zeta {
            non_negative("schedule.zeta", z)?;
        }
        positive("schedule.a_m", s.a_m)?;

        let r = &self.readout;
        if !(r.sigma_threshold > 0.0 && r.sigma_threshold < 1.0) {
            return Err(ConfigError::invalid(
                "readout.sigma_threshold",
                format!("must lie in (0, 1), got {}", r.sigma_threshold),
            ));
        }
        positive("readout.sample_interval_ns", r.sample_interval_ns)?;
        if r.sample_interval_ns * 1e3 < p.dt_ps {
            return Err(ConfigError::invalid("readout.sample_interval_ns", "shorter than one time step"));
        }
        non_negative("noise.rate_factor", self.noise.rate_factor)?;
        non_negative("settle_fraction", self.settle_fraction)?;

        let m = self.problem.m;
        if m < 4 || m % 2 != 0 {
            return Err(ConfigError::invalid("problem.m", format!("must be even and >= 4, got {m}")));
        }
        if let Some(t) = &self.problem.target {
            if t.len() != m {
                return Err(ConfigError::invalid(
                    "problem.target",
                    format!("has {} entries, expected {m}", t.len()),
                ));
            }
            if let Some(i) = t.iter().position(|&x| x != 1 && x != -1) {
                return Err(ConfigError::invalid(format!("problem.target[{i}]"), "must be +1 or -1"));
            }
        }
        if let Some(k) = self.problem.flip_edge {
            // the cubic graph has 3M/2 edges
            let edges = 3 * m / 2;
            if k >= edges {
                return Err(ConfigError::invalid(
                    "problem.flip_edge",
                    format!("index {k} out of range for {edges} edges"),
                ));
            }
        }
        Ok(())
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            line: inner.line(),
            column: inner.column(),
            path,
            message: inner.to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let phys = cfg.physics();
        assert_eq!(phys, PhysicsConfig::default());
        let s = cfg.schedule();
        assert_eq!(s.scheme, Scheme::Gp);
        assert!((s.t_mid - 10e-9).abs() < 1e-20);
        assert!((s.t_p() - 1e-6).abs() < 1e-18);
        assert_eq!(s.alpha_f, 0.02);
        assert!((s.p_f / threshold_pump(&phys) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn coarse_step_is_rejected_at_dt() {
        let err = parse_config(r#"{"physics": {"dt_ps": 50}}"#).unwrap_err();
        assert_eq!(err.field_path(), Some("physics.dt_ps"));
        assert!(err.to_string().contains("stability"));
    }

    #[test]
    fn gc_section() {
        let cfg = parse_config(r#"{"schedule": {"scheme": "gc", "alpha_ratio_mid": 0.6}}"#).unwrap();
        let s = cfg.schedule();
        assert_eq!(s.scheme, Scheme::Gc);
        assert!((cim_core::coupling_at(&s, s.t_mid) - 0.012).abs() < 1e-15);
        assert_eq!(s.p_mid, s.p_f * 0.5);
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let err = parse_config("{\n  \"physics\": {\n    \"dt_ps\": ,\n  }\n}").unwrap_err();
        match err {
            ConfigError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn type_errors_carry_the_field_path() {
        let err = parse_config(r#"{"schedule": {"t_p_ns": "slow"}}"#).unwrap_err();
        assert_eq!(err.field_path(), Some("schedule.t_p_ns"));
        let err = parse_config(r#"{"schedule": {"scheme": "fast"}}"#).unwrap_err();
        assert_eq!(err.field_path(), Some("schedule.scheme"));
        let err = parse_config(r#"{"noise": {"rate": 1}}"#).unwrap_err();
        assert_eq!(err.field_path(), Some("noise.rate"));
    }

    #[test]
    fn validation_paths() {
        for (doc, path) in [
            (r#"{"problem": {"m": 7}}"#, "problem.m"),
            (r#"{"problem": {"m": 4, "target": [1, 1, 1]}}"#, "problem.target"),
            (r#"{"problem": {"m": 4, "target": [1, 1, 0, 1]}}"#, "problem.target[2]"),
            (r#"{"problem": {"m": 4, "flip_edge": 6}}"#, "problem.flip_edge"),
            (r#"{"readout": {"sigma_threshold": 1.0}}"#, "readout.sigma_threshold"),
            (r#"{"schedule": {"pump_ratio_mid": 1.5}}"#, "schedule.pump_ratio_mid"),
            (r#"{"schedule": {"a_m": 0}}"#, "schedule.a_m"),
            (r#"{"physics": {"tau_sp_ns": -1}}"#, "physics.tau_sp_ns"),
        ] {
            let err = parse_config(doc).unwrap_err();
            assert_eq!(err.field_path(), Some(path), "{doc}: {err}");
        }
    }

    #[test]
    fn zeta_override() {
        let cfg = parse_config(r#"{"schedule": {"alpha_final": 0, "zeta": 0.02}}"#).unwrap();
        assert_eq!(cfg.schedule().zeta, 0.02);
        assert_eq!(cfg.schedule().alpha_f, 0.0);
        let cfg = parse_config(r#"{"schedule": {"alpha_final": 0.01, "zeta_over_alpha": 2}}"#).unwrap();
        assert_eq!(cfg.schedule().zeta, 0.02);
    }

    #[test]
    fn effective_config_round_trips() {
        let cfg = parse_config(r#"{"schedule": {"scheme": "abrupt", "t_p_ns": 300}, "problem": {"m": 6}}"#).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }

    #[test]
    fn trial_options_follow_settle_fraction() {
        let cfg = parse_config(r#"{"schedule": {"t_p_ns": 500}, "settle_fraction": 0.5}"#).unwrap();
        let opts = cfg.trial_options();
        assert!((opts.t_end - (510e-9 + 250e-9)).abs() < 1e-15);
    }
}
