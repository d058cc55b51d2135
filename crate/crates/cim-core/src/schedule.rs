//! Pump, mutual-coupling and master-injection time profiles.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("{field} must be finite and strictly positive, got {value}")]
    NotPositive { field: &'static str, value: f64 },
    #[error("{field} must be finite and non-negative, got {value}")]
    Negative { field: &'static str, value: f64 },
    #[error("omega_q * dt = {product} exceeds the stability limit 0.2")]
    Unstable { product: f64 },
    #[error("t_f ({t_f}) must not precede t_mid ({t_mid})")]
    TimeOrder { t_mid: f64, t_f: f64 },
    #[error("{field} must not exceed its final value")]
    RampOrder { field: &'static str },
    #[error("unknown scheme, expected gp, gc or abrupt")]
    UnknownScheme,
}

/// Laser constants shared by every slave laser, in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicsConfig {
    /// Cavity photon decay rate ω/Q, s⁻¹.
    pub omega_q: f64,
    /// Spontaneous emission lifetime, s.
    pub tau_sp: f64,
    /// Spontaneous emission coupling efficiency.
    pub beta_sp: f64,
    /// Integration step, s.
    pub dt: f64,
    /// Lower bound on mode amplitudes, √photons.
    pub amp_floor: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self { omega_q: 1e11, tau_sp: 1e-9, beta_sp: 1e-6, dt: 1e-12, amp_floor: 1e-3 }
    }
}

pub const MAX_OMEGA_Q_DT: f64 = 0.2;

impl PhysicsConfig {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        positive("omega_q", self.omega_q)?;
        positive("tau_sp", self.tau_sp)?;
        positive("beta_sp", self.beta_sp)?;
        positive("dt", self.dt)?;
        positive("amp_floor", self.amp_floor)?;
        let product = self.omega_q * self.dt;
        if product > MAX_OMEGA_Q_DT * (1.0 + 1e-12) {
            return Err(ScheduleError::Unstable { product });
        }
        Ok(())
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), ScheduleError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ScheduleError::NotPositive { field, value })
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<(), ScheduleError> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(ScheduleError::Negative { field, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Gradual pumping: the pump is ramped, mutual coupling is constant.
    Gp,
    /// Gradual coupling: the coupling is ramped at constant pump.
    Gc,
    /// Mutual coupling switched on at `t_mid` at constant pump.
    Abrupt,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Gp => "gp",
            Scheme::Gc => "gc",
            Scheme::Abrupt => "abrupt",
        }
    }
}

impl core::str::FromStr for Scheme {
    type Err = ScheduleError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Scheme::Gp, Scheme::Gc, Scheme::Abrupt]
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or(ScheduleError::UnknownScheme)
    }
}

/// Time profiles of one trial. Times in seconds, pumps in carriers/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSpec {
    pub scheme: Scheme,
    pub t_mid: f64,
    pub t_f: f64,
    pub p_mid: f64,
    pub p_f: f64,
    pub alpha_mid: f64,
    pub alpha_f: f64,
    /// Master injection coupling, constant over the trial.
    pub zeta: f64,
    /// Master amplitude, √photons.
    pub a_m: f64,
}

impl ScheduleSpec {
    /// Builds a schedule from the usual ratio parametrisation.
    ///
    /// `zeta` is `zeta_over_alpha * alpha_f`. The ramp-start values are
    /// `p_f * pump_ratio_mid` and `alpha_f * alpha_ratio_mid`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_ratios(
        scheme: Scheme,
        t_mid: f64,
        t_p: f64,
        p_f: f64,
        pump_ratio_mid: f64,
        alpha_f: f64,
        alpha_ratio_mid: f64,
        zeta_over_alpha: f64,
        a_m: f64,
    ) -> Self {
        Self {
            scheme,
            t_mid,
            t_f: t_mid + t_p,
            p_mid: p_f * pump_ratio_mid,
            p_f,
            alpha_mid: alpha_f * alpha_ratio_mid,
            alpha_f,
            zeta: zeta_over_alpha * alpha_f,
            a_m,
        }
    }

    /// Ramp duration `t_f - t_mid`.
    pub fn t_p(&self) -> f64 {
        self.t_f - self.t_mid
    }

    /// A zero-length ramp (`t_f == t_mid`) is accepted as the limit of an
    /// infinitely fast ramp.
    pub fn validate(&self) -> Result<(), ScheduleError> {
        positive("t_mid", self.t_mid)?;
        non_negative("t_f", self.t_f)?;
        if self.t_f < self.t_mid {
            return Err(ScheduleError::TimeOrder { t_mid: self.t_mid, t_f: self.t_f });
        }
        non_negative("p_mid", self.p_mid)?;
        non_negative("p_f", self.p_f)?;
        non_negative("alpha_mid", self.alpha_mid)?;
        non_negative("alpha_f", self.alpha_f)?;
        non_negative("zeta", self.zeta)?;
        non_negative("a_m", self.a_m)?;
        if self.p_mid > self.p_f {
            return Err(ScheduleError::RampOrder { field: "p_mid" });
        }
        if self.alpha_mid > self.alpha_f {
            return Err(ScheduleError::RampOrder { field: "alpha_mid" });
        }
        Ok(())
    }
}

// 0 -> mid over [0, t_mid], mid -> end over [t_mid, t_f], end afterwards.
fn two_segment(t: f64, t_mid: f64, t_f: f64, mid: f64, end: f64) -> f64 {
    if t >= t_f {
        end
    } else if t >= t_mid {
        mid + (end - mid) * (t - t_mid) / (t_f - t_mid)
    } else if t > 0.0 {
        mid * t / t_mid
    } else {
        0.0
    }
}

/// Pump rate at time `t`, carriers/s.
pub fn pump_at(spec: &ScheduleSpec, t: f64) -> f64 {
    match spec.scheme {
        Scheme::Gp => two_segment(t, spec.t_mid, spec.t_f, spec.p_mid, spec.p_f),
        Scheme::Gc | Scheme::Abrupt => spec.p_f,
    }
}

/// Mutual coupling strength α at time `t`.
pub fn coupling_at(spec: &ScheduleSpec, t: f64) -> f64 {
    match spec.scheme {
        Scheme::Gp => spec.alpha_f,
        Scheme::Gc => two_segment(t, spec.t_mid, spec.t_f, spec.alpha_mid, spec.alpha_f),
        Scheme::Abrupt => {
            if t < spec.t_mid {
                0.0
            } else {
                spec.alpha_f
            }
        }
    }
}

/// Pump rate at which the steady-state gain `β N_C / τ_sp` with
/// `N_C = P τ_sp` equals the cavity loss ω/Q.
pub fn threshold_pump(cfg: &PhysicsConfig) -> f64 {
    cfg.omega_q / cfg.beta_sp
}
