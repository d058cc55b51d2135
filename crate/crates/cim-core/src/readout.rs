//! Polarization readout: basis change to circular modes, collective spins in
//! the circular and diagonal bases, success decisions, and the steady-state
//! and linear-response diagnostics.
//!
//! Circular fields use `E_R = (E_D + i E_D̄)/√2` and `E_L = (E_D - i E_D̄)/√2`.
//! The opposite handedness convention only exchanges `R` and `L` for every
//! laser at once, i.e. a global spin flip, which every decision here accepts.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use thiserror::Error;

use crate::dynamics::{gain_coefficient, LaserNetworkState, LaserState};
use crate::ising::IsingProblem;
use crate::math;
use crate::schedule::{coupling_at, PhysicsConfig, ScheduleSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReadoutError {
    #[error("laser {laser} has zero photon number; its spin is undefined")]
    UndefinedSpin { laser: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutConfig {
    /// Minimum `|σ_i|` for every laser before a pattern counts as found.
    pub sigma_threshold: f64,
    /// Spacing of readout samples, s.
    pub sample_interval: f64,
}

impl Default for ReadoutConfig {
    fn default() -> Self {
        Self { sigma_threshold: 0.071, sample_interval: 1e-9 }
    }
}

impl ReadoutConfig {
    pub fn is_valid(&self) -> bool {
        self.sigma_threshold > 0.0
            && self.sigma_threshold < 1.0
            && self.sample_interval.is_finite()
            && self.sample_interval > 0.0
    }
}

/// Circular-mode amplitudes `(A_R, A_L)` of one laser.
pub fn to_circular(a_d: f64, phi_d: f64, a_dbar: f64, phi_dbar: f64) -> (f64, f64) {
    let (sd, cd) = math::sin_cos(phi_d);
    let (sb, cb) = math::sin_cos(phi_dbar);
    let (dr, di) = (a_d * cd, a_d * sd);
    let (br, bi) = (a_dbar * cb, a_dbar * sb);
    // i E_D̄ = (-bi, br)
    let a_r = math::hypot(dr - bi, di + br) * FRAC_1_SQRT_2;
    let a_l = math::hypot(dr + bi, di - br) * FRAC_1_SQRT_2;
    (a_r, a_l)
}

/// Normalized imbalance `(a - b)/√(a² + b²)`.
pub fn spin(a: f64, b: f64) -> Option<f64> {
    let norm = math::sqrt(a * a + b * b);
    if norm > 0.0 && norm.is_finite() {
        Some(((a - b) / norm).clamp(-1.0, 1.0))
    } else {
        None
    }
}

/// Collective spins `(σ_circ, σ_diag)` of every laser.
pub fn collective_spins(lasers: &[LaserState]) -> Result<(Vec<f64>, Vec<f64>), ReadoutError> {
    let mut circ = Vec::with_capacity(lasers.len());
    let mut diag = Vec::with_capacity(lasers.len());
    for (laser, l) in lasers.iter().enumerate() {
        let (a_r, a_l) = to_circular(l.a_d, l.phi_d, l.a_dbar, l.phi_dbar);
        circ.push(spin(a_r, a_l).ok_or(ReadoutError::UndefinedSpin { laser })?);
        diag.push(spin(l.a_d, l.a_dbar).ok_or(ReadoutError::UndefinedSpin { laser })?);
    }
    Ok((circ, diag))
}

/// Snapshot of the readout at one sample time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutFrame {
    pub t: f64,
    pub a_r: Vec<f64>,
    pub a_l: Vec<f64>,
    pub sigma_circ: Vec<f64>,
    pub sigma_diag: Vec<f64>,
}

impl ReadoutFrame {
    pub fn from_state(state: &LaserNetworkState) -> Result<Self, ReadoutError> {
        let (a_r, a_l): (Vec<f64>, Vec<f64>) = state
            .lasers
            .iter()
            .map(|l| to_circular(l.a_d, l.phi_d, l.a_dbar, l.phi_dbar))
            .unzip();
        let (sigma_circ, sigma_diag) = collective_spins(&state.lasers)?;
        Ok(Self { t: state.t, a_r, a_l, sigma_circ, sigma_diag })
    }

    /// The same frame with every spin reversed.
    pub fn flipped(&self) -> Self {
        Self {
            t: self.t,
            a_r: self.a_l.clone(),
            a_l: self.a_r.clone(),
            sigma_circ: self.sigma_circ.iter().map(|s| -s).collect(),
            sigma_diag: self.sigma_diag.iter().map(|s| -s).collect(),
        }
    }
}

/// Outcome of comparing one basis against the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BasisDecision {
    /// Sign pattern equals the target or its global flip.
    pub matched: bool,
    /// Every `|σ_i|` reaches the threshold.
    pub all_above_threshold: bool,
}

impl BasisDecision {
    pub fn found(&self) -> bool {
        self.matched && self.all_above_threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Decision {
    pub circular: BasisDecision,
    pub diagonal: BasisDecision,
}

impl Decision {
    pub fn matched_circ(&self) -> bool {
        self.circular.matched
    }

    pub fn matched_diag(&self) -> bool {
        self.diagonal.matched
    }

    /// Ground state found in at least one basis.
    pub fn found(&self) -> bool {
        self.circular.found() || self.diagonal.found()
    }
}

fn decide_basis(sigma: &[f64], target: &[i8], threshold: f64) -> BasisDecision {
    let sign = |s: f64| -> i8 {
        if s > 0.0 {
            1
        } else if s < 0.0 {
            -1
        } else {
            0
        }
    };
    let same = sigma.iter().zip(target).all(|(&s, &t)| sign(s) == t);
    let opposite = sigma.iter().zip(target).all(|(&s, &t)| sign(s) == -t);
    BasisDecision {
        matched: sigma.len() == target.len() && (same || opposite),
        all_above_threshold: sigma.iter().all(|s| s.abs() >= threshold),
    }
}

/// Compares both bases of `frame` with the problem's target.
pub fn decide(frame: &ReadoutFrame, p: &IsingProblem, cfg: &ReadoutConfig) -> Decision {
    Decision {
        circular: decide_basis(&frame.sigma_circ, p.target(), cfg.sigma_threshold),
        diagonal: decide_basis(&frame.sigma_diag, p.target(), cfg.sigma_threshold),
    }
}

/// Terms of the steady-state gain balance, all in s⁻¹.
///
/// Setting `dA_X/dt = 0` for both modes of laser `i` gives exactly
///
/// ```text
/// E_CVi = ω/Q - 2(ω/Q) ζ A_M Re(E_Di + E_D̄i)/n_i
///             + (ω/Q) α Σ_j J_ij Re(Δ_i* Δ_j)/n_i,     Δ = E_D - E_D̄
/// ```
///
/// For real fields `Re(E_D + E_D̄)/√n = √(2 - σ²)` and `Re(Δ_i*Δ_j)/n = σ_iσ_j`
/// (diagonal-basis spins, equal photon numbers), which is the familiar
/// cavity + master + mutual-injection decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSumTerms {
    pub gain_sum: f64,
    /// `M ω/Q`.
    pub cavity: f64,
    /// Master-injection reduction (subtracted).
    pub master: f64,
    /// Mutual-injection contribution (added).
    pub mutual: f64,
    /// `gain_sum - (cavity - master + mutual)`.
    pub residual: f64,
    /// `Σ_i √(2 - σ_diag,i²)`.
    pub master_spin_sum: f64,
    /// `master / (ω/Q · master_spin_sum)`: the effective prefactor of the
    /// spin-form master term.
    pub master_prefactor: f64,
    /// `Σ_{i<j} J_ij σ_diag,i σ_diag,j`.
    pub ising_energy: f64,
}

/// Steady-state gain balance of `state` under the schedule at time `t`.
pub fn gain_sum_residual(
    state: &LaserNetworkState,
    p: &IsingProblem,
    sched: &ScheduleSpec,
    cfg: &PhysicsConfig,
    t: f64,
) -> GainSumTerms {
    let g = cfg.omega_q;
    let alpha = coupling_at(sched, t);
    let m = state.m();
    let fields: Vec<((f64, f64), (f64, f64), f64)> = state
        .lasers
        .iter()
        .map(|l| (l.field_d(), l.field_dbar(), l.photons()))
        .collect();
    let delta: Vec<(f64, f64)> = fields
        .iter()
        .map(|&((dr, di), (br, bi), _)| (dr - br, di - bi))
        .collect();
    let adj = p.adjacency();
    let (mut gain_sum, mut master, mut mutual) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let ((dr, _), (br, _), n) = fields[i];
        gain_sum += gain_coefficient(state.lasers[i].n_c, cfg);
        master += 2.0 * g * sched.zeta * sched.a_m * (dr + br) / n;
        let overlap: f64 = adj[i]
            .iter()
            .map(|&(j, c)| f64::from(c) * (delta[i].0 * delta[j].0 + delta[i].1 * delta[j].1))
            .sum();
        mutual += g * alpha * overlap / n;
    }
    let cavity = m as f64 * g;
    let sigma: Vec<f64> = state
        .lasers
        .iter()
        .map(|l| spin(l.a_d, l.a_dbar).unwrap_or(0.0))
        .collect();
    let master_spin_sum: f64 = sigma.iter().map(|s| math::sqrt(2.0 - s * s)).sum();
    let ising_energy: f64 = p
        .edges()
        .iter()
        .map(|e| f64::from(e.coupling) * sigma[e.i] * sigma[e.j])
        .sum();
    GainSumTerms {
        gain_sum,
        cavity,
        master,
        mutual,
        residual: gain_sum - (cavity - master + mutual),
        master_spin_sum,
        master_prefactor: if master_spin_sum > 0.0 { master / (g * master_spin_sum) } else { 0.0 },
        ising_energy,
    }
}

/// Linear growth exponent of the spin-mode amplitude near bifurcation for a
/// degree-3 graph driven into its ground state:
/// `(E_CV - ω/Q)/2 + 3 α ω/Q`.
pub fn predicted_growth_rate(e_cv: f64, alpha: f64, cfg: &PhysicsConfig) -> f64 {
    0.5 * (e_cv - cfg.omega_q) + 3.0 * alpha * cfg.omega_q
}
