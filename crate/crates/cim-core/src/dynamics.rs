//! Stochastic rate equations of the slave-laser network.
//!
//! Every slave laser carries two diagonal linear-polarization modes `D` and
//! `D̄` (amplitude `A ≥ 0`, phase `φ` relative to the master) and a carrier
//! number `N_C`. Writing `E_X = A_X e^{iφ_X}`, the deterministic part is
//!
//! ```text
//! dE_X/dt = -½(ω/Q - E_CV) E_X + (ω/Q) ζ A_M ∓ ½(ω/Q) Σ_j ξ_ij (E_Dj - E_D̄j)
//! dN_C/dt = P(t) - N_C/τ_sp - E_CV (A_D² + A_D̄²),      E_CV = β N_C / τ_sp
//! ```
//!
//! (`-` for `D`, `+` for `D̄`, `ξ_ij = α(t) J_ij`), integrated in amplitude /
//! phase form with classical RK4. Spontaneous emission is added after each
//! step as a Poisson number of unit-norm, random-phase photons per mode.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

use crate::ising::IsingProblem;
use crate::math;
use crate::schedule::{coupling_at, pump_at, PhysicsConfig, ScheduleSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("non-finite state in laser {laser} at t = {t:e} s")]
    NumericFault { laser: usize, t: f64 },
    #[error("state has {got} lasers, problem has {expected}")]
    SizeMismatch { expected: usize, got: usize },
}

/// One slave laser. Amplitudes in √photons, phases in radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaserState {
    pub a_d: f64,
    pub phi_d: f64,
    pub a_dbar: f64,
    pub phi_dbar: f64,
    pub n_c: f64,
}

impl LaserState {
    /// Total photon number `A_D² + A_D̄²`.
    pub fn photons(&self) -> f64 {
        self.a_d * self.a_d + self.a_dbar * self.a_dbar
    }

    pub fn field_d(&self) -> (f64, f64) {
        polar(self.a_d, self.phi_d)
    }

    pub fn field_dbar(&self) -> (f64, f64) {
        polar(self.a_dbar, self.phi_dbar)
    }

    fn is_finite(&self) -> bool {
        self.a_d.is_finite()
            && self.phi_d.is_finite()
            && self.a_dbar.is_finite()
            && self.phi_dbar.is_finite()
            && self.n_c.is_finite()
    }

    /// Folds negative amplitudes into the phase, applies the floor and keeps
    /// the carrier number non-negative.
    fn normalize(&mut self, floor: f64) {
        fold(&mut self.a_d, &mut self.phi_d, floor);
        fold(&mut self.a_dbar, &mut self.phi_dbar, floor);
        if self.n_c < 0.0 {
            self.n_c = 0.0;
        }
    }
}

fn fold(a: &mut f64, phi: &mut f64, floor: f64) {
    if *a < 0.0 {
        *a = -*a;
        *phi += PI;
    }
    if *a < floor {
        *a = floor;
    }
    *phi = math::wrap_phase(*phi);
}

#[inline]
fn polar(a: f64, phi: f64) -> (f64, f64) {
    let (s, c) = math::sin_cos(phi);
    (a * c, a * s)
}

/// Time derivatives of one [`LaserState`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LaserRates {
    pub a_d: f64,
    pub phi_d: f64,
    pub a_dbar: f64,
    pub phi_dbar: f64,
    pub n_c: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaserNetworkState {
    pub lasers: Vec<LaserState>,
    /// Simulation time, s.
    pub t: f64,
}

impl LaserNetworkState {
    /// All modes at the amplitude floor with uniformly random phases and
    /// empty carrier reservoirs.
    pub fn initial<R: Rng + ?Sized>(m: usize, cfg: &PhysicsConfig, rng: &mut R) -> Self {
        let lasers = (0..m)
            .map(|_| LaserState {
                a_d: cfg.amp_floor,
                phi_d: math::wrap_phase(rng.gen::<f64>() * TAU),
                a_dbar: cfg.amp_floor,
                phi_dbar: math::wrap_phase(rng.gen::<f64>() * TAU),
                n_c: 0.0,
            })
            .collect();
        Self { lasers, t: 0.0 }
    }

    /// Initial state with every phase zero (exactly symmetric modes).
    pub fn symmetric(m: usize, cfg: &PhysicsConfig) -> Self {
        let l = LaserState { a_d: cfg.amp_floor, phi_d: 0.0, a_dbar: cfg.amp_floor, phi_dbar: 0.0, n_c: 0.0 };
        Self { lasers: alloc::vec![l; m], t: 0.0 }
    }

    pub fn m(&self) -> usize {
        self.lasers.len()
    }

    pub fn mean_carriers(&self) -> f64 {
        if self.lasers.is_empty() {
            return 0.0;
        }
        self.lasers.iter().map(|l| l.n_c).sum::<f64>() / self.lasers.len() as f64
    }

    fn check_finite(&self) -> Result<(), DynamicsError> {
        match self.lasers.iter().position(|l| !l.is_finite()) {
            Some(laser) => Err(DynamicsError::NumericFault { laser, t: self.t }),
            None => Ok(()),
        }
    }
}

/// Spontaneous-emission settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub enabled: bool,
    /// Multiplies the per-mode emission rate `E_CV`; `0.5` splits one rate
    /// between the two modes.
    pub rate_factor: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { enabled: true, rate_factor: 1.0 }
    }
}

impl NoiseConfig {
    pub fn off() -> Self {
        Self { enabled: false, rate_factor: 1.0 }
    }
}

/// Stimulated gain coefficient `E_CV = β N_C / τ_sp`, s⁻¹.
#[inline]
pub fn gain_coefficient(n_c: f64, cfg: &PhysicsConfig) -> f64 {
    cfg.beta_sp * n_c / cfg.tau_sp
}

/// Sparse coupling rows `(j, J_ij)` in compressed form.
#[derive(Debug, Clone, PartialEq)]
pub struct Couplings {
    offsets: Vec<usize>,
    entries: Vec<(usize, f64)>,
}

impl Couplings {
    pub fn from_problem(p: &IsingProblem) -> Self {
        let adj = p.adjacency();
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        let mut entries = Vec::new();
        offsets.push(0);
        for row in adj {
            entries.extend(row.into_iter().map(|(j, c)| (j, f64::from(c))));
            offsets.push(entries.len());
        }
        Self { offsets, entries }
    }

    pub fn m(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.entries[self.offsets[i]..self.offsets[i + 1]]
    }
}

/// RK4 integrator with preallocated stage buffers.
#[derive(Debug, Clone)]
pub struct Stepper {
    couplings: Couplings,
    schedule: ScheduleSpec,
    physics: PhysicsConfig,
    noise: NoiseConfig,
    stages: [Vec<LaserRates>; 4],
    probe: Vec<LaserState>,
    // per-mode unit phasors and the spin-mode field E_D - E_D̄
    unit_d: Vec<(f64, f64)>,
    unit_dbar: Vec<(f64, f64)>,
    delta: Vec<(f64, f64)>,
}

impl Stepper {
    pub fn new(p: &IsingProblem, schedule: ScheduleSpec, physics: PhysicsConfig, noise: NoiseConfig) -> Self {
        let couplings = Couplings::from_problem(p);
        let m = couplings.m();
        let zeros = alloc::vec![LaserRates::default(); m];
        Self {
            couplings,
            schedule,
            physics,
            noise,
            stages: [zeros.clone(), zeros.clone(), zeros.clone(), zeros],
            probe: alloc::vec![LaserState::default(); m],
            unit_d: alloc::vec![(0.0, 0.0); m],
            unit_dbar: alloc::vec![(0.0, 0.0); m],
            delta: alloc::vec![(0.0, 0.0); m],
        }
    }

    pub fn physics(&self) -> &PhysicsConfig {
        &self.physics
    }

    pub fn schedule(&self) -> &ScheduleSpec {
        &self.schedule
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    fn evaluate(&mut self, lasers: &[LaserState], t: f64, stage: usize) {
        let mut out = core::mem::take(&mut self.stages[stage]);
        self.drift_into(lasers, t, &mut out);
        self.stages[stage] = out;
    }

    /// Writes the drift of `lasers` at time `t` into `out`.
    pub fn drift_into(&mut self, lasers: &[LaserState], t: f64, out: &mut [LaserRates]) {
        let cfg = &self.physics;
        let g = cfg.omega_q;
        let floor = cfg.amp_floor;
        let kappa = 0.5 * g * coupling_at(&self.schedule, t);
        let master = g * self.schedule.zeta * self.schedule.a_m;
        let pump = pump_at(&self.schedule, t);

        for (i, l) in lasers.iter().enumerate() {
            let (sd, cd) = math::sin_cos(l.phi_d);
            let (sb, cb) = math::sin_cos(l.phi_dbar);
            self.unit_d[i] = (cd, sd);
            self.unit_dbar[i] = (cb, sb);
            self.delta[i] = (l.a_d * cd - l.a_dbar * cb, l.a_d * sd - l.a_dbar * sb);
        }

        for (i, (l, r)) in lasers.iter().zip(out.iter_mut()).enumerate() {
            let (mut sum_re, mut sum_im) = (0.0, 0.0);
            if kappa != 0.0 {
                for &(j, c) in self.couplings.row(i) {
                    sum_re += c * self.delta[j].0;
                    sum_im += c * self.delta[j].1;
                }
            }
            let gain = gain_coefficient(l.n_c, cfg);
            let loss = -0.5 * (g - gain);
            // injected field seen by each mode
            let f_d = (master - kappa * sum_re, -kappa * sum_im);
            let f_b = (master + kappa * sum_re, kappa * sum_im);
            let (cd, sd) = self.unit_d[i];
            let (cb, sb) = self.unit_dbar[i];
            // project onto e^{-iφ}: real part drives A, imaginary part drives φ
            r.a_d = loss * l.a_d + f_d.0 * cd + f_d.1 * sd;
            r.phi_d = (f_d.1 * cd - f_d.0 * sd) / phase_denominator(l.a_d, floor);
            r.a_dbar = loss * l.a_dbar + f_b.0 * cb + f_b.1 * sb;
            r.phi_dbar = (f_b.1 * cb - f_b.0 * sb) / phase_denominator(l.a_dbar, floor);
            r.n_c = pump - l.n_c / cfg.tau_sp - gain * l.photons();
        }
    }

    /// One RK4 step of the deterministic drift, without noise or clamping.
    pub fn rk4(&mut self, state: &mut LaserNetworkState) {
        let dt = self.physics.dt;
        let t = state.t;
        let m = state.lasers.len();

        self.evaluate(&state.lasers, t, 0);
        self.fill_probe(&state.lasers, 0, 0.5 * dt);
        let probe = core::mem::take(&mut self.probe);
        self.evaluate(&probe, t + 0.5 * dt, 1);
        self.probe = probe;
        self.fill_probe(&state.lasers, 1, 0.5 * dt);
        let probe = core::mem::take(&mut self.probe);
        self.evaluate(&probe, t + 0.5 * dt, 2);
        self.probe = probe;
        self.fill_probe(&state.lasers, 2, dt);
        let probe = core::mem::take(&mut self.probe);
        self.evaluate(&probe, t + dt, 3);
        self.probe = probe;

        let w = dt / 6.0;
        let [k1, k2, k3, k4] = &self.stages;
        for i in 0..m {
            let l = &mut state.lasers[i];
            let comb = |f: fn(&LaserRates) -> f64| f(&k1[i]) + 2.0 * f(&k2[i]) + 2.0 * f(&k3[i]) + f(&k4[i]);
            l.a_d += w * comb(|r| r.a_d);
            l.phi_d += w * comb(|r| r.phi_d);
            l.a_dbar += w * comb(|r| r.a_dbar);
            l.phi_dbar += w * comb(|r| r.phi_dbar);
            l.n_c += w * comb(|r| r.n_c);
        }
        state.t = t + dt;
    }

    fn fill_probe(&mut self, base: &[LaserState], stage: usize, h: f64) {
        let k = &self.stages[stage];
        for ((p, b), r) in self.probe.iter_mut().zip(base).zip(k) {
            p.a_d = b.a_d + h * r.a_d;
            p.phi_d = b.phi_d + h * r.phi_d;
            p.a_dbar = b.a_dbar + h * r.a_dbar;
            p.phi_dbar = b.phi_dbar + h * r.phi_dbar;
            p.n_c = b.n_c + h * r.n_c;
        }
    }

    /// RK4 drift, then spontaneous emission, then invariant clamping.
    pub fn step<R: Rng + ?Sized>(&mut self, state: &mut LaserNetworkState, rng: &mut R) -> Result<(), DynamicsError> {
        self.rk4(state);
        state.check_finite()?;
        let floor = self.physics.amp_floor;
        for l in &mut state.lasers {
            l.normalize(floor);
        }
        if self.noise.enabled {
            apply_spontaneous_noise(state, &self.physics, &self.noise, rng);
        }
        Ok(())
    }
}

#[inline]
fn phase_denominator(a: f64, floor: f64) -> f64 {
    // RK4 probes may carry a transiently negative radius
    if a >= 0.0 {
        a.max(floor)
    } else {
        a.min(-floor)
    }
}

/// Drift of every state field at time `t` (noise excluded).
pub fn drift(
    state: &LaserNetworkState,
    p: &IsingProblem,
    sched: &ScheduleSpec,
    cfg: &PhysicsConfig,
    t: f64,
) -> Result<Vec<LaserRates>, DynamicsError> {
    if state.m() != p.m() {
        return Err(DynamicsError::SizeMismatch { expected: p.m(), got: state.m() });
    }
    state.check_finite()?;
    let mut stepper = Stepper::new(p, *sched, *cfg, NoiseConfig::off());
    let mut out = alloc::vec![LaserRates::default(); p.m()];
    stepper.drift_into(&state.lasers, t, &mut out);
    Ok(out)
}

// Per-step emission counts are almost always 0 or 1, so small means use
// CDF inversion and skip the general sampler's setup.
enum EventCount {
    Small { p0: f64, mean: f64 },
    Large(Poisson<f64>),
    Zero,
}

impl EventCount {
    fn new(mean: f64) -> Self {
        if mean < 1.0 {
            EventCount::Small { p0: math::exp(-mean), mean }
        } else {
            Poisson::new(mean).map_or(EventCount::Zero, EventCount::Large)
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match *self {
            EventCount::Small { p0, mean } => {
                let u: f64 = rng.gen();
                let (mut k, mut p, mut cdf) = (0u64, p0, p0);
                while u >= cdf && k < 64 {
                    k += 1;
                    p *= mean / k as f64;
                    cdf += p;
                }
                k
            }
            EventCount::Large(ref d) => d.sample(rng) as u64,
            EventCount::Zero => 0,
        }
    }
}

/// Adds `k ~ Poisson(r_factor · E_CV · dt)` unit-norm photons of uniformly
/// random phase to each mode, then re-applies the amplitude floor.
pub fn apply_spontaneous_noise<R: Rng + ?Sized>(
    state: &mut LaserNetworkState,
    cfg: &PhysicsConfig,
    noise: &NoiseConfig,
    rng: &mut R,
) {
    for l in &mut state.lasers {
        let mean = noise.rate_factor * gain_coefficient(l.n_c, cfg) * cfg.dt;
        if !(mean > 0.0) {
            continue;
        }
        let sampler = EventCount::new(mean);
        for (a, phi) in [(&mut l.a_d, &mut l.phi_d), (&mut l.a_dbar, &mut l.phi_dbar)] {
            let k = sampler.sample(rng);
            if k == 0 {
                continue;
            }
            let (mut re, mut im) = polar(*a, *phi);
            for _ in 0..k {
                let (s, c) = math::sin_cos(rng.gen::<f64>() * TAU);
                re += c;
                im += s;
            }
            *a = math::hypot(re, im).max(cfg.amp_floor);
            *phi = math::atan2(im, re);
        }
    }
}

/// One full integration step of `state` (allocating convenience wrapper
/// around [`Stepper::step`]).
pub fn step<R: Rng + ?Sized>(
    state: &mut LaserNetworkState,
    p: &IsingProblem,
    sched: &ScheduleSpec,
    cfg: &PhysicsConfig,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<(), DynamicsError> {
    if state.m() != p.m() {
        return Err(DynamicsError::SizeMismatch { expected: p.m(), got: state.m() });
    }
    Stepper::new(p, *sched, *cfg, *noise).step(state, rng)
}
