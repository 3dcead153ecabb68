//! Monte Carlo dephasing of a single qubit under classical Ornstein–Uhlenbeck
//! bias noise, with and without refocusing.
//!
//! Every trajectory starts in `|+⟩` with tunneling switched off, so the only
//! dynamics is the random relative phase `∫ε(t)dt/ħ`. The reported coherence is
//! `|⟨2σ₊⟩|` averaged over trajectories.
//!
//! Randomness: trajectory `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `i`. Trajectories are reduced in fixed-size chunks whose partial sums
//! are combined in index order, so results do not depend on thread count.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::native_gates::DeviceParams;
use crate::qstate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    OrnsteinUhlenbeck,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kind: NoiseKind,
    /// RMS bias fluctuation (energy).
    pub sigma_eps: f64,
    /// Correlation time.
    pub tau_c: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn ou(sigma_eps: f64, tau_c: f64, seed: u64) -> Self {
        NoiseModel {
            kind: NoiseKind::OrnsteinUhlenbeck,
            sigma_eps,
            tau_c,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_eps.is_finite() && self.sigma_eps >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_eps must be non-negative, got {}",
                self.sigma_eps
            )));
        }
        if !(self.tau_c.is_finite() && self.tau_c > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau_c must be positive, got {}",
                self.tau_c
            )));
        }
        Ok(())
    }

    fn rng(&self, trajectory: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trajectory);
        rng
    }
}

/// Stationary OU process with exact updates.
struct OuProcess {
    x: f64,
    sigma: f64,
    tau_c: f64,
}

impl OuProcess {
    fn start<R: Rng>(model: &NoiseModel, rng: &mut R) -> Self {
        let xi: f64 = rng.sample(StandardNormal);
        OuProcess {
            x: model.sigma_eps * xi,
            sigma: model.sigma_eps,
            tau_c: model.tau_c,
        }
    }

    /// `x' = x·e^{−dt/τc} + σ·√(1 − e^{−2dt/τc})·ξ`.
    fn step<R: Rng>(&mut self, dt: f64, rng: &mut R) -> f64 {
        let decay = (-dt / self.tau_c).exp();
        let xi: f64 = rng.sample(StandardNormal);
        self.x = self.x * decay + self.sigma * (1.0 - decay * decay).sqrt() * xi;
        self.x
    }
}

/// `steps` consecutive samples spaced by `dt`, starting from the stationary law.
pub fn sample_ou(model: &NoiseModel, dt: f64, steps: usize) -> Result<Vec<f64>> {
    model.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let mut rng = model.rng(0);
    let mut out = Vec::with_capacity(steps);
    if steps == 0 {
        return Ok(out);
    }
    let mut proc = OuProcess::start(model, &mut rng);
    out.push(proc.x);
    for _ in 1..steps {
        out.push(proc.step(dt, &mut rng));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMode {
    /// No control.
    Free,
    /// Bias alternating `±δE` every `τ`, exactly the refocusing drive.
    BiasAlternation,
    /// Instantaneous `X(π)` every `τ`.
    PiPulse,
}

impl ControlMode {
    pub const ALL: [ControlMode; 3] = [
        ControlMode::Free,
        ControlMode::BiasAlternation,
        ControlMode::PiPulse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ControlMode::Free => "free",
            ControlMode::BiasAlternation => "bias_alternation",
            ControlMode::PiPulse => "pi_pulse",
        }
    }
}

/// Full description of one dephasing run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model: NoiseModel,
    pub mode: ControlMode,
    /// Control spacing (refocusing half-period or π-pulse interval).
    pub tau: f64,
    pub t_max: f64,
    pub n_traj: usize,
    /// Integration steps per correlation time (the step is further shortened
    /// so that it divides `tau`).
    #[serde(default = "default_steps_per_tau_c")]
    pub steps_per_tau_c: usize,
}

fn default_steps_per_tau_c() -> usize {
    10
}

impl ExperimentConfig {
    pub fn new(model: NoiseModel, mode: ControlMode, tau: f64, t_max: f64, n_traj: usize) -> Self {
        ExperimentConfig {
            model,
            mode,
            tau,
            t_max,
            n_traj,
            steps_per_tau_c: default_steps_per_tau_c(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceCurve {
    pub times: Vec<f64>,
    pub coherence: Vec<f64>,
    /// Standard error of `coherence` along the mean direction.
    pub stderr: Vec<f64>,
    pub n_traj: usize,
}

impl CoherenceCurve {
    /// Linear interpolation of the mean coherence at `t`.
    pub fn at(&self, t: f64) -> (f64, f64) {
        let i = self.times.partition_point(|&s| s < t);
        if i == 0 {
            return (self.coherence[0], self.stderr[0]);
        }
        if i >= self.times.len() {
            let last = self.times.len() - 1;
            return (self.coherence[last], self.stderr[last]);
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 1.0 };
        let lerp = |v: &[f64]| v[i - 1] * (1.0 - w) + v[i] * w;
        (lerp(&self.coherence), lerp(&self.stderr))
    }

    pub fn last(&self) -> (f64, f64) {
        let i = self.times.len() - 1;
        (self.coherence[i], self.stderr[i])
    }

    /// `time,mean,stderr` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,mean,stderr\n");
        for ((t, c), e) in self.times.iter().zip(&self.coherence).zip(&self.stderr) {
            let _ = writeln!(out, "{t:e},{c:e},{e:e}");
        }
        out
    }
}

/// Step lengths and the indices (into the boundary list) where a control flip
/// or π pulse happens.
struct TimeGrid {
    steps: Vec<f64>,
    times: Vec<f64>,
    /// `flip[k]` is true when a control event happens at `times[k]`.
    flip: Vec<bool>,
    /// Sign of the bias-alternation drive during step `k`.
    drive_sign: Vec<f64>,
}

fn time_grid(cfg: &ExperimentConfig) -> TimeGrid {
    let base = cfg.model.tau_c / cfg.steps_per_tau_c.max(1) as f64;
    let (h, per_tau) = match cfg.mode {
        ControlMode::Free => (base.min(cfg.t_max), usize::MAX),
        _ => {
            let k = (cfg.tau / base - 1e-9).ceil().max(1.0) as usize;
            (cfg.tau / k as f64, k)
        }
    };
    let full = (cfg.t_max / h * (1.0 - 1e-12)).floor() as usize;
    let mut steps = vec![h; full];
    let covered = full as f64 * h;
    if cfg.t_max - covered > 1e-12 * cfg.t_max {
        steps.push(cfg.t_max - covered);
    }
    let mut times = Vec::with_capacity(steps.len() + 1);
    times.push(0.0);
    for k in 1..=steps.len() {
        times.push(if k <= full { k as f64 * h } else { cfg.t_max });
    }
    let flip = (0..times.len())
        .map(|k| per_tau != usize::MAX && k > 0 && k % per_tau == 0)
        .collect();
    let drive_sign = (0..steps.len())
        .map(|k| {
            if per_tau == usize::MAX || (k / per_tau) % 2 == 0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    TimeGrid {
        steps,
        times,
        flip,
        drive_sign,
    }
}

/// Sums over a block of trajectories: `Σz` and `Σz²` at each grid time.
#[derive(Clone)]
struct Moments {
    sum: Vec<C64>,
    sum_sq: Vec<C64>,
}

impl Moments {
    fn zeros(len: usize) -> Self {
        Moments {
            sum: vec![C64::new(0.0, 0.0); len],
            sum_sq: vec![C64::new(0.0, 0.0); len],
        }
    }

    fn add(&mut self, other: &Moments) {
        for (a, b) in self.sum.iter_mut().zip(&other.sum) {
            *a += b;
        }
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
    }
}

const CHUNK: usize = 64;

fn record(m: &mut Moments, k: usize, phase: f64, conjugated: bool) {
    let z = C64::from_polar(1.0, if conjugated { -phase } else { phase });
    m.sum[k] += z;
    m.sum_sq[k] += z * z;
}

fn run_chunk(cfg: &ExperimentConfig, p: &DeviceParams, grid: &TimeGrid, chunk: usize) -> Moments {
    let mut m = Moments::zeros(grid.times.len());
    let start = chunk * CHUNK;
    let end = (start + CHUNK).min(cfg.n_traj);
    let drive = match cfg.mode {
        ControlMode::BiasAlternation => p.delta_e,
        _ => 0.0,
    };
    for traj in start..end {
        let mut rng = cfg.model.rng(traj as u64);
        let mut ou = OuProcess::start(&cfg.model, &mut rng);
        // z = 2⟨σ₊⟩ = e^{iφ}·(±conj) tracked as a phase and a conjugation flag.
        let mut phase = 0.0f64;
        let mut conjugated = false;
        record(&mut m, 0, phase, conjugated);
        for (k, &dt) in grid.steps.iter().enumerate() {
            let x0 = ou.x;
            let x1 = ou.step(dt, &mut rng);
            let eps = 0.5 * (x0 + x1) + drive * grid.drive_sign[k];
            // a0 ∝ e^{−iεt/2ħ}, a1 ∝ e^{+iεt/2ħ}, so conj(a0)·a1 gains e^{iεt/ħ}.
            phase += eps * dt / p.hbar;
            if cfg.mode == ControlMode::PiPulse && grid.flip[k + 1] {
                // X(π) swaps a0 and a1 up to a common phase: σ₊ → conj(σ₊).
                phase = -phase;
                conjugated = !conjugated;
            }
            record(&mut m, k + 1, phase, conjugated);
        }
    }
    m
}

/// Runs `n_traj` noisy trajectories and returns the mean coherence on the
/// integration grid.
pub fn coherence_experiment(cfg: &ExperimentConfig, p: &DeviceParams) -> Result<CoherenceCurve> {
    cfg.model.validate()?;
    if cfg.n_traj == 0 {
        return Err(Error::NoTrajectories);
    }
    if !(cfg.t_max.is_finite() && cfg.t_max > 0.0) {
        return Err(Error::InvalidParameter(format!("t_max must be positive, got {}", cfg.t_max)));
    }
    if cfg.mode != ControlMode::Free && !(cfg.tau.is_finite() && cfg.tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {}", cfg.tau)));
    }
    let grid = time_grid(cfg);
    let chunks = cfg.n_traj.div_ceil(CHUNK);

    #[cfg(feature = "parallel")]
    let partials: Vec<Moments> = {
        use rayon::prelude::*;
        (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(cfg, p, &grid, c))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let partials: Vec<Moments> = (0..chunks).map(|c| run_chunk(cfg, p, &grid, c)).collect();

    let mut total = Moments::zeros(grid.times.len());
    for part in &partials {
        total.add(part);
    }

    let n = cfg.n_traj as f64;
    let mut coherence = Vec::with_capacity(grid.times.len());
    let mut stderr = Vec::with_capacity(grid.times.len());
    for (s, s2) in total.sum.iter().zip(&total.sum_sq) {
        let mean = s / n;
        let mag = mean.norm();
        let dir = if mag > 0.0 { mean / mag } else { C64::new(1.0, 0.0) };
        // E[(Re(z·conj(u)))²] = (1 + Re(E[z²]·conj(u)²)) / 2 for |z| = 1.
        let second = 0.5 * (1.0 + (s2 / n * dir.conj() * dir.conj()).re);
        let var = (second - mag * mag).max(0.0);
        coherence.push(mag);
        stderr.push(if cfg.n_traj > 1 { (var / (n - 1.0)).sqrt() } else { 0.0 });
    }
    Ok(CoherenceCurve {
        times: grid.times,
        coherence,
        stderr,
        n_traj: cfg.n_traj,
    })
}

/// Exact free-evolution coherence for OU noise:
/// `exp(−(σ/ħ)²τc²·(t/τc − 1 + e^{−t/τc}))`.
pub fn ou_free_coherence(sigma_eps: f64, tau_c: f64, hbar: f64, t: f64) -> f64 {
    let s = sigma_eps * tau_c / hbar;
    let x = t / tau_c;
    (-(s * s) * (x - 1.0 + (-x).exp())).exp()
}

/// Time at which the exact free coherence falls to one half.
pub fn free_half_decay_time(sigma_eps: f64, tau_c: f64, hbar: f64) -> Result<f64> {
    if !(sigma_eps > 0.0 && tau_c > 0.0) {
        return Err(Error::InvalidParameter("free decay needs sigma_eps > 0".into()));
    }
    let f = |t: f64| ou_free_coherence(sigma_eps, tau_c, hbar, t) - 0.5;
    let mut hi = tau_c;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Motional-narrowing dephasing time `T₂ = ħ² / (σ²τc)`.
pub fn motional_narrowing_t2(sigma_eps: f64, tau_c: f64, hbar: f64) -> f64 {
    hbar * hbar / (sigma_eps * sigma_eps * tau_c)
}
