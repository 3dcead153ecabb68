//! Exact evolution under the piecewise-constant device Hamiltonian
//!
//! ```text
//! H = Σ_q [ on_q · Δ σx⁽q⁾ + (ε_q / 2) σz⁽q⁾ ]  −  Σ_ℓ (J_ℓ / 2) σz⊗σz⁽ℓ⁾
//! ```
//!
//! A bias `ε` held for `t` gives `Z(εt/ħ)`, free tunneling for `t` gives
//! `X(2Δt/ħ)`, and a coupling `J` held for `t` gives `CP(Jt/ħ)`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::constants::{MAX_QUBITS, TOL};
use crate::error::{Error, Result};
use crate::native_gates::DeviceParams;
use crate::qstate::{QubitIndex, StateVector, UnitaryMatrix, C64, ONE, ZERO};

/// Interval of constant controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSegment {
    pub duration: f64,
    /// Per-qubit bias ε_q.
    pub bias: Vec<f64>,
    /// Per-qubit switch for the Δσx term.
    pub tunneling_on: Vec<bool>,
    /// Per-link coupling J_ℓ on `(ℓ, ℓ+1)`; length `n − 1`.
    pub coupling: Vec<f64>,
}

impl PulseSegment {
    /// All controls off.
    pub fn idle(n: usize, duration: f64) -> Self {
        PulseSegment {
            duration,
            bias: vec![0.0; n],
            tunneling_on: vec![false; n],
            coupling: vec![0.0; n.saturating_sub(1)],
        }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::InconsistentSchedule(format!(
                "segment duration must be positive, got {}",
                self.duration
            )));
        }
        if self.bias.len() != n || self.tunneling_on.len() != n {
            return Err(Error::InconsistentSchedule(format!(
                "expected {n} per-qubit entries, found bias {} / tunneling {}",
                self.bias.len(),
                self.tunneling_on.len()
            )));
        }
        if self.coupling.len() != n.saturating_sub(1) {
            return Err(Error::InconsistentSchedule(format!(
                "expected {} links, found {}",
                n.saturating_sub(1),
                self.coupling.len()
            )));
        }
        if self.bias.iter().chain(&self.coupling).any(|v| !v.is_finite()) {
            return Err(Error::InconsistentSchedule("non-finite control value".into()));
        }
        Ok(())
    }

    fn has_coupling(&self) -> bool {
        self.coupling.iter().any(|&j| j != 0.0)
    }

    fn has_tunneling(&self) -> bool {
        self.tunneling_on.iter().any(|&on| on)
    }
}

/// Time-ordered list of segments (earliest first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub n_qubits: usize,
    pub segments: Vec<PulseSegment>,
}

impl Schedule {
    pub fn new(n_qubits: usize) -> Self {
        Schedule {
            n_qubits,
            segments: Vec::new(),
        }
    }

    pub fn push(&mut self, seg: PulseSegment) -> Result<()> {
        seg.check(self.n_qubits)?;
        self.segments.push(seg);
        Ok(())
    }

    pub fn extend(&mut self, other: Schedule) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        self.segments.extend(other.segments);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 || self.n_qubits > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                n: self.n_qubits,
                max: MAX_QUBITS,
            });
        }
        self.segments.iter().try_for_each(|s| s.check(self.n_qubits))
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// First-order Magnus phase `∫ε_q dt / ħ` on one qubit, i.e. the Z angle the
    /// bias alone would imprint.
    pub fn bias_phase(&self, qubit: QubitIndex, p: &DeviceParams) -> f64 {
        let i = qubit.get() - 1;
        self.segments
            .iter()
            .map(|s| s.bias[i] * s.duration)
            .sum::<f64>()
            / p.hbar
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: Schedule = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    /// One row per segment: `t_start,t_end,bias_1..,tunneling_1..,coupling_1..`.
    pub fn to_csv(&self) -> String {
        let n = self.n_qubits;
        let mut out = String::from("t_start,t_end");
        for q in 1..=n {
            let _ = write!(out, ",bias_{q}");
        }
        for q in 1..=n {
            let _ = write!(out, ",tunneling_{q}");
        }
        for l in 1..n {
            let _ = write!(out, ",coupling_{l}");
        }
        out.push('\n');
        let mut t = 0.0;
        for s in &self.segments {
            let end = t + s.duration;
            let _ = write!(out, "{t:e},{end:e}");
            for b in &s.bias {
                let _ = write!(out, ",{b:e}");
            }
            for on in &s.tunneling_on {
                let _ = write!(out, ",{}", u8::from(*on));
            }
            for j in &s.coupling {
                let _ = write!(out, ",{j:e}");
            }
            out.push('\n');
            t = end;
        }
        out
    }
}

/// Dense Hamiltonian of one segment.
pub fn hamiltonian(seg: &PulseSegment, p: &DeviceParams, n: usize) -> Result<DMatrix<C64>> {
    seg.check(n)?;
    let dim = 1usize << n;
    let mut h = DMatrix::<C64>::zeros(dim, dim);
    for idx in 0..dim {
        h[(idx, idx)] = C64::new(diagonal_energy(seg, n, idx), 0.0);
        for qi in 0..n {
            if seg.tunneling_on[qi] {
                let flipped = idx ^ (1 << (n - 1 - qi));
                h[(flipped, idx)] += C64::new(p.delta, 0.0);
            }
        }
    }
    Ok(h)
}

/// Diagonal part of H at basis index `idx`.
fn diagonal_energy(seg: &PulseSegment, n: usize, idx: usize) -> f64 {
    let z = |qi: usize| if (idx >> (n - 1 - qi)) & 1 == 0 { 1.0 } else { -1.0 };
    let bias: f64 = (0..n).map(|qi| 0.5 * seg.bias[qi] * z(qi)).sum();
    let coupling: f64 = seg
        .coupling
        .iter()
        .enumerate()
        .map(|(l, j)| -0.5 * j * z(l) * z(l + 1))
        .sum();
    bias + coupling
}

/// `exp(−i h·σ t/ħ)` for a single qubit with field `h = (hx, 0, hz)`.
fn spin_exponential(hx: f64, hz: f64, t_over_hbar: f64) -> UnitaryMatrix {
    let norm = hx.hypot(hz);
    let angle = norm * t_over_hbar;
    let (c, s) = (angle.cos(), angle.sin());
    let (nx, nz) = if norm > 0.0 { (hx / norm, hz / norm) } else { (0.0, 0.0) };
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(c, -s * nz),
            C64::new(0.0, -s * nx),
            C64::new(0.0, -s * nx),
            C64::new(c, s * nz),
        ],
    );
    UnitaryMatrix::from_raw(m)
}

fn per_qubit_factors(seg: &PulseSegment, p: &DeviceParams) -> Vec<UnitaryMatrix> {
    seg.bias
        .iter()
        .zip(&seg.tunneling_on)
        .map(|(&eps, &on)| {
            let hx = if on { p.delta } else { 0.0 };
            spin_exponential(hx, 0.5 * eps, seg.duration / p.hbar)
        })
        .collect()
}

fn diagonal_phases(seg: &PulseSegment, p: &DeviceParams, n: usize) -> Vec<C64> {
    (0..1usize << n)
        .map(|idx| C64::from_polar(1.0, -diagonal_energy(seg, n, idx) * seg.duration / p.hbar))
        .collect()
}

/// `exp(−iHt/ħ)` by Hermitian eigendecomposition of the dense Hamiltonian.
pub fn segment_unitary_dense(seg: &PulseSegment, p: &DeviceParams, n: usize) -> Result<UnitaryMatrix> {
    let h = hamiltonian(seg, p, n)?;
    let eig = h.symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = eig
        .eigenvalues
        .map(|e| C64::from_polar(1.0, -e * seg.duration / p.hbar));
    let mut vd = v.clone();
    for (j, mut col) in vd.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    Ok(UnitaryMatrix::from_raw(vd * v.adjoint()))
}

enum Propagator {
    /// Tensor product of one 2×2 factor per qubit (no coupling).
    Product(Vec<UnitaryMatrix>),
    /// Diagonal in the computational basis (no tunneling).
    Diagonal(Vec<C64>),
    Dense(UnitaryMatrix),
}

fn propagator(seg: &PulseSegment, p: &DeviceParams, n: usize) -> Result<Propagator> {
    seg.check(n)?;
    if !seg.has_coupling() {
        Ok(Propagator::Product(per_qubit_factors(seg, p)))
    } else if !seg.has_tunneling() {
        Ok(Propagator::Diagonal(diagonal_phases(seg, p, n)))
    } else {
        Ok(Propagator::Dense(segment_unitary_dense(seg, p, n)?))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::TooManyQubits { n, max: MAX_QUBITS });
    }
    Ok(())
}

/// `exp(−iH(seg)·duration/ħ)`. Uncoupled segments factor into exact per-qubit
/// exponentials, tunneling-free segments are diagonal, and everything else
/// goes through [`segment_unitary_dense`].
pub fn segment_unitary(seg: &PulseSegment, p: &DeviceParams, n: usize) -> Result<UnitaryMatrix> {
    check_n(n)?;
    Ok(match propagator(seg, p, n)? {
        Propagator::Product(factors) => factors
            .iter()
            .skip(1)
            .fold(factors[0].clone(), |acc, f| acc.kron(f)),
        Propagator::Diagonal(d) => UnitaryMatrix::from_raw(DMatrix::from_diagonal(
            &nalgebra::DVector::from_vec(d),
        )),
        Propagator::Dense(u) => u,
    })
}

/// Time-ordered product of all segment propagators (earliest acts first).
pub fn evolve(sched: &Schedule, p: &DeviceParams) -> Result<UnitaryMatrix> {
    let n = sched.n_qubits;
    check_n(n)?;
    let mut u = UnitaryMatrix::identity_qubits(n);
    for seg in &sched.segments {
        match propagator(seg, p, n)? {
            Propagator::Product(factors) => {
                for (qi, f) in factors.iter().enumerate() {
                    if f.get(0, 1) != ZERO || f.get(0, 0) != ONE || f.get(1, 1) != ONE {
                        u.apply_local(f, &[QubitIndex::new(qi + 1)])?;
                    }
                }
            }
            Propagator::Diagonal(d) => u.apply_diagonal(&d),
            Propagator::Dense(m) => u = m.mul(&u)?,
        }
    }
    Ok(u)
}

/// Evolves a state instead of the full propagator.
pub fn evolve_state(sched: &Schedule, p: &DeviceParams, state: &StateVector) -> Result<StateVector> {
    let n = sched.n_qubits;
    check_n(n)?;
    if state.n_qubits() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.n_qubits(),
        });
    }
    let mut s = state.clone();
    for seg in &sched.segments {
        match propagator(seg, p, n)? {
            Propagator::Product(factors) => {
                for (qi, f) in factors.iter().enumerate() {
                    s.apply_local(f, &[QubitIndex::new(qi + 1)])?;
                }
            }
            Propagator::Diagonal(d) => {
                let amps: Vec<C64> = s.amplitudes().iter().zip(&d).map(|(a, p)| a * p).collect();
                s = StateVector::from_amplitudes(amps)?;
            }
            Propagator::Dense(m) => s = crate::qstate::apply(&m, &s)?,
        }
    }
    Ok(s)
}

/// Square-wave refocusing drive: bias `±δE` on `qubits` flipping every `τ`,
/// starting with `start_sign · δE`, tunneling on everywhere. The final
/// segment is truncated so the durations sum to `total_time`.
pub fn refocusing_schedule(
    qubits: &[QubitIndex],
    n: usize,
    total_time: f64,
    p: &DeviceParams,
    start_sign: f64,
) -> Result<Schedule> {
    check_n(n)?;
    if !(p.tau.is_finite() && p.tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {}", p.tau)));
    }
    if !(total_time.is_finite() && total_time > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "total time must be positive, got {total_time}"
        )));
    }
    for qb in qubits {
        qb.check(n)?;
    }
    let sign = if start_sign < 0.0 { -1.0 } else { 1.0 };
    let count = (total_time / p.tau - TOL.time_grid).ceil().max(1.0) as usize;
    let mut sched = Schedule::new(n);
    for k in 0..count {
        let start = k as f64 * p.tau;
        let end = if k + 1 == count { total_time } else { (k + 1) as f64 * p.tau };
        let s = if k % 2 == 0 { sign } else { -sign };
        let mut seg = PulseSegment::idle(n, end - start);
        seg.tunneling_on = vec![true; n];
        for qb in qubits {
            seg.bias[qb.get() - 1] = s * p.delta_e;
        }
        sched.push(seg)?;
    }
    Ok(sched)
}

/// `δE·τ/ħ`: the Z angle left over when a refocusing sequence stops halfway
/// through a period.
pub fn magnus_worst_case(p: &DeviceParams) -> f64 {
    p.delta_e * p.tau / p.hbar
}

/// Half-period at which each refocusing segment accumulates exactly `2πk` of
/// bias phase. At these points the time-averaged tunneling amplitude
/// `Δ·sinc(δEτ/2ħ)` vanishes, so the drive actually freezes the qubit.
pub fn resonant_tau(delta_e: f64, hbar: f64, k: u32) -> f64 {
    TAU * f64::from(k.max(1)) * hbar / delta_e
}

/// `1 − |tr U| / d`.
pub fn idle_infidelity(u: &UnitaryMatrix) -> f64 {
    1.0 - u.trace().norm() / u.dim() as f64
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FreezingPoint {
    pub tau: f64,
    /// `δE·τ/ħ`.
    pub bias_area: f64,
    pub refocused: f64,
    pub unrefocused: f64,
}

/// Single-qubit idle infidelity with and without refocusing for each `τ`.
pub fn freezing_sweep(p: &DeviceParams, total_time: f64, taus: &[f64]) -> Result<Vec<FreezingPoint>> {
    let q1 = [QubitIndex::new(1)];
    let mut bare = Schedule::new(1);
    let mut seg = PulseSegment::idle(1, total_time);
    seg.tunneling_on[0] = true;
    bare.push(seg)?;
    let unrefocused = idle_infidelity(&evolve(&bare, p)?);
    taus.iter()
        .map(|&tau| {
            let pt = DeviceParams { tau, ..*p };
            let sched = refocusing_schedule(&q1, 1, total_time, &pt, 1.0)?;
            Ok(FreezingPoint {
                tau,
                bias_area: magnus_worst_case(&pt),
                refocused: idle_infidelity(&evolve(&sched, &pt)?),
                unrefocused,
            })
        })
        .collect()
}

/// Default freezing-sweep grid in units of `ħ/Δ`, with `T = 0.1·πħ/Δ`.
pub fn default_freezing_grid(p: &DeviceParams) -> (f64, Vec<f64>) {
    let unit = p.hbar / p.delta.max(f64::MIN_POSITIVE);
    (
        0.1 * PI * unit,
        [0.04, 0.02, 0.01, 0.005].iter().map(|t| t * unit).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::native_gates::{cp_matrix, x_matrix, z_matrix};
    use crate::qstate::{embed, phase_distance, q};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(delta: f64, delta_e: f64, tau: f64) -> DeviceParams {
        DeviceParams {
            delta,
            delta_e,
            tau,
            ..Default::default()
        }
    }

    #[test]
    fn all_off_is_identity() {
        let seg = PulseSegment::idle(3, 1.7);
        let u = segment_unitary(&seg, &DeviceParams::default(), 3).unwrap();
        assert!(u.max_abs_diff(&UnitaryMatrix::identity(8)).unwrap() < 1e-15);
    }

    #[test]
    fn free_tunneling_is_an_x_rotation() {
        let p = params(0.7, 10.0, 0.01);
        let mut seg = PulseSegment::idle(1, 1.3);
        seg.tunneling_on[0] = true;
        let u = segment_unitary(&seg, &p, 1).unwrap();
        let want = x_matrix(2.0 * 0.7 * 1.3);
        assert!(u.max_abs_diff(&want).unwrap() < 1e-12);
        let dense = segment_unitary_dense(&seg, &p, 1).unwrap();
        assert!(dense.max_abs_diff(&want).unwrap() < 1e-12);
    }

    #[test]
    fn coupler_gives_conditional_phase() {
        let p = DeviceParams::default();
        let mut seg = PulseSegment::idle(2, 0.9);
        seg.coupling[0] = 1.4;
        let u = segment_unitary(&seg, &p, 2).unwrap();
        assert!(u.max_abs_diff(&cp_matrix(1.4 * 0.9)).unwrap() < 1e-12);
    }

    #[test]
    fn fast_paths_agree_with_eigendecomposition() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let p = params(0.8, 5.0, 0.1);
        for n in 1..=3 {
            for _ in 0..10 {
                let mut seg = PulseSegment::idle(n, rng.random_range(0.1..2.0));
                for qi in 0..n {
                    seg.bias[qi] = rng.random_range(-3.0..3.0);
                    seg.tunneling_on[qi] = rng.random_bool(0.5);
                }
                let dense = segment_unitary_dense(&seg, &p, n).unwrap();
                let fast = segment_unitary(&seg, &p, n).unwrap();
                assert!(fast.max_abs_diff(&dense).unwrap() < 1e-12);
                let mut one = Schedule::new(n);
                one.push(seg).unwrap();
                assert!(evolve(&one, &p).unwrap().max_abs_diff(&dense).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn coupled_tunneling_segment_is_unitary_and_consistent() {
        let p = params(1.0, 5.0, 0.1);
        let mut seg = PulseSegment::idle(3, 0.6);
        seg.tunneling_on = vec![true, false, true];
        seg.bias = vec![0.3, -1.0, 2.0];
        seg.coupling = vec![0.5, 1.5];
        let u = segment_unitary(&seg, &p, 3).unwrap();
        assert!(u.unitarity_error() < 1e-12);
        // Trotter oracle: (e^{-iH_a t/m} e^{-iH_b t/m})^m with m large.
        let mut diag = seg.clone();
        diag.tunneling_on = vec![false; 3];
        let mut tun = PulseSegment::idle(3, 0.6);
        tun.tunneling_on = seg.tunneling_on.clone();
        let m = 4000;
        diag.duration /= m as f64;
        tun.duration /= m as f64;
        let a = segment_unitary(&diag, &p, 3).unwrap();
        let b = segment_unitary(&tun, &p, 3).unwrap();
        let half = b.mul(&a).unwrap();
        let mut acc = UnitaryMatrix::identity(8);
        for _ in 0..m {
            acc = half.mul(&acc).unwrap();
        }
        assert!(acc.max_abs_diff(&u).unwrap() < 1e-3);
    }

    #[test]
    fn empty_schedule_is_identity() {
        let u = evolve(&Schedule::new(2), &DeviceParams::default()).unwrap();
        assert_eq!(u, UnitaryMatrix::identity(4));
    }

    #[test]
    fn blocked_even_refocusing_cancels() {
        let p = params(0.0, 3.0, 0.2);
        let mut sched = Schedule::new(1);
        for s in [1.0, -1.0] {
            let mut seg = PulseSegment::idle(1, p.tau);
            seg.bias[0] = s * p.delta_e;
            sched.push(seg).unwrap();
        }
        let u = evolve(&sched, &p).unwrap();
        assert!(u.max_abs_diff(&UnitaryMatrix::identity(2)).unwrap() < 1e-12);
    }

    #[test]
    fn odd_refocusing_leaves_worst_case_rotation() {
        let p = params(0.0, 3.0, 0.2);
        for segments in [1usize, 3, 5, 7] {
            let sched =
                refocusing_schedule(&[q(1)], 1, segments as f64 * p.tau, &p, 1.0).unwrap();
            assert_eq!(sched.len(), segments);
            let u = evolve(&sched, &p).unwrap();
            let want = z_matrix(magnus_worst_case(&p));
            assert!(u.max_abs_diff(&want).unwrap() < 1e-12);
            assert!(phase_distance(&u, &want).unwrap() < 1e-12);
        }
    }

    #[test]
    fn refocusing_pattern_and_truncation() {
        let p = params(1.0, 10.0, 0.25);
        let s = refocusing_schedule(&[q(1)], 1, 4.0 * p.tau, &p, 1.0).unwrap();
        let biases: Vec<f64> = s.segments.iter().map(|g| g.bias[0]).collect();
        assert_eq!(biases, vec![10.0, -10.0, 10.0, -10.0]);
        assert!(s.segments.iter().all(|g| (g.duration - 0.25).abs() < 1e-15));
        assert!(s.segments.iter().all(|g| g.tunneling_on[0]));

        let s = refocusing_schedule(&[q(1)], 1, 3.5 * p.tau, &p, 1.0).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.segments[3].duration - 0.5 * p.tau).abs() < 1e-15);
        assert!((s.total_duration() - 3.5 * p.tau).abs() < 1e-15);

        let s = refocusing_schedule(&[q(2)], 2, 2.0 * p.tau, &p, -1.0).unwrap();
        assert_eq!(s.segments[0].bias, vec![0.0, -10.0]);
        assert!(refocusing_schedule(&[q(1)], 1, 1.0, &params(1.0, 1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn short_refocused_idle_matches_closed_form_oracle() {
        // Frozen from an independent closed-form SU(2) product:
        // four segments exp(−i(Δσx ± δE/2 σz)τ) with Δ=1, δE=10, τ=0.01.
        let p = params(1.0, 10.0, 0.01);
        let s = refocusing_schedule(&[q(1)], 1, 4.0 * p.tau, &p, 1.0).unwrap();
        let d = phase_distance(&evolve(&s, &p).unwrap(), &UnitaryMatrix::identity(2)).unwrap();
        assert!((d - 0.039_972_682_261_789_46).abs() < 1e-12, "{d}");
    }

    #[test]
    fn magnus_worst_case_values() {
        assert!((magnus_worst_case(&params(1.0, 1.0, 0.1)) - 0.1).abs() < 1e-15);
        let zero = DeviceParams { delta_e: 0.0, ..Default::default() };
        assert_eq!(magnus_worst_case(&zero), 0.0);
    }

    #[test]
    fn unrefocused_idle_is_x_rotation() {
        let p = params(1.3, 10.0, 0.01);
        for t in [0.1, 0.7, 2.9] {
            let mut s = Schedule::new(2);
            let mut seg = PulseSegment::idle(2, t);
            seg.tunneling_on = vec![true, true];
            s.push(seg).unwrap();
            let x = x_matrix(2.0 * p.delta * t);
            let want = x.kron(&x);
            assert!(evolve(&s, &p).unwrap().max_abs_diff(&want).unwrap() < 1e-10);
        }
    }

    #[test]
    fn resonant_refocusing_freezes_tunneling() {
        for delta_e in [10.0, 30.0, 100.0] {
            let tau = resonant_tau(delta_e, 1.0, 1);
            let p = params(1.0, delta_e, tau);
            let total = 2.0 * tau * (0.785 / (2.0 * tau)).ceil();
            let pts = freezing_sweep(&p, total, &[tau]).unwrap();
            assert!(pts[0].refocused < 1e-3, "{pts:?}");
            assert!(pts[0].refocused * 100.0 < pts[0].unrefocused);
        }
    }

    #[test]
    fn z_bias_commutes_with_refocusing() {
        let p = params(0.0, 7.0, 0.05);
        let total = 8.0 * p.tau;
        let phi = 1.1;
        let base = refocusing_schedule(&[q(1), q(2)], 2, total, &p, 1.0).unwrap();
        let mut driven = base.clone();
        for seg in &mut driven.segments {
            seg.bias[0] += phi * p.hbar / total;
        }
        let lhs = evolve(&driven, &p).unwrap();
        let rhs = embed(&z_matrix(phi), &[q(1)], 2)
            .unwrap()
            .mul(&evolve(&base, &p).unwrap())
            .unwrap();
        assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn evolve_state_matches_propagator() {
        let p = params(1.0, 4.0, 0.1);
        let mut s = refocusing_schedule(&[q(1), q(3)], 3, 0.75, &p, 1.0).unwrap();
        s.segments[2].coupling = vec![0.4, 0.9];
        let psi = StateVector::from_bits("101").unwrap();
        let a = evolve_state(&s, &p, &psi).unwrap();
        let b = crate::qstate::apply(&evolve(&s, &p).unwrap(), &psi).unwrap();
        assert!(a.phase_distance(&b).unwrap() < 1e-12);
        assert!((a.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn schedule_validation() {
        let mut s = Schedule::new(2);
        assert!(s.push(PulseSegment::idle(3, 1.0)).is_err());
        assert!(s.push(PulseSegment::idle(2, 0.0)).is_err());
        let mut bad = PulseSegment::idle(2, 1.0);
        bad.coupling = vec![];
        assert!(s.push(bad).is_err());
        s.push(PulseSegment::idle(2, 1.0)).unwrap();
        let json = s.to_json().unwrap();
        assert_eq!(Schedule::from_json(&json).unwrap(), s);
    }

    #[test]
    fn csv_export_layout() {
        let p = params(1.0, 2.0, 0.5);
        let s = refocusing_schedule(&[q(1)], 2, 1.0, &p, 1.0).unwrap();
        let csv = s.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "t_start,t_end,bias_1,bias_2,tunneling_1,tunneling_2,coupling_1"
        );
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("5e-1,1e0,-2e0,0e0,1,1,0e0"));
    }
}
