use serde::{Deserialize, Serialize};

use super::NativeProgram;
use crate::constants::TOL;
use crate::error::{Error, Result};
use crate::native_gates::{gate_duration, normalize_angle, DeviceParams, NativeGate, ParamWarning};
use crate::pulse_engine::{PulseSegment, Schedule};

/// Where the Δσx term is switched on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TunnelingMode {
    /// Tunneling is always on; only the refocusing drive keeps idle qubits still.
    #[default]
    Physical,
    /// Tunneling is blocked except on a qubit while it performs an X gate.
    /// This is the Δ = 0 idealization of idle qubits.
    Blocked,
}

/// How a Z gate combines with the qubit's own refocusing drive.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZDriveMode {
    /// Constant extra bias on top of the square wave.
    #[default]
    Additive,
    /// The square wave is replaced by the constant Z bias for the slice.
    Replace,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleOptions {
    #[serde(default)]
    pub tunneling: TunnelingMode,
    #[serde(default)]
    pub z_mode: ZDriveMode,
    /// Stretch gates shorter than one refocusing period to a full period
    /// instead of rejecting them.
    #[serde(default)]
    pub allow_padding: bool,
}

/// Piecewise-constant control channel over one slice: `(end_time, value)`
/// pairs with ascending end times, starting at 0.
type Channel = Vec<(f64, f64)>;

fn value_at(ch: &Channel, t: f64) -> f64 {
    ch.iter().find(|&&(end, _)| t < end).or(ch.last()).map_or(0.0, |&(_, v)| v)
}

/// Square wave `±amp + offset` flipping every `half`, starting positive.
fn square_wave(start: f64, end: f64, half: f64, amp: f64, offset: f64) -> Channel {
    let span = end - start;
    let count = ((span / half) - TOL.time_grid).ceil().max(1.0) as usize;
    (0..count)
        .map(|k| {
            let t = if k + 1 == count { end } else { start + (k + 1) as f64 * half };
            let s = if k % 2 == 0 { 1.0 } else { -1.0 };
            (t, s * amp + offset)
        })
        .collect()
}

fn constant(end: f64, v: f64) -> Channel {
    vec![(end, v)]
}

/// Builds the physical control schedule of a lowered program.
///
/// Every slice lasts a whole number of refocusing periods `2τ`. Idle qubits
/// carry the square-wave drive `±δE` throughout. A Z gate adds the constant
/// bias `φħ/T` over the slice length `T`. An X gate drops the bias to zero
/// with tunneling on for `θħ/2Δ`, then refocuses for the rest of the slice
/// with an even number of equal segments whose bias area per segment is
/// `δE·τ`. A CP gate switches the link coupling to `E_J` for `γħ/E_J` while
/// both qubits keep refocusing.
pub fn schedule_program(
    prog: &NativeProgram,
    p: &DeviceParams,
    opts: &ScheduleOptions,
) -> Result<Schedule> {
    p.validate()?;
    let n = prog.n_qubits;
    let period = p.refocusing_period();
    let eps = TOL.time_grid * p.tau;
    let e_j = p.josephson_energy();
    let physical = opts.tunneling == TunnelingMode::Physical;

    if prog.gates.iter().any(|g| matches!(g, NativeGate::Cphase { .. })) {
        for w in p.warnings() {
            if matches!(w, ParamWarning::StrongCoupling { .. }) {
                log::warn!("{w}");
            }
        }
    }

    let mut sched = Schedule::new(n);
    for slice in &prog.slices {
        let mut timed = Vec::with_capacity(slice.gates.len());
        for &i in &slice.gates {
            let g = prog.gates[i];
            let d = gate_duration(&g, p)?;
            if d <= 0.0 {
                continue;
            }
            if d < period - eps && !opts.allow_padding {
                return Err(Error::GateTooShort {
                    gate: g.to_string(),
                    duration: d,
                    period,
                    suggested_tau: d / 2.0,
                });
            }
            timed.push((g, d));
        }
        let Some(longest) = timed.iter().map(|&(_, d)| d).reduce(f64::max) else {
            continue;
        };
        let periods = (longest / period - TOL.time_grid).ceil().max(1.0);
        let total = periods * period;

        let mut bias: Vec<Channel> = (0..n)
            .map(|_| square_wave(0.0, total, p.tau, p.delta_e, 0.0))
            .collect();
        let idle_on = if physical { 1.0 } else { 0.0 };
        let mut tunneling: Vec<Channel> = (0..n).map(|_| constant(total, idle_on)).collect();
        let mut coupling: Vec<Channel> = (1..n).map(|_| constant(total, 0.0)).collect();

        for (g, d) in timed {
            match g {
                NativeGate::Xrot { qubit, .. } => {
                    let q = qubit.get() - 1;
                    let mut ch = vec![(d, 0.0)];
                    let pad = total - d;
                    if pad > eps {
                        let k = 2.0 * (pad / period - TOL.time_grid).ceil().max(1.0);
                        let seg = pad / k;
                        ch.extend(square_wave(d, total, seg, p.delta_e * p.tau / seg, 0.0));
                    }
                    bias[q] = ch;
                    tunneling[q] = vec![(d, 1.0), (total, idle_on)];
                }
                NativeGate::Zrot { phi, qubit } => {
                    let q = qubit.get() - 1;
                    let extra = normalize_angle(phi) * p.hbar / total;
                    bias[q] = match opts.z_mode {
                        ZDriveMode::Additive => square_wave(0.0, total, p.tau, p.delta_e, extra),
                        ZDriveMode::Replace => constant(total, extra),
                    };
                }
                NativeGate::Cphase { qubit, .. } => {
                    coupling[qubit.get() - 1] = vec![(d, e_j), (total, 0.0)];
                }
            }
        }

        let mut cuts: Vec<f64> = bias
            .iter()
            .chain(&tunneling)
            .chain(&coupling)
            .flat_map(|ch| ch.iter().map(|&(t, _)| t))
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut start = 0.0;
        for t in cuts {
            if t - start <= eps {
                continue;
            }
            let end = if total - t <= eps { total } else { t };
            let mid = 0.5 * (start + end);
            sched.push(PulseSegment {
                duration: end - start,
                bias: bias.iter().map(|ch| value_at(ch, mid)).collect(),
                tunneling_on: tunneling.iter().map(|ch| value_at(ch, mid) != 0.0).collect(),
                coupling: coupling.iter().map(|ch| value_at(ch, mid)).collect(),
            })?;
            start = end;
        }
    }
    Ok(sched)
}
