//! Library side of the `dxdq` command: argument parsing, configuration
//! resolution and the artifact-writing `run` entry point.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use dxdq::compiler::{
    lower, route, schedule_program, text, verify, CircuitIR, LinearTopology, ScheduleOptions,
    TunnelingMode, VerifyLevel, ZDriveMode,
};
use dxdq::constants::{HBAR_SI, MAX_PULSE_QUBITS};
use dxdq::noise_lab::{
    coherence_experiment, free_half_decay_time, ControlMode, ExperimentConfig, NoiseModel,
};
use dxdq::pulse_engine::{default_freezing_grid, evolve, freezing_sweep, resonant_tau};
use dxdq::qstate::{apply, phase_distance, StateVector};
use dxdq::DeviceParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Route and lower a circuit to native gates.
    Compile,
    /// Schedule a circuit as pulses and evolve it.
    Simulate,
    /// Compare ideal, native and pulse-level operators.
    Verify,
    /// Idle infidelity against the refocusing half-period.
    RefocusSweep,
    /// Dephasing curves with and without control.
    NoiseSweep,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    /// ħ = 1, energies in units of the tunneling element.
    #[default]
    Natural,
    /// Joules and seconds with device presets.
    Si,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LevelArg {
    Ideal,
    Native,
    Pulse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ZModeArg {
    Additive,
    Replace,
}

#[derive(Debug, Parser)]
#[command(name = "dxdq", version, about = "Compiler and pulse simulator for d-wave Josephson junction qubits")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Circuit text file.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    /// Register size; must cover every qubit the circuit uses.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long = "delta-e")]
    pub delta_e: Option<f64>,
    /// Bias used for deliberate Z gates.
    #[arg(long = "delta-e-z")]
    pub delta_e_z: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub ej0: Option<f64>,
    #[arg(long)]
    pub phi0: Option<f64>,
    /// Set tau to the first resonant half-period 2πħ/δE.
    #[arg(long, conflicts_with = "tau")]
    pub resonant: bool,
    #[arg(long = "tau-c")]
    pub tau_c: Option<f64>,
    #[arg(long = "sigma-eps")]
    pub sigma_eps: Option<f64>,
    #[arg(long, default_value_t = 2000)]
    pub traj: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// End of the noise sweep; defaults to three free half-decay times.
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long, value_enum, default_value_t = Units::Natural)]
    pub units: Units,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = LevelArg::Native)]
    pub level: LevelArg,
    /// Keep tunneling off on idle qubits.
    #[arg(long)]
    pub blocked: bool,
    /// Stretch gates shorter than a refocusing period instead of failing.
    #[arg(long = "allow-padding")]
    pub allow_padding: bool,
    #[arg(long = "z-mode", value_enum, default_value_t = ZModeArg::Additive)]
    pub z_mode: ZModeArg,
    /// Initial basis state such as `010`; simulate then reports a state
    /// instead of the full unitary.
    #[arg(long)]
    pub init: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NoiseSettings {
    pub tau_c: f64,
    pub sigma_eps: f64,
    pub n_traj: usize,
    pub t_max: Option<f64>,
}

/// Fully resolved configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub circuit_path: Option<PathBuf>,
    pub n: Option<usize>,
    pub params: DeviceParams,
    pub units: Units,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub noise: NoiseSettings,
    pub schedule: ScheduleOptions,
    pub level: VerifyLevel,
    pub init: Option<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] dxdq::Error),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{0}")]
    Config(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io { .. } => "io",
            CliError::Config(_) => "config",
        }
    }

    /// Machine-readable form written to stderr.
    pub fn to_json(&self) -> String {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "version": dxdq::VERSION,
        });
        if let CliError::Core(dxdq::Error::Parse { line, column, .. }) = self {
            v["line"] = json!(line);
            v["column"] = json!(column);
        }
        v.to_string()
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

/// Energies above this are certainly not in joules.
const SI_ENERGY_CEILING: f64 = 1e-15;

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let needs_circuit = matches!(
            cli.command,
            Command::Compile | Command::Simulate | Command::Verify
        );
        match (&cli.circuit, needs_circuit) {
            (None, true) => {
                return Err(CliError::Config(format!(
                    "{} needs --circuit",
                    command_name(cli.command)
                )))
            }
            (Some(_), false) => {
                return Err(CliError::Config(format!(
                    "--circuit is not used by {}",
                    command_name(cli.command)
                )))
            }
            (Some(path), true) if !path.is_file() => {
                return Err(CliError::Io {
                    path: path.clone(),
                    message: "circuit file not found".into(),
                })
            }
            _ => {}
        }
        if cli.init.is_some() && cli.command != Command::Simulate {
            return Err(CliError::Config("--init only applies to simulate".into()));
        }

        let mut p = match cli.units {
            Units::Natural => DeviceParams::default(),
            Units::Si => DeviceParams::si(),
        };
        let energies = [
            ("--delta", cli.delta),
            ("--delta-e", cli.delta_e),
            ("--delta-e-z", cli.delta_e_z),
            ("--ej0", cli.ej0),
        ];
        for (flag, v) in energies {
            if let Some(v) = v {
                let si_like = v.abs() < SI_ENERGY_CEILING;
                let bad = match cli.units {
                    Units::Si => v != 0.0 && !si_like,
                    Units::Natural => v != 0.0 && si_like,
                };
                if bad {
                    return Err(CliError::Config(format!(
                        "{flag} = {v:e} does not look like {} units",
                        match cli.units {
                            Units::Si => "SI (joules)",
                            Units::Natural => "natural",
                        }
                    )));
                }
            }
        }
        if let Some(v) = cli.delta {
            p.delta = v;
        }
        if let Some(v) = cli.delta_e {
            p.delta_e = v;
        }
        if let Some(v) = cli.ej0 {
            p.e_j0 = v;
        }
        if let Some(v) = cli.phi0 {
            p.phi0 = v;
        }
        if let Some(v) = cli.tau {
            p.tau = v;
        }
        if cli.delta_e_z.is_some() {
            p.delta_e_z = cli.delta_e_z;
        }
        if cli.resonant {
            p.tau = resonant_tau(p.delta_e, p.hbar, 1);
        }
        p.validate()?;

        let tau_c = cli.tau_c.unwrap_or(match cli.units {
            Units::Natural => 1.0,
            Units::Si => 1e-13,
        });
        let sigma_eps = cli.sigma_eps.unwrap_or(0.5 * p.hbar / tau_c);
        if cli.units == Units::Si && p.hbar != HBAR_SI {
            return Err(CliError::Config("SI units require hbar in J s".into()));
        }

        Ok(RunConfig {
            command: cli.command,
            circuit_path: cli.circuit.clone(),
            n: cli.n,
            params: p,
            units: cli.units,
            seed: cli.seed,
            output_dir: cli.out.clone(),
            noise: NoiseSettings {
                tau_c,
                sigma_eps,
                n_traj: cli.traj,
                t_max: cli.t_max,
            },
            schedule: ScheduleOptions {
                tunneling: if cli.blocked {
                    TunnelingMode::Blocked
                } else {
                    TunnelingMode::Physical
                },
                z_mode: match cli.z_mode {
                    ZModeArg::Additive => ZDriveMode::Additive,
                    ZModeArg::Replace => ZDriveMode::Replace,
                },
                allow_padding: cli.allow_padding,
            },
            level: match cli.level {
                LevelArg::Ideal => VerifyLevel::Ideal,
                LevelArg::Native => VerifyLevel::Native,
                LevelArg::Pulse => VerifyLevel::Pulse,
            },
            init: cli.init.clone(),
        })
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Compile => "compile",
        Command::Simulate => "simulate",
        Command::Verify => "verify",
        Command::RefocusSweep => "refocus-sweep",
        Command::NoiseSweep => "noise-sweep",
    }
}

/// Reads and parses a circuit file. `n` widens the register; it may not
/// contradict a size declared in the file or drop qubits the file uses.
pub fn parse_circuit(path: &Path, n: Option<usize>) -> Result<CircuitIR, CliError> {
    let src = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let ir = text::parse(&src)?;
    let Some(n) = n else {
        return Ok(ir);
    };
    let declared = src
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .and_then(|l| {
            let mut it = l.split_whitespace();
            match (it.next(), it.next()) {
                (Some(k), Some(v)) if k.eq_ignore_ascii_case("n") => v.parse::<usize>().ok(),
                _ => None,
            }
        });
    if let Some(d) = declared {
        if d != n {
            return Err(CliError::Config(format!(
                "--n {n} conflicts with `n {d}` in {}",
                path.display()
            )));
        }
        return Ok(ir);
    }
    let used = ir.ops.iter().flat_map(|op| op.support()).map(|q| q.get()).max().unwrap_or(0);
    if n < used {
        return Err(CliError::Config(format!("--n {n} is smaller than qubit {used} used by the circuit")));
    }
    let mut wide = CircuitIR::new(n)?;
    for op in ir.ops {
        wide.push(op)?;
    }
    Ok(wide)
}

/// Human-readable outcome of a run.
#[derive(Debug, Default)]
pub struct Summary {
    pub lines: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        for a in &self.artifacts {
            writeln!(f, "wrote {}", a.display())?;
        }
        Ok(())
    }
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    summary: Summary,
}

impl Writer<'_> {
    fn file(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.cfg.output_dir.join(name);
        fs::write(&path, contents).map_err(|e| io_err(&path, e))?;
        self.summary.artifacts.push(path);
        Ok(())
    }

    /// Writes `payload` with the resolved parameters and tool version added.
    fn json(&mut self, name: &str, mut payload: Value) -> Result<(), CliError> {
        let cfg = self.cfg;
        payload["version"] = json!(dxdq::VERSION);
        payload["units"] = json!(cfg.units);
        payload["params"] = serde_json::to_value(cfg.params).map_err(dxdq::Error::from)?;
        payload["warnings"] = cfg
            .params
            .warnings()
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .into();
        let mut text = serde_json::to_string_pretty(&payload).map_err(dxdq::Error::from)?;
        text.push('\n');
        self.file(name, &text)
    }

    fn say(&mut self, line: impl Into<String>) {
        self.summary.lines.push(line.into());
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v).map_err(dxdq::Error::from)?)
}

/// Executes one command and writes its artifacts into `cfg.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<Summary, CliError> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| io_err(&cfg.output_dir, e))?;
    let mut w = Writer {
        cfg,
        summary: Summary::default(),
    };
    for warning in cfg.params.warnings() {
        w.say(format!("warning: {warning}"));
    }
    match cfg.command {
        Command::Compile => compile(&mut w)?,
        Command::Simulate => simulate(&mut w)?,
        Command::Verify => verify_cmd(&mut w)?,
        Command::RefocusSweep => refocus_sweep(&mut w)?,
        Command::NoiseSweep => noise_sweep(&mut w)?,
    }
    Ok(w.summary)
}

fn circuit(cfg: &RunConfig) -> Result<CircuitIR, CliError> {
    let path = cfg
        .circuit_path
        .as_deref()
        .ok_or_else(|| CliError::Config("missing --circuit".into()))?;
    parse_circuit(path, cfg.n)
}

fn compile(w: &mut Writer) -> Result<(), CliError> {
    let ir = circuit(w.cfg)?;
    let prog = lower(&route(&ir, &LinearTopology::new(ir.n_qubits))?)?;
    let counts = prog.gate_counts();
    w.json(
        "program.json",
        json!({
            "n_qubits": ir.n_qubits,
            "program": to_value(&prog)?,
            "gate_counts": to_value(&counts)?,
        }),
    )?;
    w.say(format!(
        "{} qubits: {} native gates (X {}, Z {}, CP {}) in {} slices",
        ir.n_qubits, counts.total, counts.x, counts.z, counts.cp, counts.slices
    ));
    Ok(())
}

fn simulate(w: &mut Writer) -> Result<(), CliError> {
    let cfg = w.cfg;
    let ir = circuit(cfg)?;
    let n = ir.n_qubits;
    if n > MAX_PULSE_QUBITS {
        return Err(dxdq::Error::TooManyQubits {
            n,
            max: MAX_PULSE_QUBITS,
        }
        .into());
    }
    let prog = lower(&route(&ir, &LinearTopology::new(n))?)?;
    let sched = schedule_program(&prog, &cfg.params, &cfg.schedule)?;
    let u = evolve(&sched, &cfg.params)?;
    let ideal = ir.ideal_unitary()?;
    let distance = phase_distance(&u, &ideal)?;

    let mut payload = json!({
        "n_qubits": n,
        "options": to_value(&cfg.schedule)?,
        "segments": sched.len(),
        "duration": sched.total_duration(),
        "distance_to_ideal": distance,
    });
    match &cfg.init {
        Some(bits) => {
            if bits.len() != n {
                return Err(CliError::Config(format!(
                    "--init {bits} has {} bits for a {n}-qubit register",
                    bits.len()
                )));
            }
            let psi = StateVector::from_bits(bits)?;
            let out = apply(&u, &psi)?;
            let want = apply(&ideal, &psi)?;
            payload["initial"] = json!(bits);
            payload["state"] = to_value(&out)?;
            payload["state_fidelity"] = json!(out.fidelity(&want)?);
        }
        None => payload["unitary"] = to_value(&u)?,
    }
    w.json("result.json", payload)?;
    w.json("schedule.json", to_value(&sched)?)?;
    w.file("schedule.csv", &sched.to_csv())?;
    w.say(format!(
        "{} segments over {:e}; distance to ideal {distance:.3e}",
        sched.len(),
        sched.total_duration()
    ));
    Ok(())
}

fn verify_cmd(w: &mut Writer) -> Result<(), CliError> {
    let cfg = w.cfg;
    let ir = circuit(cfg)?;
    let report = verify(&ir, &cfg.params, cfg.level, &cfg.schedule)?;
    w.json("verify.json", to_value(&report)?)?;
    let mut line = format!("{} qubits, {} ops", report.n_qubits, report.ops);
    for (label, c) in [
        ("ideal/native", report.ideal_vs_native),
        ("ideal/pulse", report.ideal_vs_pulse),
        ("native/pulse", report.native_vs_pulse),
    ] {
        if let Some(c) = c {
            line.push_str(&format!("; {label} distance {:.3e} fidelity {:.12}", c.distance, c.fidelity));
        }
    }
    w.say(line);
    Ok(())
}

fn refocus_sweep(w: &mut Writer) -> Result<(), CliError> {
    let p = w.cfg.params;
    let (total, mut taus) = default_freezing_grid(&p);
    taus.sort_by(f64::total_cmp);
    let pts = freezing_sweep(&p, total, &taus)?;
    let mut csv = String::from("tau,bias_area,infidelity,unrefocused_infidelity\n");
    for pt in &pts {
        csv.push_str(&format!(
            "{:e},{:e},{:e},{:e}\n",
            pt.tau, pt.bias_area, pt.refocused, pt.unrefocused
        ));
        w.say(format!("tau {:.4e}: infidelity {:.5e}", pt.tau, pt.refocused));
    }
    w.file("refocus_sweep.csv", &csv)?;
    if let Some(pt) = pts.first() {
        w.say(format!("without refocusing: {:.5e}", pt.unrefocused));
    }
    Ok(())
}

fn noise_sweep(w: &mut Writer) -> Result<(), CliError> {
    let cfg = w.cfg;
    let p = cfg.params;
    let s = cfg.noise;
    let model = NoiseModel::ou(s.sigma_eps, s.tau_c, cfg.seed);
    model.validate()?;
    let t_star = free_half_decay_time(s.sigma_eps, s.tau_c, p.hbar)?;
    let t_max = s.t_max.unwrap_or(3.0 * t_star);
    let mut at_t_star = Vec::new();
    for mode in ControlMode::ALL {
        let ex = ExperimentConfig::new(model, mode, p.tau, t_max, s.n_traj);
        let curve = coherence_experiment(&ex, &p)?;
        let (c, se) = curve.at(t_star);
        at_t_star.push(json!({ "mode": mode.name(), "coherence": c, "stderr": se }));
        w.file(&format!("coherence_{}.csv", mode.name()), &curve.to_csv())?;
        w.say(format!("{:>16}: coherence at t* {c:.4} ± {se:.4}", mode.name()));
    }
    w.json(
        "noise_config.json",
        json!({
            "model": to_value(&model)?,
            "control_spacing": p.tau,
            "t_max": t_max,
            "t_star": t_star,
            "n_traj": s.n_traj,
            "seed": cfg.seed,
            "at_t_star": at_t_star,
        }),
    )?;
    Ok(())
}
