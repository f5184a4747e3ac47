use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use transtab::netred::{build_t2, expand_real_blocks, Fixed4};
use transtab::sim::{InternalAdmittance, SimulationFailure, SystemModel};
use transtab::{simulate, stability_summary, Error, InitialCondition, ModelKind, Scenario, StageNetwork, Trajectory};

use crate::error::CliError;
use crate::scenario::ScenarioFile;

/// A parsed and validated scenario file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: PathBuf,
    pub file: ScenarioFile,
    pub scenario: Scenario,
}

impl Loaded {
    fn invalid(&self, e: impl ToString) -> CliError {
        CliError::Validation {
            path: self.path.display().to_string(),
            message: e.to_string(),
        }
    }

    /// `--out` wins, then `output.path` (relative to the scenario file), then
    /// the scenario path with a `.csv` extension.
    pub fn output_path(&self, out: Option<&Path>) -> PathBuf {
        if let Some(p) = out {
            return p.to_path_buf();
        }
        match &self.file.output.path {
            Some(p) => self.path.parent().unwrap_or(Path::new("")).join(p),
            None => self.path.with_extension("csv"),
        }
    }
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let file = ScenarioFile::load(path)?;
    let scenario = file.to_scenario().map_err(|message| CliError::Validation {
        path: path.display().to_string(),
        message,
    })?;
    Ok(Loaded {
        path: path.to_path_buf(),
        file,
        scenario,
    })
}

fn stage_list(s: &Scenario) -> String {
    s.stages
        .iter()
        .map(|st| format!("{}@{}", st.label, st.t_start))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn check(l: &Loaded) -> String {
    let s = &l.scenario;
    let initial = match s.initial {
        InitialCondition::State(_) => "explicit state",
        InitialCondition::OperatingPoint(_) => "operating point",
    };
    format!(
        "ok: {} model, {} generators, initial {initial}, stages {}, {} steps of {} s\n",
        s.machines.kind().name(),
        s.machines.m(),
        stage_list(s),
        s.step_count(),
        s.step
    )
}

pub fn reduce(l: &Loaded) -> Result<String, CliError> {
    let s = &l.scenario;
    let (machines, state) = s.resolve().map_err(|e| l.invalid(e))?;
    let deltas = state.deltas();
    let mut out = String::new();
    let _ = writeln!(out, "model: {}", machines.kind().name());
    let angles: Vec<String> = deltas.iter().map(|d| format!("{d:.4}")).collect();
    let _ = writeln!(out, "initial angles (rad): {}", angles.join(" "));
    let _ = write!(out, "\nT_2\n{}", Fixed4(&build_t2(&machines.impedances())));
    for stage in &s.stages {
        let _ = writeln!(out, "\nstage {} at t = {} s", stage.label, stage.t_start);
        if let StageNetwork::Terminal(y_t) = &stage.network {
            let _ = write!(out, "Y_t\n{}", Fixed4(y_t));
            let _ = write!(out, "Y_r\n{}", Fixed4(&expand_real_blocks(y_t)));
        }
        let admittance = InternalAdmittance::for_stage(&stage.network, &machines).map_err(|e| l.invalid(e))?;
        let y = admittance.evaluate(&deltas).map_err(|e| l.invalid(e))?;
        let note = if admittance.is_constant() {
            "constant"
        } else {
            "at initial angles"
        };
        let _ = write!(out, "Y ({note})\n{}", Fixed4(y.as_ref()));
    }
    Ok(out)
}

pub fn init(l: &Loaded) -> Result<String, CliError> {
    let s = &l.scenario;
    let (machines, state) = s.resolve().map_err(|e| l.invalid(e))?;
    let mut out = String::new();
    let source = match s.initial {
        InitialCondition::State(_) => "explicit state",
        InitialCondition::OperatingPoint(_) => "operating point",
    };
    let _ = writeln!(out, "model: {}", machines.kind().name());
    let _ = writeln!(out, "source: {source}");
    for i in 0..machines.m() {
        let _ = write!(
            out,
            "generator {}: delta0 = {:.6} rad, omega0 = {:.6}",
            i + 1,
            state.delta(i),
            state.omega(i)
        );
        match &machines {
            transtab::Machines::Classical(p) => {
                let _ = writeln!(out, ", e'_q = {:.6}, P_m = {:.6}", p[i].e_q_prime, p[i].p_m);
            }
            transtab::Machines::FourthOrder(p) => {
                let _ = writeln!(
                    out,
                    ", e'_q0 = {:.6}, e'_d0 = {:.6}, E_fq = {:.6}, P_m = {:.6}",
                    state.e_q_prime(i).unwrap_or_default(),
                    state.e_d_prime(i).unwrap_or_default(),
                    p[i].e_fq,
                    p[i].p_m
                );
            }
        }
    }
    let pre = &s.stages[0];
    let admittance = InternalAdmittance::for_stage(&pre.network, &machines).map_err(|e| l.invalid(e))?;
    let model = SystemModel {
        machines: &machines,
        admittance: &admittance,
        omega_s: s.omega_s,
    };
    let rates = model.derivatives(&state).map_err(|e| l.invalid(e))?;
    let residual = rates.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let _ = writeln!(out, "max |dx/dt| on the {} network: {residual:.3e}", pre.label);
    Ok(out)
}

fn fixed(v: f64, precision: usize) -> String {
    let s = format!("{v:.precision$}");
    // Avoid "-0.000" for values that round to zero.
    match s.strip_prefix('-') {
        Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.to_string(),
        _ => s,
    }
}

/// CSV text of a trajectory: `#` metadata lines, a header, one row per sample.
pub fn trajectory_csv(scenario: &Scenario, traj: &Trajectory, precision: usize, status: &str) -> String {
    let m = traj.meta.m;
    let fourth = traj.meta.kind == ModelKind::FourthOrder;
    let mut out = String::new();
    let _ = writeln!(out, "# transtab trajectory");
    let _ = writeln!(out, "# model: {}", traj.meta.kind.name());
    let _ = writeln!(out, "# generators: {m}");
    let _ = writeln!(out, "# step_s: {}", traj.meta.step);
    let _ = writeln!(out, "# stages: {}", stage_list(scenario));
    let _ = writeln!(out, "# fingerprint: {}", traj.meta.fingerprint);
    let _ = writeln!(out, "# samples: {}", traj.len());
    let _ = writeln!(out, "# status: {status}");
    let mut header = vec!["t".to_string()];
    for i in 1..=m {
        header.push(format!("delta_{i}"));
        header.push(format!("omega_{i}"));
        if fourth {
            header.push(format!("eqp_{i}"));
            header.push(format!("edp_{i}"));
        }
        header.push(format!("pe_{i}"));
    }
    let _ = writeln!(out, "{}", header.join(","));
    for ((t, state), pe) in traj.times.iter().zip(&traj.states).zip(&traj.p_e) {
        let mut row = vec![fixed(*t, precision)];
        for (i, &p) in pe.iter().enumerate() {
            row.push(fixed(state.delta(i), precision));
            row.push(fixed(state.omega(i), precision));
            if fourth {
                row.push(fixed(state.e_q_prime(i).unwrap_or_default(), precision));
                row.push(fixed(state.e_d_prime(i).unwrap_or_default(), precision));
            }
            row.push(fixed(p, precision));
        }
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn run_summary(l: &Loaded, output: &Path, traj: &Trajectory, status: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario: {}", l.path.display());
    let _ = writeln!(out, "output: {}", output.display());
    let _ = writeln!(out, "fingerprint: {}", traj.meta.fingerprint);
    let _ = writeln!(out, "samples: {}", traj.len());
    let _ = writeln!(out, "status: {status}");
    if let Some(report) = stability_summary(traj) {
        let _ = write!(out, "{report}");
    }
    out
}

/// Simulates, writes the trajectory file and returns the summary. On
/// divergence the partial trajectory is still written.
pub fn run(l: &Loaded, out: Option<&Path>) -> Result<String, CliError> {
    let output = l.output_path(out);
    let precision = l.file.output.precision;
    let write = |traj: &Trajectory, status: &str| {
        std::fs::write(&output, trajectory_csv(&l.scenario, traj, precision, status))
            .map_err(|e| CliError::io(&output, e))
    };
    match simulate(&l.scenario) {
        Ok(traj) => {
            write(&traj, "completed")?;
            Ok(run_summary(l, &output, &traj, "completed"))
        }
        Err(SimulationFailure { error, partial }) => {
            let numerical = matches!(error, Error::Diverged { .. } | Error::NonFiniteDerivative { .. });
            match partial {
                Some(traj) if numerical || !traj.is_empty() => {
                    let status = format!("diverged: {error}");
                    write(&traj, &status)?;
                    Err(CliError::Divergence {
                        path: l.path.display().to_string(),
                        message: error.to_string(),
                        summary: run_summary(l, &output, &traj, &status),
                    })
                }
                _ => Err(l.invalid(error)),
            }
        }
    }
}

/// Runs several scenario files on up to `jobs` threads. Results come back
/// in input order; each file has its own output.
pub fn run_batch(files: &[PathBuf], out: Option<&Path>, jobs: usize) -> Vec<Result<String, CliError>> {
    if out.is_some() && files.len() > 1 {
        return vec![Err(CliError::Usage("--out needs a single scenario file".into()))];
    }
    if jobs == 0 {
        return vec![Err(CliError::Usage("--jobs must be at least 1".into()))];
    }
    let one = |f: &PathBuf| load(f).and_then(|l| run(&l, out));
    if files.len() == 1 || jobs == 1 {
        return files.iter().map(one).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| files.par_iter().map(one).collect()),
        Err(e) => vec![Err(CliError::Usage(format!("cannot start worker threads: {e}")))],
    }
}
