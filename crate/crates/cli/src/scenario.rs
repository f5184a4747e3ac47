//! Scenario file format (TOML) and its conversion to a simulation input.
//!
//! The file structs mirror the document one-to-one, so parse → serialize →
//! parse is lossless; all checking happens in [`ScenarioFile::to_scenario`].

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use transtab::netred::{build_y_bus, constant_impedance_load, kron_reduce};
use transtab::sim::synchronous_speed;
use transtab::{
    Branch, ClassicalGenParams, ComplexAdmittanceMatrix, DynamicState, FourthOrderGenParams, InitialCondition,
    Machines, ModelKind, NetworkStage, OperatingPoint, RealBlockMatrix, Scenario, Shunt, StageLabel, StageNetwork,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub system: SystemSection,
    pub initial: InitialSection,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<EventSection>,
    pub run: RunSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelName {
    #[serde(rename = "classical")]
    Classical,
    #[serde(rename = "fourth-order")]
    FourthOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub model: ModelName,
    pub generators: Vec<GeneratorRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedSpec>,
}

/// One generator, keyed by the usual parameter-table row names.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorRecord {
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(rename = "R_a", default, skip_serializing_if = "Option::is_none")]
    pub r_a: Option<f64>,
    #[serde(rename = "X_d", default, skip_serializing_if = "Option::is_none")]
    pub x_d: Option<f64>,
    #[serde(rename = "X_q", default, skip_serializing_if = "Option::is_none")]
    pub x_q: Option<f64>,
    #[serde(rename = "X'_d", default, skip_serializing_if = "Option::is_none")]
    pub x_d_prime: Option<f64>,
    #[serde(rename = "X'_q", default, skip_serializing_if = "Option::is_none")]
    pub x_q_prime: Option<f64>,
    #[serde(rename = "T'_d0", default, skip_serializing_if = "Option::is_none")]
    pub t_d0_prime: Option<f64>,
    #[serde(rename = "T'_q0", default, skip_serializing_if = "Option::is_none")]
    pub t_q0_prime: Option<f64>,
    #[serde(rename = "P_m", default, skip_serializing_if = "Option::is_none")]
    pub p_m: Option<f64>,
    #[serde(rename = "e'_q", default, skip_serializing_if = "Option::is_none")]
    pub e_q_prime: Option<f64>,
    #[serde(rename = "E_fq", default, skip_serializing_if = "Option::is_none")]
    pub e_fq: Option<f64>,
}

/// Full bus network, Kron-reduced onto the generator terminal buses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub buses: usize,
    /// Terminal bus of each generator, in generator order (1-based).
    pub generator_buses: Vec<usize>,
    pub branches: Vec<BranchSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub shunts: Vec<ShuntSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub loads: Vec<LoadSpec>,
    /// Buses held at zero voltage (bolted three-phase faults).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub faulted_buses: Vec<usize>,
}

/// Pi-model line: series `r + jx`, total charging susceptance `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSpec {
    pub from: usize,
    pub to: usize,
    #[serde(default)]
    pub r: f64,
    pub x: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShuntSpec {
    pub bus: usize,
    #[serde(default)]
    pub g: f64,
    #[serde(default)]
    pub b: f64,
}

/// Load converted to a constant impedance at the given voltage magnitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSpec {
    pub bus: usize,
    pub p: f64,
    pub q: f64,
    pub v: f64,
}

/// Already-reduced matrix: terminal `y_t` as "a+bi" tokens, or the real
/// internal-bus matrix `y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReducedSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_t: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleUnit {
    #[default]
    #[serde(rename = "rad")]
    Radians,
    #[serde(rename = "deg")]
    Degrees,
}

impl AngleUnit {
    fn to_radians(self, v: f64) -> f64 {
        match self {
            AngleUnit::Radians => v,
            AngleUnit::Degrees => v.to_radians(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub angle_unit: AngleUnit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<f64>>,
    #[serde(rename = "e'_q", default, skip_serializing_if = "Option::is_none")]
    pub e_q_prime: Option<Vec<f64>>,
    #[serde(rename = "e'_d", default, skip_serializing_if = "Option::is_none")]
    pub e_d_prime: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operating_point: Option<Vec<OperatingPointSpec>>,
}

/// Terminal phasors: `v` as "a+bi", or `v_mag` with `v_angle`; `i` as "a+bi".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPointSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_mag: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_angle: Option<f64>,
    pub i: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StageName {
    #[serde(rename = "pre")]
    Pre,
    #[serde(rename = "on")]
    On,
    #[serde(rename = "post")]
    Post,
}

impl From<StageName> for StageLabel {
    fn from(s: StageName) -> Self {
        match s {
            StageName::Pre => StageLabel::Pre,
            StageName::On => StageLabel::On,
            StageName::Post => StageLabel::Post,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSection {
    pub label: StageName,
    pub time: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<NetworkSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<ReducedSpec>,
}

/// Step size as a number or an exact fraction such as "1/600".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSpec {
    Value(f64),
    Fraction(String),
}

impl StepSpec {
    fn value(&self) -> Result<f64, String> {
        match self {
            StepSpec::Value(v) => Ok(*v),
            StepSpec::Fraction(s) => {
                let parse = |t: &str| {
                    t.trim()
                        .parse::<f64>()
                        .map_err(|_| format!("run.step: cannot parse \"{s}\""))
                };
                match s.split_once('/') {
                    Some((n, d)) => Ok(parse(n)? / parse(d)?),
                    None => parse(s),
                }
            }
        }
    }
}

fn default_stride() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub t_end: f64,
    pub step: StepSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequency: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_s: Option<f64>,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_precision() -> usize {
    6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default = "default_precision")]
    pub precision: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            path: None,
            precision: default_precision(),
        }
    }
}

pub const MAX_PRECISION: usize = 17;

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|message| CliError::Parse {
            path: path.display().to_string(),
            message,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario file structs always serialize")
    }

    pub fn kind(&self) -> ModelKind {
        match self.system.model {
            ModelName::Classical => ModelKind::Classical,
            ModelName::FourthOrder => ModelKind::FourthOrder,
        }
    }

    /// Checks every invariant and builds the simulation input.
    pub fn to_scenario(&self) -> Result<Scenario, String> {
        let m = self.system.generators.len();
        if m == 0 {
            return Err("system.generators: at least one generator is required".into());
        }
        let explicit = self.explicit_state()?;
        let machines = self.machines(explicit)?;
        let initial = self.initial_condition(m)?;
        let isotropic = machines.has_constant_internal_admittance();

        let mut stages = vec![NetworkStage {
            label: StageLabel::Pre,
            network: stage_network(
                "system",
                self.system.network.as_ref(),
                self.system.reduced.as_ref(),
                m,
                isotropic,
            )?,
            t_start: 0.0,
        }];
        for (k, ev) in self.events.iter().enumerate() {
            let at = format!("events[{}]", k + 1);
            if !(ev.time.is_finite() && ev.time >= 0.0) {
                return Err(format!("{at}.time: must be finite and non-negative"));
            }
            stages.push(NetworkStage {
                label: ev.label.into(),
                network: stage_network(&at, ev.network.as_ref(), ev.reduced.as_ref(), m, isotropic)?,
                t_start: ev.time,
            });
        }

        let run = &self.run;
        let omega_s = match (run.frequency, run.omega_s) {
            (Some(f), None) => synchronous_speed(f),
            (None, Some(w)) => w,
            _ => return Err("run: give exactly one of frequency or omega_s".into()),
        };
        if self.output.precision > MAX_PRECISION {
            return Err(format!("output.precision: at most {MAX_PRECISION} decimals"));
        }
        let scenario = Scenario {
            machines,
            initial,
            stages,
            t_end: run.t_end,
            step: run.step.value()?,
            omega_s,
            stride: run.stride,
        };
        scenario.validate().map_err(|e| e.to_string())?;
        Ok(scenario)
    }

    fn explicit_state(&self) -> Result<bool, String> {
        let init = &self.initial;
        let state_given =
            init.delta.is_some() || init.omega.is_some() || init.e_q_prime.is_some() || init.e_d_prime.is_some();
        match (state_given, init.operating_point.is_some()) {
            (true, false) => Ok(true),
            (false, true) => Ok(false),
            _ => Err("initial: give exactly one of an explicit state (delta, omega, ...) or operating_point".into()),
        }
    }

    fn machines(&self, explicit: bool) -> Result<Machines, String> {
        let kind = self.kind();
        let mut classical = Vec::new();
        let mut fourth = Vec::new();
        for (k, g) in self.system.generators.iter().enumerate() {
            let n = k + 1;
            let fields = [
                ("H", g.h),
                ("D", g.d),
                ("R_a", g.r_a),
                ("X_d", g.x_d),
                ("X_q", g.x_q),
                ("X'_d", g.x_d_prime),
                ("X'_q", g.x_q_prime),
                ("T'_d0", g.t_d0_prime),
                ("T'_q0", g.t_q0_prime),
                ("P_m", g.p_m),
                ("e'_q", g.e_q_prime),
                ("E_fq", g.e_fq),
            ];
            // Constants fixed by the operating point when one is given.
            let derived: &[&str] = match kind {
                ModelKind::Classical => &["P_m", "e'_q"],
                ModelKind::FourthOrder => &["P_m", "E_fq"],
            };
            let own: &[&str] = match kind {
                ModelKind::Classical => &["H", "D", "R_a", "X'_d", "P_m", "e'_q"],
                ModelKind::FourthOrder => &[
                    "H", "D", "R_a", "X_d", "X_q", "X'_d", "X'_q", "T'_d0", "T'_q0", "P_m", "E_fq",
                ],
            };
            for (name, value) in fields {
                let wanted = own.contains(&name) && (explicit || !derived.contains(&name));
                match (wanted, value.is_some()) {
                    (true, false) => {
                        return Err(format!(
                            "generator {n}: missing field {name} (required for the {} model)",
                            kind.name()
                        ))
                    }
                    (false, true) if own.contains(&name) => {
                        return Err(format!(
                            "generator {n}: field {name} is derived from the operating point; remove it"
                        ))
                    }
                    (false, true) => {
                        return Err(format!(
                            "generator {n}: field {name} is not a {} model parameter",
                            kind.name()
                        ))
                    }
                    _ => {}
                }
            }
            // Placeholders are replaced by the initializer before use.
            match kind {
                ModelKind::Classical => classical.push(ClassicalGenParams {
                    h: g.h.unwrap_or_default(),
                    d: g.d.unwrap_or_default(),
                    r_a: g.r_a.unwrap_or_default(),
                    x_d_prime: g.x_d_prime.unwrap_or_default(),
                    p_m: g.p_m.unwrap_or(0.0),
                    e_q_prime: g.e_q_prime.unwrap_or(1.0),
                }),
                ModelKind::FourthOrder => fourth.push(FourthOrderGenParams {
                    h: g.h.unwrap_or_default(),
                    d: g.d.unwrap_or_default(),
                    r_a: g.r_a.unwrap_or_default(),
                    x_d: g.x_d.unwrap_or_default(),
                    x_q: g.x_q.unwrap_or_default(),
                    x_d_prime: g.x_d_prime.unwrap_or_default(),
                    x_q_prime: g.x_q_prime.unwrap_or_default(),
                    t_d0_prime: g.t_d0_prime.unwrap_or_default(),
                    t_q0_prime: g.t_q0_prime.unwrap_or_default(),
                    p_m: g.p_m.unwrap_or(0.0),
                    e_fq: g.e_fq.unwrap_or(1.0),
                }),
            }
        }
        let machines = match kind {
            ModelKind::Classical => Machines::Classical(classical),
            ModelKind::FourthOrder => Machines::FourthOrder(fourth),
        };
        machines.validate().map_err(|e| e.to_string())?;
        Ok(machines)
    }

    fn initial_condition(&self, m: usize) -> Result<InitialCondition, String> {
        let init = &self.initial;
        let unit = init.angle_unit;
        let list = |name: &str, v: Option<&Vec<f64>>, default_zero: bool| -> Result<Vec<f64>, String> {
            match v {
                Some(v) if v.len() == m => Ok(v.clone()),
                Some(v) => Err(format!(
                    "initial.{name}: {} values given, system has {m} generators",
                    v.len()
                )),
                None if default_zero => Ok(vec![0.0; m]),
                None => Err(format!("initial.{name}: required")),
            }
        };
        if let Some(ops) = &init.operating_point {
            if ops.len() != m {
                return Err(format!(
                    "initial.operating_point: {} entries given, system has {m} generators",
                    ops.len()
                ));
            }
            let mut out = Vec::with_capacity(m);
            for (k, op) in ops.iter().enumerate() {
                let at = format!("initial.operating_point[{}]", k + 1);
                let i_t = parse_complex(&op.i, &format!("{at}.i"))?;
                let v_t = match (&op.v, op.v_mag, op.v_angle) {
                    (Some(v), None, None) => parse_complex(v, &format!("{at}.v"))?,
                    (None, Some(mag), Some(angle)) => Complex64::from_polar(mag, unit.to_radians(angle)),
                    _ => return Err(format!("{at}: give either v or both v_mag and v_angle")),
                };
                out.push(OperatingPoint::new(v_t, i_t).map_err(|e| format!("{at}: {e}"))?);
            }
            return Ok(InitialCondition::OperatingPoint(out));
        }
        let deltas: Vec<f64> = list("delta", init.delta.as_ref(), false)?
            .into_iter()
            .map(|d| unit.to_radians(d))
            .collect();
        let omegas = list("omega", init.omega.as_ref(), true)?;
        let state = match self.kind() {
            ModelKind::Classical => {
                for (name, v) in [("e'_q", &init.e_q_prime), ("e'_d", &init.e_d_prime)] {
                    if v.is_some() {
                        return Err(format!("initial.{name}: not a classical-model state"));
                    }
                }
                DynamicState::classical(&deltas, &omegas)
            }
            ModelKind::FourthOrder => {
                let eq = list("e'_q", init.e_q_prime.as_ref(), false)?;
                let ed = list("e'_d", init.e_d_prime.as_ref(), false)?;
                DynamicState::fourth_order(&deltas, &omegas, &eq, &ed)
            }
        }
        .map_err(|e| format!("initial: {e}"))?;
        if state.values().iter().any(|v| !v.is_finite()) {
            return Err("initial: state values must be finite".into());
        }
        Ok(InitialCondition::State(state))
    }
}

fn parse_complex(token: &str, at: &str) -> Result<Complex64, String> {
    let cleaned: String = token.chars().filter(|c| !c.is_whitespace()).collect();
    let z: Complex64 = cleaned
        .parse()
        .map_err(|_| format!("{at}: cannot parse \"{token}\" as a complex number (expected a+bi)"))?;
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(format!("{at}: must be finite"));
    }
    Ok(z)
}

/// Formats a complex value so that [`parse_complex`] reads it back exactly.
pub fn format_complex(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", z.re, sign, z.im.abs())
}

fn stage_network(
    at: &str,
    network: Option<&NetworkSpec>,
    reduced: Option<&ReducedSpec>,
    m: usize,
    isotropic: bool,
) -> Result<StageNetwork, String> {
    match (network, reduced) {
        (Some(n), None) => Ok(StageNetwork::Terminal(
            reduce_network(n, m).map_err(|e| format!("{at}.network: {e}"))?,
        )),
        (None, Some(r)) => reduced_network(r, m, isotropic).map_err(|e| format!("{at}.reduced.{e}")),
        _ => Err(format!("{at}: give exactly one of network or reduced")),
    }
}

fn reduced_network(spec: &ReducedSpec, m: usize, isotropic: bool) -> Result<StageNetwork, String> {
    let check_shape = |name: &str, rows: usize, lens: Vec<usize>, n: usize| {
        if rows != n || lens.iter().any(|&l| l != n) {
            Err(format!("{name}: expected a {n}x{n} matrix"))
        } else {
            Ok(())
        }
    };
    match (&spec.y_t, &spec.y) {
        (Some(rows), None) => {
            check_shape("y_t", rows.len(), rows.iter().map(Vec::len).collect(), m)?;
            let mut parsed = Vec::with_capacity(m);
            for (i, row) in rows.iter().enumerate() {
                let row: Result<Vec<_>, _> = row
                    .iter()
                    .enumerate()
                    .map(|(j, tok)| parse_complex(tok, &format!("y_t[{}][{}]", i + 1, j + 1)))
                    .collect();
                parsed.push(row?);
            }
            let y = ComplexAdmittanceMatrix::from_rows(&parsed).map_err(|e| format!("y_t: {e}"))?;
            Ok(StageNetwork::Terminal(y))
        }
        (None, Some(rows)) => {
            if !isotropic {
                return Err("y: an internal-bus matrix is angle dependent unless X'_d = X'_q for every generator; give y_t instead".into());
            }
            check_shape("y", rows.len(), rows.iter().map(Vec::len).collect(), 2 * m)?;
            let y = RealBlockMatrix::from_rows(rows).map_err(|e| format!("y: {e}"))?;
            Ok(StageNetwork::Internal(y))
        }
        _ => Err("y_t: give exactly one of y_t or y".into()),
    }
}

/// Builds the bus matrix, grounds faulted buses, and eliminates every bus
/// except the generator terminals.
pub fn reduce_network(spec: &NetworkSpec, m: usize) -> Result<ComplexAdmittanceMatrix, String> {
    if spec.generator_buses.len() != m {
        return Err(format!(
            "generator_buses lists {} buses, system has {m} generators",
            spec.generator_buses.len()
        ));
    }
    let n = spec.buses;
    let in_range = |bus: usize, what: &str| {
        if bus == 0 || bus > n {
            Err(format!("{what} bus {bus} out of range 1..={n}"))
        } else {
            Ok(())
        }
    };
    for &b in &spec.generator_buses {
        in_range(b, "generator")?;
    }
    for &b in &spec.faulted_buses {
        in_range(b, "faulted")?;
        if spec.generator_buses.contains(&b) {
            return Err(format!("faulted bus {b} is a generator terminal"));
        }
    }
    // Grounded buses drop out of the system; renumber the survivors.
    let mut new_index = vec![0usize; n + 1];
    let mut next = 0;
    for (bus, slot) in new_index.iter_mut().enumerate().skip(1) {
        if !spec.faulted_buses.contains(&bus) {
            next += 1;
            *slot = next;
        }
    }
    let kept = |bus: usize| new_index.get(bus).copied().filter(|&k| k != 0);

    let mut branches = Vec::new();
    let mut shunts = Vec::new();
    for (k, br) in spec.branches.iter().enumerate() {
        in_range(br.from, "branch")?;
        in_range(br.to, "branch")?;
        let z = Complex64::new(br.r, br.x);
        if !(z.norm() > 0.0 && z.norm().is_finite() && br.b.is_finite()) {
            return Err(format!("branch {}: impedance must be finite and non-zero", k + 1));
        }
        let charging = Complex64::new(0.0, br.b / 2.0);
        for end in [br.from, br.to] {
            if let Some(node) = kept(end) {
                shunts.push(Shunt {
                    node,
                    admittance: charging,
                });
            }
        }
        match (kept(br.from), kept(br.to)) {
            (Some(from), Some(to)) => branches.push(Branch {
                from,
                to,
                admittance: z.inv(),
            }),
            (Some(node), None) | (None, Some(node)) => shunts.push(Shunt {
                node,
                admittance: z.inv(),
            }),
            (None, None) => {}
        }
    }
    for s in &spec.shunts {
        in_range(s.bus, "shunt")?;
        if let Some(node) = kept(s.bus) {
            shunts.push(Shunt {
                node,
                admittance: Complex64::new(s.g, s.b),
            });
        }
    }
    for l in &spec.loads {
        in_range(l.bus, "load")?;
        if !(l.v > 0.0 && l.v.is_finite()) {
            return Err(format!("load at bus {}: v must be positive", l.bus));
        }
        if let Some(node) = kept(l.bus) {
            shunts.push(Shunt {
                node,
                admittance: constant_impedance_load(l.p, l.q, l.v),
            });
        }
    }
    let y_bus = build_y_bus(&branches, &shunts, next).map_err(|e| e.to_string())?;
    let retained: Vec<usize> = spec.generator_buses.iter().map(|&b| new_index[b]).collect();
    kron_reduce(&y_bus, &retained).map_err(|e| e.to_string())
}
