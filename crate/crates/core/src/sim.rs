//! Fixed-step time-domain simulation with staged network switching.

use std::borrow::Cow;
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::genmodel::{
    classical_network_solution, fourth_order_network_solution, fourth_order_rates, ClassicalGenParams, DynamicState,
    FourthOrderGenParams, ModelKind, NetworkSolution,
};
use crate::init::{init_classical, init_fourth_order, OperatingPoint};
use crate::netred::{
    build_t1, build_t2, constant_internal_admittance, internal_bus_admittance, ComplexAdmittanceMatrix,
    RealBlockMatrix, SourceImpedance, TerminalNetwork,
};
use crate::scalar::Real;

/// Speed deviation beyond which a run is declared divergent, per-unit.
pub const DIVERGENCE_OMEGA: f64 = 5.0;

/// One classical fourth-order Runge-Kutta step of `x' = f(t, x)`.
pub fn rk4_step<T, F>(mut f: F, state: &[T], t: T, h: T) -> Result<Vec<T>>
where
    T: Real,
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
{
    let half = h / T::lit(2.0);
    let mut eval = |time: T, x: &[T]| -> Result<Vec<T>> {
        let k = f(time, x)?;
        if k.len() != x.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                actual: k.len(),
                context: "derivative vector",
            });
        }
        if k.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteDerivative {
                time: time.as_f64(),
                state: x.iter().map(|v| v.as_f64()).collect(),
            });
        }
        Ok(k)
    };
    let axpy = |k: &[T], scale: T| -> Vec<T> { state.iter().zip(k).map(|(&x, &d)| x + scale * d).collect() };

    let k1 = eval(t, state)?;
    let k2 = eval(t + half, &axpy(&k1, half))?;
    let k3 = eval(t + half, &axpy(&k2, half))?;
    let k4 = eval(t + h, &axpy(&k3, h))?;

    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    Ok((0..state.len())
        .map(|i| {
            let incr = sixth * (k1[i] + two * (k2[i] + k3[i]) + k4[i]);
            if incr == T::zero() {
                state[i]
            } else {
                state[i] + incr
            }
        })
        .collect())
}

/// Generator parameters for the whole system, one model kind throughout.
#[derive(Debug, Clone, PartialEq)]
pub enum Machines<T> {
    Classical(Vec<ClassicalGenParams<T>>),
    FourthOrder(Vec<FourthOrderGenParams<T>>),
}

impl<T: Real> Machines<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            Machines::Classical(_) => ModelKind::Classical,
            Machines::FourthOrder(_) => ModelKind::FourthOrder,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Machines::Classical(p) => p.len(),
            Machines::FourthOrder(p) => p.len(),
        }
    }

    pub fn impedances(&self) -> Vec<SourceImpedance<T>> {
        match self {
            Machines::Classical(p) => p.iter().map(ClassicalGenParams::impedance).collect(),
            Machines::FourthOrder(p) => p.iter().map(FourthOrderGenParams::impedance).collect(),
        }
    }

    /// Every machine has `X'_d = X'_q`, so the internal-bus matrix of a
    /// terminal network is angle independent.
    pub fn has_constant_internal_admittance(&self) -> bool {
        self.impedances().iter().all(SourceImpedance::is_isotropic)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m() == 0 {
            return Err(Error::Scenario("no generators".into()));
        }
        match self {
            Machines::Classical(p) => p.iter().enumerate().try_for_each(|(i, g)| g.validate(i + 1)),
            Machines::FourthOrder(p) => p.iter().enumerate().try_for_each(|(i, g)| g.validate(i + 1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition<T> {
    State(DynamicState<T>),
    OperatingPoint(Vec<OperatingPoint<T>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StageLabel {
    Pre,
    On,
    Post,
}

impl StageLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            StageLabel::Pre => "pre",
            StageLabel::On => "on",
            StageLabel::Post => "post",
        }
    }
}

impl fmt::Display for StageLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Network representation carried by a stage.
#[derive(Debug, Clone, PartialEq)]
pub enum StageNetwork<T> {
    /// Internal-bus matrix used as given.
    Internal(RealBlockMatrix<T>),
    /// Terminal-bus matrix, pushed through the source-impedance transform.
    Terminal(ComplexAdmittanceMatrix<T>),
}

impl<T: Real> StageNetwork<T> {
    pub fn m(&self) -> usize {
        match self {
            StageNetwork::Internal(y) => y.m(),
            StageNetwork::Terminal(y) => y.dim(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkStage<T> {
    pub label: StageLabel,
    pub network: StageNetwork<T>,
    pub t_start: T,
}

/// Internal-bus admittance of one stage, ready for evaluation.
#[derive(Debug, Clone)]
pub enum InternalAdmittance<T> {
    Constant(RealBlockMatrix<T>),
    /// Recomputed from the rotor angles at every evaluation.
    AngleDependent {
        network: TerminalNetwork<T>,
        t2: RealBlockMatrix<T>,
    },
}

impl<T: Real> InternalAdmittance<T> {
    pub fn for_stage(network: &StageNetwork<T>, machines: &Machines<T>) -> Result<Self> {
        if network.m() != machines.m() {
            return Err(Error::Dimension {
                expected: machines.m(),
                actual: network.m(),
                context: "stage network generator count",
            });
        }
        match network {
            StageNetwork::Internal(y) => Ok(Self::Constant(y.clone())),
            StageNetwork::Terminal(y_t) => {
                let terminal = TerminalNetwork::from_terminal(y_t)?;
                let t2 = build_t2(&machines.impedances());
                if machines.has_constant_internal_admittance() {
                    Ok(Self::Constant(constant_internal_admittance(&terminal, &t2)?))
                } else {
                    Ok(Self::AngleDependent { network: terminal, t2 })
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Self::Constant(_))
    }

    pub fn evaluate(&self, deltas: &[T]) -> Result<Cow<'_, RealBlockMatrix<T>>> {
        match self {
            Self::Constant(y) => Ok(Cow::Borrowed(y)),
            Self::AngleDependent { network, t2 } => {
                internal_bus_admittance(network, &build_t1(deltas), t2).map(Cow::Owned)
            }
        }
    }
}

/// Full simulation input.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario<T> {
    pub machines: Machines<T>,
    pub initial: InitialCondition<T>,
    pub stages: Vec<NetworkStage<T>>,
    pub t_end: T,
    pub step: T,
    pub omega_s: T,
    pub stride: usize,
}

/// Synchronous speed in rad/s for a system frequency in Hz.
pub fn synchronous_speed<T: Real>(frequency_hz: T) -> T {
    T::TAU() * frequency_hz
}

impl<T: Real> Scenario<T> {
    pub fn validate(&self) -> Result<()> {
        self.machines.validate()?;
        let positive = |v: T| v.is_finite() && v > T::zero();
        if !positive(self.step) {
            return Err(Error::Scenario("step must be positive".into()));
        }
        if !positive(self.t_end) {
            return Err(Error::Scenario("t_end must be positive".into()));
        }
        if !positive(self.omega_s) {
            return Err(Error::Scenario("omega_s must be positive".into()));
        }
        if self.stride == 0 {
            return Err(Error::Scenario("output stride must be at least 1".into()));
        }
        let first = self
            .stages
            .first()
            .ok_or_else(|| Error::Scenario("at least one network stage is required".into()))?;
        if first.t_start != T::zero() {
            return Err(Error::Scenario("first network stage must start at t = 0".into()));
        }
        for pair in self.stages.windows(2) {
            if pair[1].t_start.is_nan() || pair[1].t_start < pair[0].t_start {
                return Err(Error::Scenario(format!(
                    "stage '{}' starts before stage '{}'",
                    pair[1].label, pair[0].label
                )));
            }
        }
        let m = self.machines.m();
        for stage in &self.stages {
            if stage.network.m() != m {
                return Err(Error::Scenario(format!(
                    "stage '{}' network has {} generators, system has {m}",
                    stage.label,
                    stage.network.m()
                )));
            }
        }
        match &self.initial {
            InitialCondition::State(s) => {
                if s.kind() != self.machines.kind() || s.m() != m {
                    return Err(Error::Scenario(format!(
                        "initial state must be {} with {m} generators",
                        self.machines.kind().name()
                    )));
                }
            }
            InitialCondition::OperatingPoint(ops) => {
                if ops.len() != m {
                    return Err(Error::Scenario(format!(
                        "operating point lists {} generators, system has {m}",
                        ops.len()
                    )));
                }
                for (i, op) in ops.iter().enumerate() {
                    op.validate(i + 1)?;
                }
            }
        }
        Ok(())
    }

    /// Number of integration steps; `t_end` is rounded to the step grid.
    pub fn step_count(&self) -> usize {
        ((self.t_end / self.step).round().to_usize().unwrap_or(0)).max(1)
    }

    /// Step index at which a stage becomes active (nearest grid point).
    pub fn grid_index(&self, t: T) -> usize {
        (t / self.step).round().to_usize().unwrap_or(0)
    }

    /// Resolves the constants and initial state, running the initializers
    /// when an operating point is given.
    pub fn resolve(&self) -> Result<(Machines<T>, DynamicState<T>)> {
        match &self.initial {
            InitialCondition::State(s) => Ok((self.machines.clone(), s.clone())),
            InitialCondition::OperatingPoint(ops) => {
                let with_index = |i: usize| {
                    move |e: Error| match e {
                        Error::ZeroPhasor { which, .. } => Error::ZeroPhasor {
                            generator: i + 1,
                            which,
                        },
                        other => other,
                    }
                };
                match &self.machines {
                    Machines::Classical(params) => {
                        let mut params = params.clone();
                        let mut deltas = Vec::with_capacity(params.len());
                        for (i, (p, op)) in params.iter_mut().zip(ops).enumerate() {
                            let out = init_classical(op, p.r_a, p.x_d_prime).map_err(with_index(i))?;
                            p.e_q_prime = out.e_q_prime;
                            p.p_m = out.p_m;
                            deltas.push(out.delta0);
                        }
                        let omegas = vec![T::zero(); deltas.len()];
                        let state = DynamicState::classical(&deltas, &omegas)?;
                        Ok((Machines::Classical(params), state))
                    }
                    Machines::FourthOrder(params) => {
                        let mut params = params.clone();
                        let m = params.len();
                        let (mut d, mut eq, mut ed) =
                            (Vec::with_capacity(m), Vec::with_capacity(m), Vec::with_capacity(m));
                        for (i, (p, op)) in params.iter_mut().zip(ops).enumerate() {
                            let out = init_fourth_order(op, p).map_err(with_index(i))?;
                            p.p_m = out.p_m;
                            p.e_fq = out.e_fq;
                            d.push(out.delta0);
                            eq.push(out.e_q_prime0);
                            ed.push(out.e_d_prime0);
                        }
                        let state = DynamicState::fourth_order(&d, &vec![T::zero(); m], &eq, &ed)?;
                        Ok((Machines::FourthOrder(params), state))
                    }
                }
            }
        }
    }

    /// Stable digest of every input that affects the trajectory.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        let mut put = |x: T| h.update(x.as_f64().to_bits().to_le_bytes());
        let (kind_tag, params): (u8, Vec<T>) = match &self.machines {
            Machines::Classical(p) => (
                0,
                p.iter()
                    .flat_map(|g| [g.h, g.d, g.r_a, g.x_d_prime, g.p_m, g.e_q_prime])
                    .collect(),
            ),
            Machines::FourthOrder(p) => (
                1,
                p.iter()
                    .flat_map(|g| {
                        [
                            g.h,
                            g.d,
                            g.r_a,
                            g.x_d,
                            g.x_q,
                            g.x_d_prime,
                            g.x_q_prime,
                            g.t_d0_prime,
                            g.t_q0_prime,
                            g.p_m,
                            g.e_fq,
                        ]
                    })
                    .collect(),
            ),
        };
        put(T::from_u8(kind_tag).unwrap_or_else(T::zero));
        params.into_iter().for_each(&mut put);
        match &self.initial {
            InitialCondition::State(s) => {
                put(T::zero());
                s.values().iter().copied().for_each(&mut put);
            }
            InitialCondition::OperatingPoint(ops) => {
                put(T::one());
                for op in ops {
                    [op.v_t.re, op.v_t.im, op.i_t.re, op.i_t.im]
                        .into_iter()
                        .for_each(&mut put);
                }
            }
        }
        for stage in &self.stages {
            put(T::from_u8(stage.label as u8).unwrap_or_else(T::zero));
            put(stage.t_start);
            match &stage.network {
                StageNetwork::Internal(y) => {
                    put(T::zero());
                    y.matrix().as_slice().iter().copied().for_each(&mut put);
                }
                StageNetwork::Terminal(y) => {
                    put(T::one());
                    for z in y.matrix().as_slice() {
                        put(z.re);
                        put(z.im);
                    }
                }
            }
        }
        [self.t_end, self.step, self.omega_s].into_iter().for_each(&mut put);
        put(T::from_usize(self.stride).unwrap_or_else(T::zero));
        h.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Machine dynamics coupled to one stage's network.
pub struct SystemModel<'a, T> {
    pub machines: &'a Machines<T>,
    pub admittance: &'a InternalAdmittance<T>,
    pub omega_s: T,
}

impl<T: Real> SystemModel<'_, T> {
    pub fn network_solution(&self, state: &DynamicState<T>) -> Result<NetworkSolution<T>> {
        let deltas = state.deltas();
        let y = self.admittance.evaluate(&deltas)?;
        match self.machines {
            Machines::Classical(p) => {
                let e_q: Vec<T> = p.iter().map(|g| g.e_q_prime).collect();
                classical_network_solution(&deltas, &e_q, &y, &self.machines.impedances())
            }
            Machines::FourthOrder(_) => fourth_order_network_solution(state, &y, &self.machines.impedances()),
        }
    }

    pub fn derivatives(&self, state: &DynamicState<T>) -> Result<Vec<T>> {
        let sol = self.network_solution(state)?;
        let two = T::lit(2.0);
        match self.machines {
            Machines::Classical(p) => Ok(p
                .iter()
                .enumerate()
                .flat_map(|(i, g)| {
                    let w = state.omega(i);
                    [self.omega_s * w, (g.p_m - sol.machines[i].p_e - g.d * w) / (two * g.h)]
                })
                .collect()),
            Machines::FourthOrder(p) => Ok(fourth_order_rates(state, p, &sol, self.omega_s)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryMeta<T> {
    pub fingerprint: String,
    pub step: T,
    pub kind: ModelKind,
    pub m: usize,
}

/// Sampled simulation output.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<DynamicState<T>>,
    pub p_e: Vec<Vec<T>>,
    pub meta: TrajectoryMeta<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> Option<&DynamicState<T>> {
        self.states.last()
    }

    /// Sample whose time is closest to `t`.
    pub fn state_near(&self, t: T) -> Option<&DynamicState<T>> {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (*a.1 - t).abs().partial_cmp(&(*b.1 - t).abs()).unwrap())?
            .0;
        self.states.get(idx)
    }

    fn push(&mut self, t: T, state: DynamicState<T>, p_e: Vec<T>) {
        self.times.push(t);
        self.states.push(state);
        self.p_e.push(p_e);
    }
}

/// A run that stopped early, with everything sampled up to that point.
#[derive(Debug, Clone)]
pub struct SimulationFailure<T> {
    pub error: Error,
    pub partial: Option<Box<Trajectory<T>>>,
}

impl<T> fmt::Display for SimulationFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.error.fmt(f)
    }
}

impl<T: fmt::Debug> std::error::Error for SimulationFailure<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl<T> From<Error> for SimulationFailure<T> {
    fn from(error: Error) -> Self {
        Self { error, partial: None }
    }
}

/// Integrates the scenario on a fixed grid. Stage switches happen at the
/// start of the step whose time is nearest the stage's `t_start`; states
/// carry over unchanged across a switch.
pub fn simulate<T: Real>(scenario: &Scenario<T>) -> Result<Trajectory<T>, SimulationFailure<T>> {
    scenario.validate()?;
    let (machines, initial) = scenario.resolve()?;
    let kind = machines.kind();

    let admittances = scenario
        .stages
        .iter()
        .map(|s| InternalAdmittance::for_stage(&s.network, &machines))
        .collect::<Result<Vec<_>>>()?;
    let starts: Vec<usize> = scenario.stages.iter().map(|s| scenario.grid_index(s.t_start)).collect();
    let active = |k: usize| starts.iter().rposition(|&s| s <= k).unwrap_or(0);
    let model = |k: usize| SystemModel {
        machines: &machines,
        admittance: &admittances[active(k)],
        omega_s: scenario.omega_s,
    };

    let h = scenario.step;
    let n = scenario.step_count();
    let time_at = |k: usize| T::from_usize(k).expect("step index representable") * h;
    let mut trajectory = Trajectory {
        times: Vec::with_capacity(n / scenario.stride + 2),
        states: Vec::with_capacity(n / scenario.stride + 2),
        p_e: Vec::with_capacity(n / scenario.stride + 2),
        meta: TrajectoryMeta {
            fingerprint: scenario.fingerprint(),
            step: h,
            kind,
            m: machines.m(),
        },
    };

    let fail = |error: Error, trajectory: Trajectory<T>| SimulationFailure {
        error,
        partial: Some(Box::new(trajectory)),
    };

    match model(0).network_solution(&initial) {
        Ok(sol) => trajectory.push(T::zero(), initial.clone(), sol.p_e()),
        Err(e) => return Err(fail(e, trajectory)),
    }

    let mut x = initial.into_values();
    let omega_limit = T::lit(DIVERGENCE_OMEGA);
    for k in 0..n {
        let sys = model(k);
        let stepped = rk4_step(
            |_, v| sys.derivatives(&DynamicState::from_raw(kind, v.to_vec())),
            &x,
            time_at(k),
            h,
        );
        x = match stepped {
            Ok(next) => next,
            Err(e) => return Err(fail(e, trajectory)),
        };
        let t = time_at(k + 1);
        let state = DynamicState::from_raw(kind, x.clone());
        if let Some(reason) = divergence(&state, omega_limit) {
            return Err(fail(
                Error::Diverged {
                    time: t.as_f64(),
                    reason,
                },
                trajectory,
            ));
        }
        if (k + 1) % scenario.stride == 0 || k + 1 == n {
            match model(k + 1).network_solution(&state) {
                Ok(sol) => trajectory.push(t, state, sol.p_e()),
                Err(e) => return Err(fail(e, trajectory)),
            }
        }
    }
    Ok(trajectory)
}

fn divergence<T: Real>(state: &DynamicState<T>, omega_limit: T) -> Option<String> {
    if state.values().iter().any(|v| !v.is_finite()) {
        return Some("non-finite state".into());
    }
    (0..state.m()).find_map(|i| {
        let w = state.omega(i);
        (w.abs() > omega_limit)
            .then(|| format!("generator {} speed deviation {:.3} pu exceeds limit", i + 1, w.as_f64()))
    })
}

/// First-swing screening of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport<T> {
    pub max_separation: T,
    pub time_of_max: T,
    /// Generator pair (1-based) at the maximum.
    pub pair: (usize, usize),
    pub initial_separation: T,
    pub final_separation: T,
    pub peak_omega: T,
    pub stable: bool,
}

fn max_pairwise<T: Real>(state: &DynamicState<T>) -> (T, (usize, usize)) {
    let m = state.m();
    let mut best = (T::zero(), (1, 1.min(m)));
    for i in 0..m {
        for j in i + 1..m {
            let sep = (state.delta(i) - state.delta(j)).abs();
            if sep > best.0 {
                best = (sep, (i + 1, j + 1));
            }
        }
    }
    best
}

/// Largest rotor-angle separation and a first-swing verdict: stable when the
/// separation stays below pi and has turned back down after its peak. The
/// pi threshold is a screening heuristic, not a formal stability proof.
pub fn stability_summary<T: Real>(trajectory: &Trajectory<T>) -> Option<StabilityReport<T>> {
    let first = trajectory.states.first()?;
    let last = trajectory.states.last()?;
    let mut max_sep = T::neg_infinity();
    let mut time_of_max = T::zero();
    let mut pair = (1, 1);
    let mut peak_omega = T::zero();
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        let (sep, p) = max_pairwise(s);
        if sep > max_sep {
            max_sep = sep;
            time_of_max = *t;
            pair = p;
        }
        for i in 0..s.m() {
            peak_omega = peak_omega.max(s.omega(i).abs());
        }
    }
    let initial_separation = max_pairwise(first).0;
    let final_separation = max_pairwise(last).0;
    let still_rising = time_of_max == *trajectory.times.last()? && max_sep > initial_separation + T::lit(1e-9);
    Some(StabilityReport {
        max_separation: max_sep,
        time_of_max,
        pair,
        initial_separation,
        final_separation,
        peak_omega,
        stable: max_sep < T::PI() && !still_rising,
    })
}

impl<T: Real> fmt::Display for StabilityReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "max_separation_rad: {:.6}", self.max_separation.as_f64())?;
        writeln!(f, "time_of_max_s: {:.6}", self.time_of_max.as_f64())?;
        writeln!(f, "pair: {}-{}", self.pair.0, self.pair.1)?;
        writeln!(f, "initial_separation_rad: {:.6}", self.initial_separation.as_f64())?;
        writeln!(f, "final_separation_rad: {:.6}", self.final_separation.as_f64())?;
        writeln!(f, "peak_omega_pu: {:.6}", self.peak_omega.as_f64())?;
        writeln!(f, "verdict: {}", if self.stable { "stable" } else { "unstable" })?;
        writeln!(f, "criterion: first swing, max separation < pi rad (heuristic)")
    }
}
