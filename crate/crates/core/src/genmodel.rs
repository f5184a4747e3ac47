//! Generator dynamics: the classical swing model and the two-axis
//! (fourth-order) model, each with its algebraic network interface.
//!
//! State vectors are laid out machine by machine: `[delta, omega]` for the
//! classical model and `[delta, omega, e'_q, e'_d]` for the fourth-order
//! model. `omega` is the per-unit speed deviation from synchronism.

use crate::error::{Error, Result};
use crate::netred::{RealBlockMatrix, SourceImpedance};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Classical,
    FourthOrder,
}

impl ModelKind {
    pub fn states_per_machine(self) -> usize {
        match self {
            ModelKind::Classical => 2,
            ModelKind::FourthOrder => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Classical => "classical",
            ModelKind::FourthOrder => "fourth-order",
        }
    }
}

/// Swing-model constants for one machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalGenParams<T> {
    pub h: T,
    pub d: T,
    pub r_a: T,
    pub x_d_prime: T,
    pub p_m: T,
    /// Constant voltage magnitude behind the transient reactance.
    pub e_q_prime: T,
}

impl<T: Real> ClassicalGenParams<T> {
    pub fn validate(&self, generator: usize) -> Result<()> {
        let bad = |field, reason| {
            Err(Error::InvalidParameter {
                generator,
                field,
                reason,
            })
        };
        for (field, v) in [
            ("H", self.h),
            ("D", self.d),
            ("R_a", self.r_a),
            ("X'_d", self.x_d_prime),
            ("P_m", self.p_m),
            ("e'_q", self.e_q_prime),
        ] {
            if !v.is_finite() {
                return bad(field, "must be finite");
            }
        }
        if self.h <= T::zero() {
            return bad("H", "must be positive");
        }
        if self.d < T::zero() {
            return bad("D", "must be non-negative");
        }
        if self.e_q_prime <= T::zero() {
            return bad("e'_q", "must be positive");
        }
        self.impedance().validate(generator)
    }

    pub fn impedance(&self) -> SourceImpedance<T> {
        SourceImpedance::classical(self.r_a, self.x_d_prime)
    }
}

/// Two-axis model constants for one machine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourthOrderGenParams<T> {
    pub h: T,
    pub d: T,
    pub r_a: T,
    pub x_d: T,
    pub x_q: T,
    pub x_d_prime: T,
    pub x_q_prime: T,
    pub t_d0_prime: T,
    pub t_q0_prime: T,
    pub p_m: T,
    pub e_fq: T,
}

impl<T: Real> FourthOrderGenParams<T> {
    pub fn validate(&self, generator: usize) -> Result<()> {
        let bad = |field, reason| {
            Err(Error::InvalidParameter {
                generator,
                field,
                reason,
            })
        };
        for (field, v) in [
            ("H", self.h),
            ("D", self.d),
            ("R_a", self.r_a),
            ("X_d", self.x_d),
            ("X_q", self.x_q),
            ("X'_d", self.x_d_prime),
            ("X'_q", self.x_q_prime),
            ("T'_d0", self.t_d0_prime),
            ("T'_q0", self.t_q0_prime),
            ("P_m", self.p_m),
            ("E_fq", self.e_fq),
        ] {
            if !v.is_finite() {
                return bad(field, "must be finite");
            }
        }
        if self.h <= T::zero() {
            return bad("H", "must be positive");
        }
        if self.d < T::zero() {
            return bad("D", "must be non-negative");
        }
        if self.t_d0_prime <= T::zero() {
            return bad("T'_d0", "must be positive");
        }
        if self.t_q0_prime <= T::zero() {
            return bad("T'_q0", "must be positive");
        }
        self.impedance().validate(generator)?;
        if self.x_d < self.x_d_prime {
            return bad("X_d", "must be at least X'_d");
        }
        if self.x_q < self.x_q_prime {
            return bad("X_q", "must be at least X'_q");
        }
        Ok(())
    }

    pub fn impedance(&self) -> SourceImpedance<T> {
        SourceImpedance {
            r_a: self.r_a,
            x_d_prime: self.x_d_prime,
            x_q_prime: self.x_q_prime,
        }
    }
}

/// Differential state of all machines in one model.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicState<T> {
    kind: ModelKind,
    values: Vec<T>,
}

impl<T: Real> DynamicState<T> {
    pub fn new(kind: ModelKind, values: Vec<T>) -> Result<Self> {
        let per = kind.states_per_machine();
        if values.is_empty() || !values.len().is_multiple_of(per) {
            return Err(Error::Dimension {
                expected: per * (values.len() / per).max(1),
                actual: values.len(),
                context: "state vector length",
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("state vector"));
        }
        Ok(Self { kind, values })
    }

    pub fn classical(deltas: &[T], omegas: &[T]) -> Result<Self> {
        check_len(deltas.len(), omegas.len(), "omega")?;
        let values = deltas.iter().zip(omegas).flat_map(|(&d, &w)| [d, w]).collect();
        Self::new(ModelKind::Classical, values)
    }

    pub fn fourth_order(deltas: &[T], omegas: &[T], e_q_primes: &[T], e_d_primes: &[T]) -> Result<Self> {
        let m = deltas.len();
        check_len(m, omegas.len(), "omega")?;
        check_len(m, e_q_primes.len(), "e'_q")?;
        check_len(m, e_d_primes.len(), "e'_d")?;
        let values = (0..m)
            .flat_map(|i| [deltas[i], omegas[i], e_q_primes[i], e_d_primes[i]])
            .collect();
        Self::new(ModelKind::FourthOrder, values)
    }

    pub(crate) fn from_raw(kind: ModelKind, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len() % kind.states_per_machine(), 0);
        Self { kind, values }
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.values.len() / self.kind.states_per_machine()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    fn at(&self, i: usize, offset: usize) -> T {
        self.values[i * self.kind.states_per_machine() + offset]
    }

    pub fn delta(&self, i: usize) -> T {
        self.at(i, 0)
    }

    pub fn omega(&self, i: usize) -> T {
        self.at(i, 1)
    }

    /// `None` for classical states, where `e'_q` is a constant parameter.
    pub fn e_q_prime(&self, i: usize) -> Option<T> {
        (self.kind == ModelKind::FourthOrder).then(|| self.at(i, 2))
    }

    pub fn e_d_prime(&self, i: usize) -> Option<T> {
        (self.kind == ModelKind::FourthOrder).then(|| self.at(i, 3))
    }

    pub fn deltas(&self) -> Vec<T> {
        (0..self.m()).map(|i| self.delta(i)).collect()
    }

    pub fn omegas(&self) -> Vec<T> {
        (0..self.m()).map(|i| self.omega(i)).collect()
    }

    /// Adds `offset` to every rotor angle.
    pub fn shifted(&self, offset: T) -> Self {
        let per = self.kind.states_per_machine();
        let mut values = self.values.clone();
        for v in values.iter_mut().step_by(per) {
            *v += offset;
        }
        Self {
            kind: self.kind,
            values,
        }
    }
}

fn check_len(expected: usize, actual: usize, context: &'static str) -> Result<()> {
    if expected != actual {
        return Err(Error::Dimension {
            expected,
            actual,
            context,
        });
    }
    Ok(())
}

/// Algebraic quantities of one machine at a network solution.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MachineSolution<T> {
    pub e_x_prime: T,
    pub e_y_prime: T,
    pub i_x: T,
    pub i_y: T,
    pub i_d: T,
    pub i_q: T,
    /// Terminal voltage, xy frame.
    pub e_x: T,
    pub e_y: T,
    /// Terminal voltage, dq frame.
    pub e_d: T,
    pub e_q: T,
    pub p_e: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSolution<T> {
    pub machines: Vec<MachineSolution<T>>,
}

impl<T: Real> NetworkSolution<T> {
    pub fn p_e(&self) -> Vec<T> {
        self.machines.iter().map(|s| s.p_e).collect()
    }
}

/// `xy -> dq`: `d = sin(delta) x - cos(delta) y`, `q = cos(delta) x + sin(delta) y`.
pub fn dq_from_xy<T: Real>(delta: T, x: T, y: T) -> (T, T) {
    let (s, c) = delta.sin_cos();
    (s * x - c * y, c * x + s * y)
}

/// `dq -> xy`, the inverse rotation.
pub fn xy_from_dq<T: Real>(delta: T, d: T, q: T) -> (T, T) {
    let (s, c) = delta.sin_cos();
    (s * d + c * q, -c * d + s * q)
}

fn check_network<T: Real>(y: &RealBlockMatrix<T>, m: usize, impedances: usize) -> Result<()> {
    check_len(m, y.m(), "internal-bus matrix generator count")?;
    check_len(m, impedances, "source impedance count")
}

/// Network interface of the classical model: rotate `(0, e'_q)` into the
/// network frame, take currents from `Y`, subtract the source impedance drop
/// and form `P_e = e_x i_x + e_y i_y`.
pub fn classical_network_solution<T: Real>(
    deltas: &[T],
    e_q_primes: &[T],
    y: &RealBlockMatrix<T>,
    impedances: &[SourceImpedance<T>],
) -> Result<NetworkSolution<T>> {
    let m = deltas.len();
    check_len(m, e_q_primes.len(), "e'_q count")?;
    check_network(y, m, impedances.len())?;

    let mut internal = Vec::with_capacity(2 * m);
    for (&d, &e) in deltas.iter().zip(e_q_primes) {
        let (ex, ey) = xy_from_dq(d, T::zero(), e);
        internal.extend([ex, ey]);
    }
    let currents = y.apply(&internal)?;

    let machines = (0..m)
        .map(|i| {
            let (ex_p, ey_p) = (internal[2 * i], internal[2 * i + 1]);
            let (ix, iy) = (currents[2 * i], currents[2 * i + 1]);
            let z = &impedances[i];
            let e_x = ex_p - (z.r_a * ix - z.x_d_prime * iy);
            let e_y = ey_p - (z.x_d_prime * ix + z.r_a * iy);
            let (i_d, i_q) = dq_from_xy(deltas[i], ix, iy);
            let (e_d, e_q) = dq_from_xy(deltas[i], e_x, e_y);
            MachineSolution {
                e_x_prime: ex_p,
                e_y_prime: ey_p,
                i_x: ix,
                i_y: iy,
                i_d,
                i_q,
                e_x,
                e_y,
                e_d,
                e_q,
                p_e: e_x * ix + e_y * iy,
            }
        })
        .collect();
    Ok(NetworkSolution { machines })
}

fn expect_kind<T: Real>(state: &DynamicState<T>, kind: ModelKind) -> Result<()> {
    if state.kind() != kind {
        return Err(Error::Scenario(format!(
            "expected a {} state, got {}",
            kind.name(),
            state.kind().name()
        )));
    }
    Ok(())
}

/// Swing-equation right-hand side for every machine.
pub fn classical_derivatives<T: Real>(
    state: &DynamicState<T>,
    params: &[ClassicalGenParams<T>],
    y: &RealBlockMatrix<T>,
    omega_s: T,
) -> Result<Vec<T>> {
    expect_kind(state, ModelKind::Classical)?;
    let m = state.m();
    check_len(m, params.len(), "classical parameter count")?;
    let e_q: Vec<T> = params.iter().map(|p| p.e_q_prime).collect();
    let z: Vec<_> = params.iter().map(ClassicalGenParams::impedance).collect();
    let sol = classical_network_solution(&state.deltas(), &e_q, y, &z)?;

    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(2 * m);
    for (i, p) in params.iter().enumerate() {
        let w = state.omega(i);
        out.push(omega_s * w);
        out.push((p.p_m - sol.machines[i].p_e - p.d * w) / (two * p.h));
    }
    Ok(out)
}

/// Network interface of the two-axis model: rotate `(e'_d, e'_q)` into the
/// network frame, take currents from `Y` (which must belong to the current
/// rotor angles unless every machine has `X'_d = X'_q`), rotate back to dq,
/// subtract the dq impedance drop and form `P_e = e_d i_d + e_q i_q`.
pub fn fourth_order_network_solution<T: Real>(
    state: &DynamicState<T>,
    y: &RealBlockMatrix<T>,
    impedances: &[SourceImpedance<T>],
) -> Result<NetworkSolution<T>> {
    expect_kind(state, ModelKind::FourthOrder)?;
    let m = state.m();
    check_network(y, m, impedances.len())?;

    let mut internal = Vec::with_capacity(2 * m);
    for i in 0..m {
        let (ex, ey) = xy_from_dq(state.delta(i), state.at(i, 3), state.at(i, 2));
        internal.extend([ex, ey]);
    }
    let currents = y.apply(&internal)?;

    let machines = (0..m)
        .map(|i| {
            let delta = state.delta(i);
            let (e_qp, e_dp) = (state.at(i, 2), state.at(i, 3));
            let (ix, iy) = (currents[2 * i], currents[2 * i + 1]);
            let (i_d, i_q) = dq_from_xy(delta, ix, iy);
            let z = &impedances[i];
            let e_d = e_dp - (z.r_a * i_d - z.x_q_prime * i_q);
            let e_q = e_qp - (z.x_d_prime * i_d + z.r_a * i_q);
            let (e_x, e_y) = xy_from_dq(delta, e_d, e_q);
            MachineSolution {
                e_x_prime: internal[2 * i],
                e_y_prime: internal[2 * i + 1],
                i_x: ix,
                i_y: iy,
                i_d,
                i_q,
                e_x,
                e_y,
                e_d,
                e_q,
                p_e: e_d * i_d + e_q * i_q,
            }
        })
        .collect();
    Ok(NetworkSolution { machines })
}

/// Two-axis model right-hand side for every machine.
pub fn fourth_order_derivatives<T: Real>(
    state: &DynamicState<T>,
    params: &[FourthOrderGenParams<T>],
    y: &RealBlockMatrix<T>,
    omega_s: T,
) -> Result<Vec<T>> {
    let z: Vec<_> = params.iter().map(FourthOrderGenParams::impedance).collect();
    check_len(state.m(), params.len(), "fourth-order parameter count")?;
    let sol = fourth_order_network_solution(state, y, &z)?;
    Ok(fourth_order_rates(state, params, &sol, omega_s))
}

pub(crate) fn fourth_order_rates<T: Real>(
    state: &DynamicState<T>,
    params: &[FourthOrderGenParams<T>],
    sol: &NetworkSolution<T>,
    omega_s: T,
) -> Vec<T> {
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(4 * params.len());
    for (i, p) in params.iter().enumerate() {
        let s = &sol.machines[i];
        let w = state.omega(i);
        let (e_qp, e_dp) = (state.at(i, 2), state.at(i, 3));
        out.push(omega_s * w);
        out.push((p.p_m - s.p_e - p.d * w) / (two * p.h));
        out.push((p.e_fq - (p.x_d - p.x_d_prime) * s.i_d - e_qp) / p.t_d0_prime);
        out.push(((p.x_q - p.x_q_prime) * s.i_q - e_dp) / p.t_q0_prime);
    }
    out
}
