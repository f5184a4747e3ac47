//! Reference data for the WSCC 3-machine, 9-bus system in reduced form.
//!
//! Values are the published 4-decimal figures for the terminal-reduced
//! network, the internal-bus matrices before, during and after a three-phase
//! fault near bus 7 cleared by opening line 5-7, and the steady-state
//! initial conditions of both generator models.

use num_complex::Complex;

use crate::genmodel::{ClassicalGenParams, DynamicState, FourthOrderGenParams};
use crate::netred::{ComplexAdmittanceMatrix, RealBlockMatrix};
use crate::scalar::Real;
use crate::sim::{synchronous_speed, InitialCondition, Machines, NetworkStage, Scenario, StageLabel, StageNetwork};

pub const M: usize = 3;
pub const FREQUENCY_HZ: f64 = 60.0;

/// Terminal-bus reduced admittance `Y_t` as `(G, B)` pairs.
pub const TERMINAL_ADMITTANCE: [[(f64, f64); 3]; 3] = [
    [(1.1051, -4.6957), (0.0965, 2.2570), (0.0046, 2.2748)],
    [(0.0965, 2.2570), (0.7355, -5.1143), (0.1230, 2.8257)],
    [(0.0046, 2.2748), (0.1230, 2.8257), (0.7214, -5.0231)],
];

/// Pre-fault internal-bus matrix (identical for the classical model and the
/// two-axis model with `X'_q = X'_d`).
pub const INTERNAL_PRE: [[f64; 6]; 6] = [
    [0.8455, 2.9883, 0.2871, -1.5129, 0.2096, -1.2256],
    [-2.9883, 0.8455, 1.5129, 0.2871, 1.2256, 0.2096],
    [0.2871, -1.5129, 0.4200, 2.7239, 0.2133, -1.0879],
    [1.5129, 0.2871, -2.7239, 0.4200, 1.0879, 0.2133],
    [0.2096, -1.2256, 0.2133, -1.0879, 0.2770, 2.3681],
    [1.2256, 0.2096, 1.0879, 0.2133, -2.3681, 0.2770],
];

/// Fault-on internal-bus matrix.
pub const INTERNAL_FAULT_ON: [[f64; 6]; 6] = [
    [0.6568, 3.8160, 0.0, 0.0, 0.0701, -0.6306],
    [-3.8160, 0.6568, 0.0, 0.0, 0.6306, 0.0701],
    [0.0, 0.0, 0.0, 5.4855, 0.0, 0.0],
    [0.0, 0.0, -5.4855, 0.0, 0.0, 0.0],
    [0.0701, -0.6306, 0.0, 0.0, 0.1740, 2.7959],
    [0.6306, 0.0701, 0.0, 0.0, -2.7959, 0.1740],
];

/// Post-fault internal-bus matrix, line 5-7 open.
pub const INTERNAL_POST_FAULT: [[f64; 6]; 6] = [
    [1.1386, 2.2966, 0.1290, -0.7063, 0.1824, -1.0637],
    [-2.2966, 1.1386, 0.7063, 0.1290, 1.0637, 0.1824],
    [0.1290, -0.7063, 0.3744, 2.0151, 0.1921, -1.2067],
    [0.7063, 0.1290, -2.0151, 0.3744, 1.2067, 0.1921],
    [0.1824, -1.0637, 0.1921, -1.2067, 0.2691, 2.3516],
    [1.0637, 0.1824, 1.2067, 0.1921, -2.3516, 0.2691],
];

pub const H: [f64; 3] = [23.64, 6.40, 3.01];
pub const X_D_PRIME: [f64; 3] = [0.0608, 0.1198, 0.1813];
pub const P_M: [f64; 3] = [0.7164, 1.6300, 0.8500];

/// Terminal currents, real and imaginary parts (both models).
pub const I_RE: [f64; 3] = [0.6889, 1.5799, 0.8179];
pub const I_IM: [f64; 3] = [-0.2600, 0.1924, 0.1730];

pub mod classical {
    /// Damping equals inertia in the published classical data set.
    pub const D: [f64; 3] = super::H;
    pub const E_Q_PRIME: [f64; 3] = [1.0566, 1.0502, 1.0170];
    pub const DELTA0: [f64; 3] = [0.0396, 0.3444, 0.2298];
    pub const I_D: [f64; 3] = [0.2871, 0.3523, 0.0178];
    pub const I_Q: [f64; 3] = [0.6780, 1.5521, 0.8358];
}

pub mod fourth_order {
    pub const D: [f64; 3] = [0.0, 0.0, 0.0];
    pub const X_D: [f64; 3] = [0.1460, 0.8958, 1.3125];
    /// Generator 2 uses 0.8645, the standard machine value. The printed
    /// table digit order (0.8465) contradicts the table's own `e'_d(0)` and
    /// `delta(0)` for that machine; see [`X_Q2_AS_PRINTED`].
    pub const X_Q: [f64; 3] = [0.0969, 0.8645, 1.2578];
    pub const X_Q2_AS_PRINTED: f64 = 0.8465;
    pub const X_Q_PRIME: [f64; 3] = [0.0969, 0.1969, 0.2500];
    pub const T_D0_PRIME: [f64; 3] = [8.9600, 6.0000, 5.8900];
    pub const T_Q0_PRIME: [f64; 3] = [0.6000, 0.5350, 0.6000];
    pub const DELTA0: [f64; 3] = [0.0626, 1.0664, 0.9449];
    pub const E_Q_PRIME0: [f64; 3] = [1.0564, 0.7882, 0.7679];
    pub const E_D_PRIME0: [f64; 3] = [0.0, 0.6222, 0.6242];
    pub const E_FQ: [f64; 3] = [1.0821, 1.7893, 1.4030];
    pub const I_D: [f64; 3] = [0.3026, 1.2901, 0.5615];
    pub const I_Q: [f64; 3] = [0.6712, 0.9320, 0.6194];

    /// Variant with `X'_q = X'_d` on every machine.
    pub const X_Q_PRIME_ISOTROPIC: [f64; 3] = super::X_D_PRIME;
    pub const E_D_PRIME0_ISOTROPIC: [f64; 3] = [0.0242, 0.6941, 0.6668];
}

fn lit3<T: Real>(v: [f64; 3]) -> [T; 3] {
    v.map(T::lit)
}

pub fn terminal_admittance<T: Real>() -> ComplexAdmittanceMatrix<T> {
    let rows: Vec<Vec<Complex<T>>> = TERMINAL_ADMITTANCE
        .iter()
        .map(|r| r.iter().map(|&(g, b)| Complex::new(T::lit(g), T::lit(b))).collect())
        .collect();
    ComplexAdmittanceMatrix::from_rows(&rows).expect("reference matrix is valid")
}

pub fn block_matrix<T: Real>(rows: &[[f64; 6]; 6]) -> RealBlockMatrix<T> {
    let rows: Vec<Vec<T>> = rows.iter().map(|r| r.iter().map(|&v| T::lit(v)).collect()).collect();
    RealBlockMatrix::from_rows(&rows).expect("reference matrix is valid")
}

pub fn classical_params<T: Real>() -> Vec<ClassicalGenParams<T>> {
    (0..M)
        .map(|i| ClassicalGenParams {
            h: T::lit(H[i]),
            d: T::lit(classical::D[i]),
            r_a: T::zero(),
            x_d_prime: T::lit(X_D_PRIME[i]),
            p_m: T::lit(P_M[i]),
            e_q_prime: T::lit(classical::E_Q_PRIME[i]),
        })
        .collect()
}

pub fn classical_state<T: Real>() -> DynamicState<T> {
    DynamicState::classical(&lit3::<T>(classical::DELTA0), &[T::zero(); 3]).expect("valid state")
}

pub fn fourth_order_params<T: Real>() -> Vec<FourthOrderGenParams<T>> {
    use fourth_order::*;
    (0..M)
        .map(|i| FourthOrderGenParams {
            h: T::lit(H[i]),
            d: T::lit(D[i]),
            r_a: T::zero(),
            x_d: T::lit(X_D[i]),
            x_q: T::lit(X_Q[i]),
            x_d_prime: T::lit(X_D_PRIME[i]),
            x_q_prime: T::lit(X_Q_PRIME[i]),
            t_d0_prime: T::lit(T_D0_PRIME[i]),
            t_q0_prime: T::lit(T_Q0_PRIME[i]),
            p_m: T::lit(P_M[i]),
            e_fq: T::lit(E_FQ[i]),
        })
        .collect()
}

/// Two-axis parameters with `X'_q` replaced by `X'_d`.
pub fn fourth_order_isotropic_params<T: Real>() -> Vec<FourthOrderGenParams<T>> {
    let mut p = fourth_order_params::<T>();
    for (g, &x) in p.iter_mut().zip(&fourth_order::X_Q_PRIME_ISOTROPIC) {
        g.x_q_prime = T::lit(x);
    }
    p
}

pub fn fourth_order_state<T: Real>() -> DynamicState<T> {
    use fourth_order::*;
    DynamicState::fourth_order(
        &lit3::<T>(DELTA0),
        &[T::zero(); 3],
        &lit3::<T>(E_Q_PRIME0),
        &lit3::<T>(E_D_PRIME0),
    )
    .expect("valid state")
}

pub fn terminal_currents<T: Real>() -> [Complex<T>; 3] {
    std::array::from_fn(|i| Complex::new(T::lit(I_RE[i]), T::lit(I_IM[i])))
}

/// Classical system with the fault applied at `t = 0` and cleared at
/// `clear_time`.
pub fn classical_fault_scenario<T: Real>(clear_time: T, step: T, t_end: T) -> Scenario<T> {
    Scenario {
        machines: Machines::Classical(classical_params()),
        initial: InitialCondition::State(classical_state()),
        stages: vec![
            NetworkStage {
                label: StageLabel::Pre,
                network: StageNetwork::Internal(block_matrix(&INTERNAL_PRE)),
                t_start: T::zero(),
            },
            NetworkStage {
                label: StageLabel::On,
                network: StageNetwork::Internal(block_matrix(&INTERNAL_FAULT_ON)),
                t_start: T::zero(),
            },
            NetworkStage {
                label: StageLabel::Post,
                network: StageNetwork::Internal(block_matrix(&INTERNAL_POST_FAULT)),
                t_start: clear_time,
            },
        ],
        t_end,
        step,
        omega_s: synchronous_speed(T::lit(FREQUENCY_HZ)),
        stride: 1,
    }
}

/// Undisturbed classical system on the pre-fault matrix.
pub fn classical_steady_scenario<T: Real>(step: T, t_end: T) -> Scenario<T> {
    let mut s = classical_fault_scenario(T::zero(), step, t_end);
    s.stages.truncate(1);
    s
}
